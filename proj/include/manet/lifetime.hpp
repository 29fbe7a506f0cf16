#pragma once

#include <optional>
#include <stdexcept>

namespace manet {

/// Position plus velocity in polar form. Headings are radians in [0, 2pi),
/// measured counterclockwise from the +x axis.
struct KinematicState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double speed = 0.0;  // m/s, >= 0
  double heading = 0.0;

  double vx() const;
  double vy() const;
};

struct RelativeVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double speed = 0.0;
  double heading = 0.0;  // [0, 2pi); 0 when speed == 0
};

class CoincidentNodesError : public std::domain_error {
 public:
  CoincidentNodesError() : std::domain_error("source and destination positions coincide") {}
};

class NotInSurvivalAreaError : public std::domain_error {
 public:
  NotInSurvivalAreaError()
      : std::domain_error("relay is outside the survival area of the source") {}
};

/// Wrap an angle into [0, 2pi).
double normalize_angle(double a);

/// Vector difference a.velocity - b.velocity with speed/heading recovered via
/// hypot and two-argument arctangent. Zero vector has heading 0 by convention.
RelativeVelocity relative_velocity(const KinematicState& a, const KinematicState& b);

/// Heading of `sdr` measured from the s->d bearing, normalized to [0, 2pi).
/// Throws CoincidentNodesError when s and d share a position.
double relative_angle(const RelativeVelocity& sdr, const KinematicState& s,
                      const KinematicState& d);

inline constexpr double kUnboundedLifetimeSeconds = 1e9;

/// Predicted time until relay r exits the survival area of source s toward
/// destination d (the lens where distance(s,r) <= range and
/// distance(r,d) <= distance(s,d)). The relay's motion is taken relative to
/// the source, the region is treated as frozen at call time, and the exit is
/// solved against the range circle when the relative heading points toward
/// the destination side, against the destination circle otherwise.
///
/// Returns nullopt ("unbounded") when the relative speed is zero or the exit
/// lies beyond `horizon_s`. Throws NotInSurvivalAreaError when the relay is
/// not currently inside the region.
std::optional<double> residual_lifetime(const KinematicState& s, const KinematicState& r,
                                        const KinematicState& d, double range_m,
                                        double horizon_s = kUnboundedLifetimeSeconds);

/// Ground-truth check: advance all three nodes along their true straight-line
/// velocities in steps of dt and report the first time the relay violates
/// either survival-area condition, or nullopt if none within the horizon.
std::optional<double> survival_exit_oracle(const KinematicState& s, const KinematicState& r,
                                           const KinematicState& d, double range_m, double dt_s,
                                           double horizon_s);

}  // namespace manet
