#include "manet/lifetime.hpp"

#include <cmath>

namespace manet {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kZeroSpeedEps = 1e-12;

double dist(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

/// Travel distance along direction (ux, uy) from point p (relative to a
/// circle center) until |p + X*u| = radius. Assumes |p| <= radius so the
/// forward intersection exists; returns the exit root (the larger one).
double chord_exit_distance(double px, double py, double ux, double uy, double radius) {
  const double along = px * ux + py * uy;
  const double disc = along * along - (px * px + py * py) + radius * radius;
  const double root = disc > 0.0 ? std::sqrt(disc) : 0.0;
  const double exit = -along + root;
  return exit > 0.0 ? exit : 0.0;
}

}  // namespace

double KinematicState::vx() const { return speed * std::cos(heading); }
double KinematicState::vy() const { return speed * std::sin(heading); }

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

RelativeVelocity relative_velocity(const KinematicState& a, const KinematicState& b) {
  RelativeVelocity v;
  v.vx = a.vx() - b.vx();
  v.vy = a.vy() - b.vy();
  v.speed = std::hypot(v.vx, v.vy);
  v.heading = v.speed > 0.0 ? normalize_angle(std::atan2(v.vy, v.vx)) : 0.0;
  return v;
}

double relative_angle(const RelativeVelocity& sdr, const KinematicState& s,
                      const KinematicState& d) {
  if (s.x == d.x && s.y == d.y) throw CoincidentNodesError();
  const double bearing = std::atan2(d.y - s.y, d.x - s.x);
  return normalize_angle(sdr.heading - bearing);
}

std::optional<double> residual_lifetime(const KinematicState& s, const KinematicState& r,
                                        const KinematicState& d, double range_m,
                                        double horizon_s) {
  const double d0 = dist(s.x, s.y, r.x, r.y);
  const double d_sd = dist(s.x, s.y, d.x, d.y);
  const double d_rd = dist(r.x, r.y, d.x, d.y);
  if (d0 > range_m || d_rd > d_sd) throw NotInSurvivalAreaError();

  // Relay motion relative to the source: (v_r - v_d) - (v_s - v_d).
  const RelativeVelocity v_sdr = relative_velocity(r, s);
  if (v_sdr.speed <= kZeroSpeedEps) return std::nullopt;

  const double theta_rel = relative_angle(v_sdr, s, d);
  const double ux = v_sdr.vx / v_sdr.speed;
  const double uy = v_sdr.vy / v_sdr.speed;

  const bool toward = theta_rel <= 0.5 * M_PI || theta_rel >= 1.5 * M_PI;
  double exit_dist;
  if (toward) {
    // Moving toward the destination side: the binding boundary is the range
    // circle of the source.
    exit_dist = chord_exit_distance(r.x - s.x, r.y - s.y, ux, uy, range_m);
  } else {
    // Receding: the binding boundary is the circle of radius d(s,d) around
    // the destination.
    exit_dist = chord_exit_distance(r.x - d.x, r.y - d.y, ux, uy, d_sd);
  }

  const double t = exit_dist / v_sdr.speed;
  if (!(t <= horizon_s)) return std::nullopt;
  return t;
}

std::optional<double> survival_exit_oracle(const KinematicState& s, const KinematicState& r,
                                           const KinematicState& d, double range_m, double dt_s,
                                           double horizon_s) {
  double sx = s.x, sy = s.y, rx = r.x, ry = r.y, dx = d.x, dy = d.y;
  const double svx = s.vx(), svy = s.vy();
  const double rvx = r.vx(), rvy = r.vy();
  const double dvx = d.vx(), dvy = d.vy();
  const long steps = static_cast<long>(std::ceil(horizon_s / dt_s));
  for (long i = 1; i <= steps; ++i) {
    sx += svx * dt_s;
    sy += svy * dt_s;
    rx += rvx * dt_s;
    ry += rvy * dt_s;
    dx += dvx * dt_s;
    dy += dvy * dt_s;
    if (dist(sx, sy, rx, ry) > range_m || dist(rx, ry, dx, dy) > dist(sx, sy, dx, dy))
      return static_cast<double>(i) * dt_s;
  }
  return std::nullopt;
}

}  // namespace manet
