#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <vector>

#include "manet/lifetime.hpp"
#include "manet/rng.hpp"

namespace manet {

enum class MobilityModel { RandomWaypoint, ConstantVelocity };

enum class LinkModelKind { Quadratic, UnitDisc, FixedP };

/// Distance -> delivery-probability map. Monotone non-increasing in the
/// distance/range ratio; zero beyond the sender's range.
struct LinkModel {
  LinkModelKind kind = LinkModelKind::Quadratic;
  double fixed_p = 1.0;  // used by FixedP

  double probability(double distance, double sender_range) const;
};

struct WorldConfig {
  double side = 1000.0;  // square deployment area, m
  int node_count = 100;
  double speed_mean = 0.2;       // m/s
  double initial_range = 500.0;  // m
  double initial_energy = 5.0;   // J
  double r_min = 10.0;
  double r_max = 1000.0;
  std::uint64_t seed = 1;
  MobilityModel mobility = MobilityModel::RandomWaypoint;
  LinkModel link;

  void validate() const;
};

/// Full per-node simulation state. The routing engine owns the packet queue
/// contents; everything else is spatial/energetic state.
struct NodeState {
  int id = 0;
  KinematicState kin;
  double range = 0.0;   // m
  double energy = 0.0;  // J
  bool alive = true;
  std::deque<int> queue;  // packet ids, FIFO

  // mobility internals
  double waypoint_x = 0.0;
  double waypoint_y = 0.0;
};

/// The spatial world: seeded placement, mobility stepping, neighbor and
/// survival-set queries, link delivery probabilities. Deterministic for a
/// fixed (config, seed, call sequence); one World per simulation thread.
class World {
 public:
  explicit World(const WorldConfig& cfg);

  const WorldConfig& config() const { return cfg_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  NodeState& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const NodeState& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::vector<NodeState>& nodes() { return nodes_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }

  double distance(int a, int b) const;

  /// Advance all alive nodes by dt. RandomWaypoint retargets on arrival;
  /// ConstantVelocity reflects at the square's walls.
  void step_mobility(double dt);

  /// Alive nodes j != s with distance(s,j) <= range(s) and
  /// distance(j,dest) < distance(s,dest), ascending id.
  std::vector<int> survival_set(int s, int dest) const;

  /// Delivery probability of a single transmission a -> b under the
  /// configured link model and a's current range.
  double link_delivery_prob(int a, int b) const;

  /// Debug snapshot: id,x,y,speed,heading,range,energy rows.
  void write_snapshot_csv(std::ostream& out) const;

 private:
  void place_nodes();
  void retarget(NodeState& n, Rng& rng);

  WorldConfig cfg_;
  std::vector<NodeState> nodes_;
  Rng place_rng_;
  Rng mobility_rng_;
};

}  // namespace manet
