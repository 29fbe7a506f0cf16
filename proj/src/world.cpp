#include "manet/world.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace manet {

double LinkModel::probability(double distance, double sender_range) const {
  if (sender_range <= 0.0 || distance > sender_range) return 0.0;
  switch (kind) {
    case LinkModelKind::UnitDisc:
      return 1.0;
    case LinkModelKind::FixedP:
      return std::clamp(fixed_p, 0.0, 1.0);
    case LinkModelKind::Quadratic: {
      const double ratio = distance / sender_range;
      return std::clamp(1.0 - ratio * ratio, 0.0, 1.0);
    }
  }
  return 0.0;
}

void WorldConfig::validate() const {
  if (side <= 0.0) throw std::invalid_argument("world: side must be > 0");
  if (node_count < 2) throw std::invalid_argument("world: need at least 2 nodes");
  if (speed_mean < 0.0) throw std::invalid_argument("world: speed_mean must be >= 0");
  if (initial_range <= 0.0) throw std::invalid_argument("world: initial_range must be > 0");
  if (r_min <= 0.0 || r_max < r_min) throw std::invalid_argument("world: bad range clamps");
}

World::World(const WorldConfig& cfg)
    : cfg_(cfg),
      place_rng_(Rng::stream(cfg.seed, "world.place")),
      mobility_rng_(Rng::stream(cfg.seed, "world.mobility")) {
  cfg_.validate();
  place_nodes();
}

void World::place_nodes() {
  nodes_.resize(static_cast<std::size_t>(cfg_.node_count));
  for (int i = 0; i < cfg_.node_count; ++i) {
    NodeState& n = nodes_[static_cast<std::size_t>(i)];
    n.id = i;
    n.kin.x = place_rng_.uniform(0.0, cfg_.side);
    n.kin.y = place_rng_.uniform(0.0, cfg_.side);
    // Speed drawn once per node, uniform on [0, 2*mean]: the ensemble mean
    // stays at the configured average for the whole run.
    n.kin.speed = place_rng_.uniform(0.0, 2.0 * cfg_.speed_mean);
    n.kin.heading = place_rng_.uniform(0.0, 2.0 * M_PI);
    n.range = std::clamp(cfg_.initial_range, cfg_.r_min, cfg_.r_max);
    n.energy = cfg_.initial_energy;
    n.alive = n.energy > 0.0;
    if (cfg_.mobility == MobilityModel::RandomWaypoint) retarget(n, place_rng_);
  }
}

void World::retarget(NodeState& n, Rng& rng) {
  n.waypoint_x = rng.uniform(0.0, cfg_.side);
  n.waypoint_y = rng.uniform(0.0, cfg_.side);
  const double dx = n.waypoint_x - n.kin.x;
  const double dy = n.waypoint_y - n.kin.y;
  n.kin.heading = normalize_angle(std::atan2(dy, dx));
}

double World::distance(int a, int b) const {
  const auto& na = node(a).kin;
  const auto& nb = node(b).kin;
  return std::hypot(na.x - nb.x, na.y - nb.y);
}

void World::step_mobility(double dt) {
  if (dt < 0.0) throw std::invalid_argument("step_mobility: dt must be >= 0");
  if (dt == 0.0) return;
  for (NodeState& n : nodes_) {
    if (!n.alive) continue;
    if (cfg_.mobility == MobilityModel::ConstantVelocity) {
      double x = n.kin.x + n.kin.vx() * dt;
      double y = n.kin.y + n.kin.vy() * dt;
      double hx = std::cos(n.kin.heading);
      double hy = std::sin(n.kin.heading);
      // reflective walls
      if (x < 0.0) { x = -x; hx = -hx; }
      if (x > cfg_.side) { x = 2.0 * cfg_.side - x; hx = -hx; }
      if (y < 0.0) { y = -y; hy = -hy; }
      if (y > cfg_.side) { y = 2.0 * cfg_.side - y; hy = -hy; }
      n.kin.x = std::clamp(x, 0.0, cfg_.side);
      n.kin.y = std::clamp(y, 0.0, cfg_.side);
      n.kin.heading = normalize_angle(std::atan2(hy, hx));
    } else {
      double remaining = n.kin.speed * dt;
      for (int hop = 0; hop < 16 && remaining > 0.0; ++hop) {
        const double dx = n.waypoint_x - n.kin.x;
        const double dy = n.waypoint_y - n.kin.y;
        const double to_wp = std::hypot(dx, dy);
        if (to_wp <= remaining) {
          n.kin.x = n.waypoint_x;
          n.kin.y = n.waypoint_y;
          remaining -= to_wp;
          retarget(n, mobility_rng_);
        } else {
          if (to_wp > 0.0) {
            n.kin.x += dx / to_wp * remaining;
            n.kin.y += dy / to_wp * remaining;
          }
          remaining = 0.0;
        }
      }
    }
  }
}

std::vector<int> World::survival_set(int s, int dest) const {
  std::vector<int> out;
  const NodeState& src = node(s);
  const double d_sd = distance(s, dest);
  for (const NodeState& n : nodes_) {
    if (n.id == s || !n.alive) continue;
    if (distance(s, n.id) <= src.range && distance(n.id, dest) < d_sd) out.push_back(n.id);
  }
  return out;
}

double World::link_delivery_prob(int a, int b) const {
  return cfg_.link.probability(distance(a, b), node(a).range);
}

void World::write_snapshot_csv(std::ostream& out) const {
  out << "id,x,y,speed,heading,range,energy\n";
  char buf[192];
  for (const NodeState& n : nodes_) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", n.id, n.kin.x, n.kin.y,
                  n.kin.speed, n.kin.heading, n.range, n.energy);
    out << buf;
  }
}

}  // namespace manet
