#include "manet/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace manet {

const char* protocol_name(Protocol p) { return p == Protocol::CBRT ? "cbrt" : "exor"; }

std::optional<Protocol> parse_protocol(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "cbrt") return Protocol::CBRT;
  if (s == "exor") return Protocol::ExOR;
  return std::nullopt;
}

const char* MetricsLog::csv_header() {
  return "time,protocol,node_count,seed,etx,delay_s,queue_len,rnd,range_m,energy_j,"
         "throughput_bps,lifetime_s,c_otc";
}

void MetricsLog::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  char buf[512];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.9g,%s,%d,%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.time,
                  protocol_name(r.protocol), r.node_count,
                  static_cast<unsigned long long>(r.seed), r.etx, r.delay_s, r.queue_len, r.rnd,
                  r.range_m, r.energy_j, r.throughput_bps, r.lifetime_s, r.c_otc);
    out << buf;
  }
}

void SimConfig::validate() const {
  world.validate();
  policy.validate();
  if (duration_s <= 0.0) throw std::invalid_argument("sim: duration must be > 0");
  if (warmup_s < 0.0 || warmup_s >= duration_s)
    throw std::invalid_argument("sim: warmup must be in [0, duration)");
  if (data_rate_bps <= 0.0 || packet_bits <= 0 || control_bits <= 0)
    throw std::invalid_argument("sim: bad radio parameters");
  if (beacon_interval_s <= 0.0 || mobility_dt_s <= 0.0 || sample_interval_s <= 0.0)
    throw std::invalid_argument("sim: cadence intervals must be > 0");
  if (traffic_rate_pps < 0.0 || flows < 0) throw std::invalid_argument("sim: bad traffic config");
  if (max_retries < 1) throw std::invalid_argument("sim: max_retries must be >= 1");
  if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0))
    throw std::invalid_argument("sim: ewma_alpha must be in (0, 1]");
  if (policy.network_size != world.node_count)
    throw std::invalid_argument("sim: policy network size must match the node count");
}

namespace {

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::DataTx;
  int a = -1;  // node
  int b = -1;  // packet id, or -(flow+1) for traffic arrivals
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    return x.seq > y.seq;
  }
};

struct Flow {
  int src = -1;
  int dest = -1;
  std::vector<int> batch;  // buffered packet ids awaiting batch release
  double batch_started = 0.0;
};

constexpr double kUnknownEstimate = -1.0;

}  // namespace

struct Simulator::Impl {
  SimConfig cfg;
  World world;
  Rng link_rng;
  Rng traffic_rng;
  Rng proto_rng;

  double now = 0.0;
  std::uint64_t seq = 0;
  std::priority_queue<Event, std::vector<Event>, EventLater> events;

  std::vector<Packet> packets;
  std::vector<Flow> flows;
  std::vector<double> proc_delay_s;     // per node, drawn once
  std::vector<double> busy_until;       // radio occupancy per node
  std::vector<char> tx_pending;         // a DataTx event is already queued
  std::vector<std::vector<int>> parked; // packets awaiting the next beacon round
  std::vector<double> link_est;         // EWMA p-hat, row-major [a * N + b]
  std::unordered_map<int, std::vector<double>> etx_to_dest;  // ExOR tables
  double delta_star = 0.0;              // Poisson-optimal survival area

  struct CacheEntry {
    bool valid = false;
    CandidateRelaySet set;
  };
  std::vector<CacheEntry> cand_cache;
  double next_lsr_time = 0.0;

  RunTotals totals;

  // per-sample-window accumulators
  double win_rnd_sum = 0.0;
  long win_rnd_n = 0;
  double win_lifetime_sum = 0.0;
  long win_lifetime_n = 0;
  std::vector<char> win_adjusters;
  long win_adjuster_count = 0;

  MetricsLog log;

  explicit Impl(const SimConfig& c)
      : cfg(c),
        world(c.world),
        link_rng(Rng::stream(c.seed, "sim.link")),
        traffic_rng(Rng::stream(c.seed, "sim.traffic")),
        proto_rng(Rng::stream(c.seed, "sim.proto")) {
    cfg.validate();
    const int n = world.size();
    proc_delay_s.resize(static_cast<std::size_t>(n));
    busy_until.assign(static_cast<std::size_t>(n), 0.0);
    tx_pending.assign(static_cast<std::size_t>(n), 0);
    parked.resize(static_cast<std::size_t>(n));
    link_est.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kUnknownEstimate);
    cand_cache.resize(static_cast<std::size_t>(n));
    win_adjusters.assign(static_cast<std::size_t>(n), 0);

    Rng setup = Rng::stream(cfg.seed, "sim.setup");
    for (int i = 0; i < n; ++i)
      proc_delay_s[static_cast<std::size_t>(i)] = setup.uniform(0.001, 0.005);

    const double rho = static_cast<double>(cfg.world.node_count) /
                       (cfg.world.side * cfg.world.side);
    delta_star = topology::optimal_area({rho}, cfg.policy.n1, cfg.policy.n2);

    pick_flows(setup);
  }

  void pick_flows(Rng& rng) {
    const int n = world.size();
    const double min_sep = cfg.min_flow_separation_frac * cfg.world.side;
    for (int f = 0; f < cfg.flows; ++f) {
      int src = -1, dest = -1;
      for (int attempt = 0; attempt < 512; ++attempt) {
        src = static_cast<int>(rng.uniform_int(0, n - 1));
        dest = static_cast<int>(rng.uniform_int(0, n - 1));
        if (src != dest && world.distance(src, dest) >= min_sep) break;
      }
      if (src == dest) dest = (src + 1) % n;
      flows.push_back({src, dest});
    }
  }

  // ---- bookkeeping -------------------------------------------------------

  void count(EventKind k, long inc = 1) {
    totals.event_counts[static_cast<std::size_t>(k)] += inc;
  }

  void schedule(double t, EventKind kind, int a, int b) {
    events.push(Event{t, seq++, kind, a, b});
  }

  double data_airtime() const { return cfg.packet_bits / cfg.data_rate_bps; }
  double control_airtime() const { return cfg.control_bits / cfg.data_rate_bps; }

  double tx_power(const NodeState& n) const {
    return n.range > cfg.high_power_range_fraction * cfg.world.initial_range ? cfg.tx_power_high_w
                                                                             : cfg.tx_power_low_w;
  }

  void consume(int id, double joules) {
    NodeState& n = world.node(id);
    if (!n.alive) return;
    const double spent = std::min(joules, n.energy);
    n.energy -= spent;
    totals.consumed_j += spent;
    if (n.energy <= 0.0) {
      n.energy = 0.0;
      n.alive = false;
      kill_node(id);
    }
  }

  void charge_tx(int id, int bits) {
    consume(id, tx_power(world.node(id)) * bits / cfg.data_rate_bps);
  }

  void charge_rx(int id, int bits) { consume(id, cfg.rx_power_w * bits / cfg.data_rate_bps); }

  void kill_node(int id) {
    NodeState& n = world.node(id);
    for (int pkt : n.queue) drop_packet(pkt, &totals.dropped_dead);
    n.queue.clear();
    for (int pkt : parked[static_cast<std::size_t>(id)]) drop_packet(pkt, &totals.dropped_dead);
    parked[static_cast<std::size_t>(id)].clear();
    cand_cache[static_cast<std::size_t>(id)].valid = false;
  }

  void drop_packet(int pkt_id, long* reason_counter) {
    Packet& p = packets[static_cast<std::size_t>(pkt_id)];
    if (p.state == Packet::State::Dropped || p.state == Packet::State::Delivered) return;
    p.state = Packet::State::Dropped;
    ++totals.dropped;
    ++(*reason_counter);
  }

  // ---- link estimation ---------------------------------------------------

  double estimate(int a, int b) const {
    const double v = link_est[static_cast<std::size_t>(a) * world.size() + b];
    return v < 0.0 ? 0.5 : v;
  }

  void update_estimate(int a, int b, bool received) {
    double& e = link_est[static_cast<std::size_t>(a) * world.size() + b];
    const double prev = e < 0.0 ? 0.5 : e;
    e = (1.0 - cfg.ewma_alpha) * prev + cfg.ewma_alpha * (received ? 1.0 : 0.0);
  }

  void run_beacon_round() {
    const int n = world.size();
    // Link-state payload rides on this round's beacons when due: the
    // shortest-path tables need every node's neighbor measurements
    // disseminated, and that bandwidth is not free.
    const bool lsr_due = cfg.protocol == Protocol::ExOR && cfg.lsr_bits_per_neighbor > 0 &&
                         now >= next_lsr_time;
    if (lsr_due) next_lsr_time = now + cfg.lsr_interval_s;
    for (int a = 0; a < n; ++a) {
      NodeState& sender = world.node(a);
      if (!sender.alive) continue;
      int beacon_bits = cfg.control_bits;
      if (lsr_due) {
        int degree = 0;
        for (int b = 0; b < n; ++b) {
          if (b != a && world.node(b).alive && world.distance(a, b) <= sender.range) ++degree;
        }
        beacon_bits += cfg.lsr_bits_per_neighbor * degree;
      }
      charge_tx(a, beacon_bits);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const NodeState& rx = world.node(b);
        if (!rx.alive) continue;
        if (world.distance(a, b) > sender.range) continue;
        const bool got = link_rng.bernoulli(world.link_delivery_prob(a, b));
        update_estimate(a, b, got);
        if (got) charge_rx(b, beacon_bits);
      }
    }
    if (cfg.protocol == Protocol::ExOR) {
      for (const Flow& f : flows) refresh_etx_table(f.dest);
    }
  }

  /// Single-source shortest ETX over the directed beacon graph, run from the
  /// destination over reversed links.
  void refresh_etx_table(int dest) {
    const int n = world.size();
    auto& dist = etx_to_dest[dest];
    dist.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> heap;
    dist[static_cast<std::size_t>(dest)] = 0.0;
    heap.emplace(0.0, dest);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(v)]) continue;
      // relax reversed edges u -> v (u transmits to v)
      for (int u = 0; u < n; ++u) {
        if (u == v || !world.node(u).alive) continue;
        const double raw = link_est[static_cast<std::size_t>(u) * n + v];
        if (raw < 0.0) continue;  // never observed
        if (world.distance(u, v) > world.node(u).range) continue;
        const double w = 1.0 / std::clamp(raw, cfg.p_est_floor, 1.0);
        const double nd = d + w;
        if (nd < dist[static_cast<std::size_t>(u)]) {
          dist[static_cast<std::size_t>(u)] = nd;
          heap.emplace(nd, u);
        }
      }
    }
  }

  // ---- candidate construction --------------------------------------------

  double capped_lifetime(int s, int relay, int dest) {
    const NodeState& sn = world.node(s);
    try {
      const auto t = residual_lifetime(sn.kin, world.node(relay).kin, world.node(dest).kin,
                                       sn.range, cfg.lifetime_horizon_s);
      return t ? *t : cfg.lifetime_horizon_s;
    } catch (const NotInSurvivalAreaError&) {
      return 0.0;  // boundary rounding
    }
  }

  double closing_speed(int relay, int dest) const {
    const KinematicState& r = world.node(relay).kin;
    const KinematicState& d = world.node(dest).kin;
    const double dx = d.x - r.x;
    const double dy = d.y - r.y;
    const double dist = std::hypot(dx, dy);
    if (dist <= 0.0) return 0.0;
    return ((r.vx() - d.vx()) * dx + (r.vy() - d.vy()) * dy) / dist;
  }

  sbfl::MetricTable cross_layer_metrics(int s, int dest, const std::vector<int>& members) {
    sbfl::MetricTable t;
    t.column_names = {"energy_j",     "link_etx",    "queue_len",    "proc_delay_s",
                      "dist_to_dest", "lifetime_s",  "closing_mps"};
    using sbfl::Orientation;
    t.orientations = {Orientation::Benefit, Orientation::Cost,    Orientation::Cost,
                      Orientation::Cost,    Orientation::Cost,    Orientation::Benefit,
                      Orientation::Benefit};
    for (int id : members) {
      const NodeState& c = world.node(id);
      const double load = static_cast<double>(c.queue.size() +
                                              parked[static_cast<std::size_t>(id)].size());
      t.values.push_back({c.energy,
                          1.0 / std::clamp(estimate(s, id), cfg.p_est_floor, 1.0),
                          load,
                          proc_delay_s[static_cast<std::size_t>(id)],
                          world.distance(id, dest),
                          capped_lifetime(s, id, dest),
                          closing_speed(id, dest)});
    }
    return t;
  }

  double optimal_range_for(int s, int dest) const {
    const double d = std::max(world.distance(s, dest), 1.0);
    // Largest survival area any range can produce for this destination
    // distance is ~1.648 d^2 (peak of r^2 acos(r/2d)). Closer in, the band
    // geometry is unsatisfiable; a node that close is on the terminal hop,
    // so target the delivery-ratio floor on the direct link instead.
    const double peak_area = 1.648 * d * d;
    double r;
    if (delta_star >= 0.98 * peak_area) {
      r = d / std::sqrt(std::max(1.0 - cfg.policy.p1, 1e-3));
    } else {
      r = topology::optimal_range(delta_star, d, {cfg.world.r_min, cfg.world.r_max});
    }
    return std::clamp(r, cfg.world.r_min, cfg.world.r_max);
  }

  bool otc_adjust(int s, int rnd, int dest) {
    const int capped = std::min(rnd, cfg.policy.network_size);
    const double p = topology::adjustment_probability(capped, cfg.policy);
    if (p <= 0.0 || !proto_rng.bernoulli(p)) return false;
    NodeState& n = world.node(s);
    n.range = optimal_range_for(s, dest);
    count(EventKind::RangeAdjust);
    cand_cache[static_cast<std::size_t>(s)].valid = false;
    if (!win_adjusters[static_cast<std::size_t>(s)]) {
      win_adjusters[static_cast<std::size_t>(s)] = 1;
      ++win_adjuster_count;
    }
    return true;
  }

  CandidateRelaySet build_cbrt(int s, int dest) {
    NodeState& src = world.node(s);
    CandidateRelaySet set;
    set.built_at = now;
    set.dest = dest;

    // RREQ broadcast; survival-set members answer with RREP.
    count(EventKind::RouteRequest);
    charge_tx(s, cfg.control_bits);
    std::vector<int> members = world.survival_set(s, dest);
    for (int id : members) charge_rx(id, cfg.control_bits);

    const double old_range = src.range;
    if (otc_adjust(s, static_cast<int>(members.size()), dest)) {
      if (src.range > old_range) {
        // widen: one more RREQ reaches the newly covered nodes
        count(EventKind::RouteRequest);
        charge_tx(s, cfg.control_bits);
      }
      members = world.survival_set(s, dest);
    }
    set.rnd = static_cast<int>(members.size());
    if (members.empty()) return set;

    count(EventKind::RouteReply, static_cast<long>(members.size()));
    for (int id : members) {
      charge_tx(id, cfg.control_bits);
      charge_rx(s, cfg.control_bits);
    }

    std::vector<double> lifetimes;
    lifetimes.reserve(members.size());
    for (int id : members) lifetimes.push_back(capped_lifetime(s, id, dest));

    if (cfg.metrics_override) {
      const auto table = cfg.metrics_override(world, s, dest, members);
      std::ostringstream sink;
      const auto order = sbfl::prioritize(table, sbfl::FuzzySystem{}, &sink);
      for (const auto& [row, utility] : order) {
        CandidateMember m;
        m.node = members[static_cast<std::size_t>(row)];
        m.utility = utility;
        m.p_est = estimate(s, m.node);
        m.lifetime_s = lifetimes[static_cast<std::size_t>(row)];
        set.members.push_back(m);
      }
      return set;
    }

    // Eligibility gate, then fuzzy-weighted rank utilities.
    std::vector<int> eligible;
    std::vector<double> elig_lifetimes;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const int id = members[i];
      if (id != dest && world.node(id).energy < cfg.min_relay_energy_j) continue;
      eligible.push_back(id);
      elig_lifetimes.push_back(lifetimes[i]);
    }
    if (eligible.empty()) return set;

    auto table = cross_layer_metrics(s, dest, eligible);
    std::ostringstream warn;
    const auto order = sbfl::prioritize(table, sbfl::FuzzySystem{}, &warn);
    const std::string warn_text = warn.str();
    totals.zero_mean_columns += std::count(warn_text.begin(), warn_text.end(), '\n');
    for (const auto& [row, utility] : order) {
      CandidateMember m;
      m.node = eligible[static_cast<std::size_t>(row)];
      m.utility = utility;
      m.p_est = estimate(s, m.node);
      m.lifetime_s = elig_lifetimes[static_cast<std::size_t>(row)];
      set.members.push_back(m);
    }
    return set;
  }

  CandidateRelaySet build_exor(int s, int dest) {
    CandidateRelaySet set;
    set.built_at = now;
    set.dest = dest;
    std::vector<int> members = world.survival_set(s, dest);
    set.rnd = static_cast<int>(members.size());
    if (members.empty()) return set;

    auto it = etx_to_dest.find(dest);
    if (it == etx_to_dest.end()) {
      refresh_etx_table(dest);
      it = etx_to_dest.find(dest);
    }
    const auto& etx = it->second;

    std::vector<int> order(members.begin(), members.end());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double ea = etx[static_cast<std::size_t>(a)];
      const double eb = etx[static_cast<std::size_t>(b)];
      if (ea != eb) return ea < eb;
      return a < b;
    });
    for (int id : order) {
      CandidateMember m;
      m.node = id;
      const double e = etx[static_cast<std::size_t>(id)];
      m.utility = std::isinf(e) ? -1e9 : -e;
      m.p_est = estimate(s, id);
      m.lifetime_s = capped_lifetime(s, id, dest);
      set.members.push_back(m);
    }
    return set;
  }

  CandidateRelaySet build(int s, int dest) {
    CandidateRelaySet set =
        cfg.protocol == Protocol::CBRT ? build_cbrt(s, dest) : build_exor(s, dest);
    win_rnd_sum += set.rnd;
    ++win_rnd_n;
    if (now >= cfg.warmup_s) {
      totals.pw_rnd_sum += set.rnd;
      ++totals.pw_rnd_n;
    }
    if (!set.members.empty()) {
      double acc = 0.0;
      for (const auto& m : set.members) acc += m.lifetime_s;
      const double mean_life = acc / static_cast<double>(set.members.size());
      win_lifetime_sum += mean_life;
      ++win_lifetime_n;
      if (now >= cfg.warmup_s) {
        totals.pw_lifetime_sum += mean_life;
        ++totals.pw_lifetime_n;
      }
    }
    if (cfg.validate_candidates) {
      const double d_sd = world.distance(s, dest);
      for (const auto& m : set.members) {
        if (world.distance(s, m.node) > world.node(s).range ||
            world.distance(m.node, dest) >= d_sd)
          throw std::logic_error("candidate outside the survival area at build time");
      }
    }
    return set;
  }

  const CandidateRelaySet& cached_candidates(int s, int dest) {
    CacheEntry& e = cand_cache[static_cast<std::size_t>(s)];
    if (!e.valid || e.set.dest != dest || now - e.set.built_at > cfg.candidate_cache_s) {
      e.set = build(s, dest);
      e.valid = true;
    }
    return e.set;
  }

  // ---- forwarding ----------------------------------------------------------

  ForwardOutcome attempt(int s, const CandidateRelaySet& cands) {
    ForwardOutcome out;
    charge_tx(s, cfg.packet_bits);
    count(EventKind::DataTx);
    int forwarder = -1;
    bool delivered = false;
    int receivers = 0;
    for (const auto& m : cands.members) {
      const NodeState& c = world.node(m.node);
      const double p = c.alive ? world.link_delivery_prob(s, m.node) : 0.0;
      const bool got = link_rng.bernoulli(p);
      if (!got) continue;
      ++receivers;
      charge_rx(m.node, cfg.packet_bits);
      if (m.node == cands.dest) delivered = true;
      if (forwarder < 0) forwarder = m.node;
    }
    out.receivers = receivers;
    if (delivered) {
      out.result = ForwardResult::Delivered;
      out.forwarder = cands.dest;
    } else if (forwarder >= 0) {
      out.result = ForwardResult::Forwarded;
      out.forwarder = forwarder;
    } else {
      out.result = ForwardResult::NoReceiver;
    }
    if (receivers > 1) count(EventKind::AckOverhear, receivers - 1);
    return out;
  }

  // ---- event handlers ------------------------------------------------------

  void try_start_service(int id) {
    NodeState& n = world.node(id);
    if (!n.alive || tx_pending[static_cast<std::size_t>(id)] || n.queue.empty()) return;
    tx_pending[static_cast<std::size_t>(id)] = 1;
    schedule(std::max(now, busy_until[static_cast<std::size_t>(id)]), EventKind::DataTx, id, -1);
  }

  void handle_data_tx(int id) {
    tx_pending[static_cast<std::size_t>(id)] = 0;
    NodeState& n = world.node(id);
    if (!n.alive || n.queue.empty()) return;
    const int pkt_id = n.queue.front();
    Packet& pkt = packets[static_cast<std::size_t>(pkt_id)];

    const CandidateRelaySet& cands = cached_candidates(id, pkt.dest);
    if (cands.members.empty()) {
      n.queue.pop_front();
      ++pkt.nc_retries;
      if (pkt.nc_retries > cfg.max_retries) {
        drop_packet(pkt_id, &totals.dropped_no_candidates);
      } else {
        pkt.state = Packet::State::Parked;
        parked[static_cast<std::size_t>(id)].push_back(pkt_id);
      }
      try_start_service(id);
      return;
    }

    ++pkt.attempts;
    ++pkt.tx_count;
    ++totals.data_tx;
    const double airtime = data_airtime();
    busy_until[static_cast<std::size_t>(id)] = now + airtime;
    const ForwardOutcome out = attempt(id, cands);

    if (out.result == ForwardResult::Delivered) {
      n.queue.pop_front();
      ++pkt.hops;
      ++totals.success_hops;
      pkt.state = Packet::State::Delivered;
      ++totals.delivered;
      totals.delivered_bits += cfg.packet_bits;
      totals.delay_sum_s += (now + airtime) - pkt.created_at;
    } else if (out.result == ForwardResult::Forwarded) {
      n.queue.pop_front();
      ++pkt.hops;
      ++totals.success_hops;
      pkt.attempts = 0;
      pkt.state = Packet::State::Transit;
      schedule(now + airtime + proc_delay_s[static_cast<std::size_t>(out.forwarder)],
               EventKind::DataRx, out.forwarder, pkt_id);
    } else {
      if (pkt.attempts >= cfg.max_retries) {
        n.queue.pop_front();
        drop_packet(pkt_id, &totals.dropped_retries);
      } else {
        busy_until[static_cast<std::size_t>(id)] += cfg.retry_backoff_s;
      }
    }
    if (world.node(id).alive) try_start_service(id);
  }

  void flush_batch(Flow& f) {
    NodeState& src = world.node(f.src);
    for (int pkt_id : f.batch) {
      if (!src.alive) {
        drop_packet(pkt_id, &totals.dropped_dead);
      } else {
        src.queue.push_back(pkt_id);
      }
    }
    f.batch.clear();
    if (src.alive) try_start_service(f.src);
  }

  void handle_data_rx(int id, int b) {
    count(EventKind::DataRx);
    if (b < 0) {  // traffic arrival for flow -(b+1)
      const int flow_idx = -(b + 1);
      Flow& f = flows[static_cast<std::size_t>(flow_idx)];
      Packet pkt;
      pkt.id = static_cast<int>(packets.size());
      pkt.src = f.src;
      pkt.dest = f.dest;
      pkt.created_at = now;
      ++totals.generated;
      packets.push_back(pkt);
      NodeState& src = world.node(f.src);
      if (!src.alive) {
        drop_packet(pkt.id, &totals.dropped_dead);
      } else if (cfg.protocol == Protocol::ExOR && cfg.exor_batch_size > 1) {
        if (f.batch.empty()) f.batch_started = now;
        f.batch.push_back(pkt.id);
        if (static_cast<int>(f.batch.size()) >= cfg.exor_batch_size) flush_batch(f);
      } else {
        src.queue.push_back(pkt.id);
        try_start_service(f.src);
      }
      const double next = now + traffic_rng.exponential(1.0 / cfg.traffic_rate_pps);
      if (next <= cfg.duration_s) schedule(next, EventKind::DataRx, f.src, b);
      return;
    }
    Packet& pkt = packets[static_cast<std::size_t>(b)];
    NodeState& n = world.node(id);
    if (!n.alive) {
      drop_packet(b, &totals.dropped_dead);
      return;
    }
    pkt.state = Packet::State::Queued;
    n.queue.push_back(b);
    try_start_service(id);
  }

  void handle_beacon_round() {
    count(EventKind::BeaconRound);
    run_beacon_round();
    if (cfg.protocol == Protocol::CBRT && cfg.network_otc && !flows.empty()) {
      const int primary_dest = flows.front().dest;
      for (int i = 0; i < world.size(); ++i) {
        if (i == primary_dest || !world.node(i).alive) continue;
        const int rnd = static_cast<int>(world.survival_set(i, primary_dest).size());
        otc_adjust(i, rnd, primary_dest);
      }
    }
    // release stale traffic batches
    if (cfg.protocol == Protocol::ExOR && cfg.exor_batch_size > 1) {
      for (Flow& f : flows) {
        if (!f.batch.empty() && now - f.batch_started >= cfg.exor_batch_timeout_s) flush_batch(f);
      }
    }
    // retry packets that had no candidates
    for (int i = 0; i < world.size(); ++i) {
      auto& lot = parked[static_cast<std::size_t>(i)];
      if (lot.empty()) continue;
      NodeState& n = world.node(i);
      for (int pkt_id : lot) {
        packets[static_cast<std::size_t>(pkt_id)].state = Packet::State::Queued;
        n.queue.push_back(pkt_id);
      }
      lot.clear();
      cand_cache[static_cast<std::size_t>(i)].valid = false;
      try_start_service(i);
    }
    const double next = now + cfg.beacon_interval_s;
    if (next <= cfg.duration_s) schedule(next, EventKind::BeaconRound, -1, -1);
  }

  void handle_mobility_tick() {
    count(EventKind::MobilityTick);
    world.step_mobility(cfg.mobility_dt_s);
    const double next = now + cfg.mobility_dt_s;
    if (next <= cfg.duration_s) schedule(next, EventKind::MobilityTick, -1, -1);
  }

  void append_sample() {
    count(EventKind::MetricSample);
    MetricsRow row;
    row.time = now;
    row.protocol = cfg.protocol;
    row.node_count = cfg.world.node_count;
    row.seed = cfg.seed;
    row.etx = totals.success_hops > 0
                  ? static_cast<double>(totals.data_tx) / static_cast<double>(totals.success_hops)
                  : 0.0;
    row.delay_s = totals.delivered > 0 ? totals.delay_sum_s / totals.delivered : 0.0;
    int alive = 0;
    double queue_acc = 0.0;
    double range_acc = 0.0;
    double energy_acc = 0.0;
    for (const NodeState& n : world.nodes()) {
      energy_acc += n.energy;
      range_acc += n.range;  // a radio setting, meaningful dead or alive
      if (!n.alive) continue;
      ++alive;
      queue_acc += static_cast<double>(n.queue.size() +
                                       parked[static_cast<std::size_t>(n.id)].size());
    }
    row.queue_len = alive > 0 ? queue_acc / alive : 0.0;
    row.range_m = range_acc / world.size();
    row.energy_j = energy_acc;
    row.rnd = win_rnd_n > 0 ? win_rnd_sum / win_rnd_n : 0.0;
    row.lifetime_s = win_lifetime_n > 0 ? win_lifetime_sum / win_lifetime_n : 0.0;
    row.throughput_bps = now > 0.0 ? totals.delivered_bits / now : 0.0;
    row.c_otc = alive > 0 ? static_cast<double>(win_adjuster_count) / alive : 0.0;
    log.rows.push_back(row);

    win_rnd_sum = 0.0;
    win_rnd_n = 0;
    win_lifetime_sum = 0.0;
    win_lifetime_n = 0;
    std::fill(win_adjusters.begin(), win_adjusters.end(), 0);
    win_adjuster_count = 0;
  }

  void handle_metric_sample() {
    append_sample();
    const double next = now + cfg.sample_interval_s;
    if (next <= cfg.duration_s) schedule(next, EventKind::MetricSample, -1, -1);
  }

  RunResult run() {
    schedule(0.0, EventKind::BeaconRound, -1, -1);
    schedule(cfg.mobility_dt_s, EventKind::MobilityTick, -1, -1);
    schedule(cfg.sample_interval_s, EventKind::MetricSample, -1, -1);
    for (std::size_t f = 0; f < flows.size(); ++f) {
      if (cfg.traffic_rate_pps <= 0.0) break;
      const double first = traffic_rng.exponential(1.0 / cfg.traffic_rate_pps);
      if (first <= cfg.duration_s)
        schedule(first, EventKind::DataRx, flows[f].src, -static_cast<int>(f) - 1);
    }

    while (!events.empty()) {
      const Event ev = events.top();
      events.pop();
      if (ev.time > cfg.duration_s) break;
      now = ev.time;
      switch (ev.kind) {
        case EventKind::BeaconRound: handle_beacon_round(); break;
        case EventKind::MobilityTick: handle_mobility_tick(); break;
        case EventKind::MetricSample: handle_metric_sample(); break;
        case EventKind::DataTx: handle_data_tx(ev.a); break;
        case EventKind::DataRx: handle_data_rx(ev.a, ev.b); break;
        default: break;  // trace-only kinds never reach the queue
      }
    }
    now = cfg.duration_s;
    if (log.rows.empty() || log.rows.back().time < cfg.duration_s) append_sample();

    for (const Packet& p : packets) {
      if (p.state == Packet::State::Queued || p.state == Packet::State::Parked ||
          p.state == Packet::State::Transit)
        ++totals.in_flight;
    }

    RunResult result;
    result.totals = totals;
    result.log = std::move(log);
    const MetricsRow& last = result.log.rows.back();
    result.final_etx = last.etx;
    result.final_delay_s = last.delay_s;
    result.final_throughput_bps = last.throughput_bps;
    result.final_energy_j = last.energy_j;
    return result;
  }
};

Simulator::Simulator(const SimConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
Simulator::~Simulator() = default;

RunResult Simulator::run() { return impl_->run(); }
World& Simulator::world() { return impl_->world; }
const SimConfig& Simulator::config() const { return impl_->cfg; }
void Simulator::beacon_round_once() { impl_->run_beacon_round(); }
CandidateRelaySet Simulator::build_candidates(int s, int dest) { return impl_->build(s, dest); }
ForwardOutcome Simulator::forward_attempt(int s, const CandidateRelaySet& cands) {
  return impl_->attempt(s, cands);
}
bool Simulator::adjust_range_once(int s, int rnd, int dest) {
  return impl_->otc_adjust(s, rnd, dest);
}
double Simulator::link_estimate(int a, int b) const { return impl_->estimate(a, b); }
long Simulator::event_count(EventKind k) const {
  return impl_->totals.event_counts[static_cast<std::size_t>(k)];
}

RunResult run_simulation(const SimConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

}  // namespace manet
