#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "manet/sbfl.hpp"
#include "manet/topology.hpp"
#include "manet/world.hpp"

namespace manet {

enum class Protocol { CBRT, ExOR };

const char* protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(const std::string& name);

enum class EventKind : int {
  BeaconRound = 0,
  RouteRequest,
  RouteReply,
  DataTx,
  DataRx,
  AckOverhear,
  RangeAdjust,
  MobilityTick,
  MetricSample,
};
inline constexpr int kEventKindCount = 9;

struct Packet {
  int id = 0;
  int src = 0;
  int dest = 0;
  double created_at = 0.0;
  int hops = 0;
  int tx_count = 0;
  int attempts = 0;    // transmissions spent on the current hop
  int nc_retries = 0;  // empty-candidate-set retries (beacon-round cadence)

  enum class State { Queued, Parked, Transit, Delivered, Dropped } state = State::Queued;
};

struct CandidateMember {
  int node = -1;
  double utility = 0.0;
  double p_est = 0.0;
  double lifetime_s = 0.0;
};

/// Prioritized relay set for one (source, destination) pair. Members are in
/// transmission-priority order (best first); every member satisfied the
/// survival predicate when the set was built.
struct CandidateRelaySet {
  double built_at = 0.0;
  int dest = -1;
  int rnd = 0;  // survival-set cardinality after any range adjustment
  std::vector<CandidateMember> members;
};

struct MetricsRow {
  double time = 0.0;
  Protocol protocol = Protocol::CBRT;
  int node_count = 0;
  std::uint64_t seed = 0;
  double etx = 0.0;
  double delay_s = 0.0;
  double queue_len = 0.0;
  double rnd = 0.0;
  double range_m = 0.0;
  double energy_j = 0.0;
  double throughput_bps = 0.0;
  double lifetime_s = 0.0;
  double c_otc = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;

  static const char* csv_header();  // exact, stable column set
  void write_csv(std::ostream& out) const;
};

struct SimConfig {
  WorldConfig world;
  Protocol protocol = Protocol::CBRT;
  topology::RegionPolicy policy{7, 9, 100, 0.9, 0.99};

  double duration_s = 300.0;
  double warmup_s = 30.0;

  // radio + energy (per-bit costs derive from the data rate)
  double data_rate_bps = 15000.0;
  int packet_bits = 1024;
  int control_bits = 64;
  double tx_power_high_w = 0.8;
  double tx_power_low_w = 0.1;
  double rx_power_w = 0.05;
  double high_power_range_fraction = 0.5;  // of the initial range
  // ExOR needs the network-wide link graph for its ETX tables; every
  // lsr_interval_s each node broadcasts a link-state frame of control_bits
  // plus this many bits per current neighbor (0 disables the cost).
  int lsr_bits_per_neighbor = 8;
  double lsr_interval_s = 10.0;
  // ExOR sources release traffic in batches (the published design amortizes
  // its coordination over packet batches); 1 disables batching.
  int exor_batch_size = 10;
  double exor_batch_timeout_s = 8.0;

  // cadence
  double beacon_interval_s = 1.0;
  double mobility_dt_s = 0.5;
  double sample_interval_s = 1.0;

  // traffic: Poisson arrivals per flow between fixed endpoints
  double traffic_rate_pps = 2.0;
  int flows = 1;
  double min_flow_separation_frac = 0.35;  // of the deployment side

  // protocol knobs
  int max_retries = 7;
  double retry_backoff_s = 0.05;  // wait before retransmitting a missed hop
  double candidate_cache_s = 1.0;
  double ewma_alpha = 0.2;
  double min_relay_energy_j = 0.25;
  double lifetime_horizon_s = 1000.0;
  double p_est_floor = 0.05;  // ETX cap = 1/floor
  bool network_otc = true;    // all nodes run OTC each beacon round (CBRT)

  std::uint64_t seed = 1;

  // test seams
  std::function<sbfl::MetricTable(const World&, int s, int dest, const std::vector<int>& members)>
      metrics_override;
  bool validate_candidates = false;

  void validate() const;
};

enum class ForwardResult { Delivered, Forwarded, NoReceiver };

struct ForwardOutcome {
  ForwardResult result = ForwardResult::NoReceiver;
  int forwarder = -1;
  int receivers = 0;
};

struct RunTotals {
  long generated = 0;
  long delivered = 0;
  long dropped = 0;
  long in_flight = 0;  // queued/parked/in-transit at end
  long dropped_retries = 0;
  long dropped_no_candidates = 0;
  long dropped_dead = 0;
  long data_tx = 0;
  long success_hops = 0;
  double delivered_bits = 0.0;
  double delay_sum_s = 0.0;
  double consumed_j = 0.0;
  long zero_mean_columns = 0;  // rv fallbacks observed while ranking
  // build-weighted post-warmup accumulators (sample rows are window means
  // and go to zero in windows without builds)
  double pw_rnd_sum = 0.0;
  long pw_rnd_n = 0;
  double pw_lifetime_sum = 0.0;
  long pw_lifetime_n = 0;
  std::array<long, kEventKindCount> event_counts{};
};

struct RunResult {
  MetricsLog log;
  RunTotals totals;
  double final_etx = 0.0;
  double final_delay_s = 0.0;
  double final_throughput_bps = 0.0;
  double final_energy_j = 0.0;
};

/// Single-run discrete-event simulator. Strictly single-threaded; every
/// random draw comes from named sub-streams of the config seed, so identical
/// (config, seed) reproduce identical logs byte for byte. The hop-level
/// entry points (beacon_round_once, build_candidates, forward_attempt,
/// adjust_range_once) are the same code paths run() uses.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  RunResult run();

  World& world();
  const SimConfig& config() const;

  /// Exchange one round of beacons and refresh link estimates (and, for
  /// ExOR, the ETX-to-destination tables). No events are scheduled.
  void beacon_round_once();

  /// Build a fresh prioritized candidate set (protocol-dispatching).
  CandidateRelaySet build_candidates(int s, int dest);

  /// One broadcast attempt of a data packet to the candidate set: charges
  /// energy, draws receptions, picks the forwarder.
  ForwardOutcome forward_attempt(int s, const CandidateRelaySet& cands);

  /// One OTC decision for a node with the given RND; returns true when the
  /// range was adjusted (to the Poisson-optimal value for its destination).
  bool adjust_range_once(int s, int rnd, int dest);

  double link_estimate(int a, int b) const;  // EWMA p-hat, 0.5 before any beacon

  long event_count(EventKind k) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper: construct, run, return.
RunResult run_simulation(const SimConfig& cfg);

}  // namespace manet
