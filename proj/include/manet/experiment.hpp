#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "manet/config.hpp"
#include "manet/simulator.hpp"

namespace manet {

/// Replica-averaged observables at one (protocol, node count) sweep point.
/// "final_*" are cumulative values at the end of the run; "*_pw" are means of
/// the post-warmup sample rows.
struct SweepCell {
  Protocol protocol = Protocol::CBRT;
  int node_count = 0;
  int replicas = 0;
  double final_etx = 0.0;
  double final_delay_s = 0.0;
  double queue_len_pw = 0.0;
  double rnd_pw = 0.0;
  double range_pw = 0.0;
  double final_energy_j = 0.0;
  double final_throughput_bps = 0.0;
  double lifetime_pw = 0.0;
  double c_otc_pw = 0.0;
  bool range_constant = true;  // per-run range time series constant in every replica
};

struct CompareResult {
  std::vector<SweepCell> cells;  // ordered by (protocol, node_count)

  const SweepCell* find(Protocol p, int node_count) const;
  void write_csv(std::ostream& out) const;
};

/// Build the per-run config for one sweep point/replica: node count applied,
/// policy network size synced, replica seed = base seed + replica index.
SimConfig make_run_config(const ExperimentConfig& cfg, Protocol protocol, int node_count,
                          int replica);

/// Run the protocol sweep (protocols x node_counts x replicas), optionally in
/// parallel worker threads; aggregation is deterministic regardless of the
/// worker count.
CompareResult run_compare(const ExperimentConfig& cfg);

enum class TopoController { Otc, KConnection };

const char* topo_controller_name(TopoController c);

/// Replica-averaged topology-control summary at one node count.
struct TopoCell {
  TopoController controller = TopoController::Otc;
  int node_count = 0;
  int replicas = 0;
  double adjust_ratio = 0.0;   // post-warmup mean of per-epoch adjuster fractions
  double mean_rnd = 0.0;       // post-warmup mean of per-epoch mean RND
  double frac_rnd_in_band = 0.0;  // fraction of post-warmup epochs with mean RND in [n1,n2]
};

struct TopoResult {
  std::vector<TopoCell> cells;

  const TopoCell* find(TopoController c, int node_count) const;
  void write_csv(std::ostream& out) const;
};

/// Epoch-driven controller comparison on identical mobility traces: every
/// node steers its range (OTC probabilistically toward the Poisson-optimal
/// range; k-connection multiplicatively toward degree k) against a fixed
/// faraway destination, and per-epoch adjustment ratios and RND are sampled.
TopoResult run_topo(const ExperimentConfig& cfg);

}  // namespace manet
