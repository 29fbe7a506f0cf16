#include "manet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "manet/csv.hpp"

namespace manet {

namespace {

/// Index-claiming worker pool: job order is fixed up front, results land in
/// pre-sized slots, so the outcome does not depend on thread scheduling.
template <typename Job, typename Result, typename Fn>
std::vector<Result> run_jobs(const std::vector<Job>& jobs, int workers, Fn fn) {
  std::vector<Result> results(jobs.size());
  if (workers <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = fn(jobs[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        results[i] = fn(jobs[i]);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

double post_warmup_mean(const MetricsLog& log, double warmup, double MetricsRow::* field) {
  double acc = 0.0;
  long n = 0;
  for (const auto& row : log.rows) {
    if (row.time < warmup) continue;
    acc += row.*field;
    ++n;
  }
  return n > 0 ? acc / n : 0.0;
}

bool range_series_constant(const MetricsLog& log) {
  if (log.rows.empty()) return true;
  const double first = log.rows.front().range_m;
  for (const auto& row : log.rows)
    if (std::abs(row.range_m - first) > 1e-9) return false;
  return true;
}

}  // namespace

const SweepCell* CompareResult::find(Protocol p, int node_count) const {
  for (const auto& c : cells)
    if (c.protocol == p && c.node_count == node_count) return &c;
  return nullptr;
}

void CompareResult::write_csv(std::ostream& out) const {
  out << "protocol,node_count,replicas,etx,delay_s,queue_len,rnd,range_m,energy_j,"
         "throughput_bps,lifetime_s,c_otc\n";
  for (const auto& c : cells) {
    csv::write_row(out, {protocol_name(c.protocol), std::to_string(c.node_count),
                         std::to_string(c.replicas), csv::format_number(c.final_etx),
                         csv::format_number(c.final_delay_s), csv::format_number(c.queue_len_pw),
                         csv::format_number(c.rnd_pw), csv::format_number(c.range_pw),
                         csv::format_number(c.final_energy_j),
                         csv::format_number(c.final_throughput_bps),
                         csv::format_number(c.lifetime_pw), csv::format_number(c.c_otc_pw)});
  }
}

SimConfig make_run_config(const ExperimentConfig& cfg, Protocol protocol, int node_count,
                          int replica) {
  SimConfig run = cfg.base;
  run.protocol = protocol;
  run.world.node_count = node_count;
  run.policy.network_size = node_count;
  run.seed = cfg.seed + static_cast<std::uint64_t>(replica);
  run.world.seed = run.seed;
  return run;
}

CompareResult run_compare(const ExperimentConfig& cfg) {
  struct Job {
    Protocol protocol;
    int node_count;
    int replica;
  };
  std::vector<Job> jobs;
  for (Protocol p : cfg.protocols)
    for (int n : cfg.node_counts)
      for (int r = 0; r < cfg.replicas; ++r) jobs.push_back({p, n, r});

  auto results = run_jobs<Job, RunResult>(jobs, cfg.workers, [&](const Job& job) {
    return run_simulation(make_run_config(cfg, job.protocol, job.node_count, job.replica));
  });

  CompareResult out;
  for (Protocol p : cfg.protocols) {
    for (int n : cfg.node_counts) {
      SweepCell cell;
      cell.protocol = p;
      cell.node_count = n;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].protocol != p || jobs[i].node_count != n) continue;
        const RunResult& rr = results[i];
        ++cell.replicas;
        cell.final_etx += rr.final_etx;
        cell.final_delay_s += rr.final_delay_s;
        cell.final_energy_j += rr.final_energy_j;
        cell.final_throughput_bps += rr.final_throughput_bps;
        cell.queue_len_pw += post_warmup_mean(rr.log, cfg.base.warmup_s, &MetricsRow::queue_len);
        cell.rnd_pw += rr.totals.pw_rnd_n > 0 ? rr.totals.pw_rnd_sum / rr.totals.pw_rnd_n : 0.0;
        cell.range_pw += post_warmup_mean(rr.log, cfg.base.warmup_s, &MetricsRow::range_m);
        cell.lifetime_pw +=
            rr.totals.pw_lifetime_n > 0 ? rr.totals.pw_lifetime_sum / rr.totals.pw_lifetime_n : 0.0;
        cell.c_otc_pw += post_warmup_mean(rr.log, cfg.base.warmup_s, &MetricsRow::c_otc);
        cell.range_constant = cell.range_constant && range_series_constant(rr.log);
      }
      if (cell.replicas > 0) {
        const double k = cell.replicas;
        cell.final_etx /= k;
        cell.final_delay_s /= k;
        cell.final_energy_j /= k;
        cell.final_throughput_bps /= k;
        cell.queue_len_pw /= k;
        cell.rnd_pw /= k;
        cell.range_pw /= k;
        cell.lifetime_pw /= k;
        cell.c_otc_pw /= k;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

const char* topo_controller_name(TopoController c) {
  return c == TopoController::Otc ? "otc" : "k_connection";
}

const TopoCell* TopoResult::find(TopoController c, int node_count) const {
  for (const auto& cell : cells)
    if (cell.controller == c && cell.node_count == node_count) return &cell;
  return nullptr;
}

void TopoResult::write_csv(std::ostream& out) const {
  out << "controller,node_count,replicas,adjust_ratio,mean_rnd,frac_rnd_in_band\n";
  for (const auto& c : cells) {
    csv::write_row(out, {topo_controller_name(c.controller), std::to_string(c.node_count),
                         std::to_string(c.replicas), csv::format_number(c.adjust_ratio),
                         csv::format_number(c.mean_rnd), csv::format_number(c.frac_rnd_in_band)});
  }
}

namespace {

struct TopoRunStats {
  double adjust_ratio = 0.0;
  double mean_rnd = 0.0;
  double frac_in_band = 0.0;
};

TopoRunStats run_topo_once(const ExperimentConfig& cfg, TopoController controller, int node_count,
                           int replica) {
  WorldConfig wc = cfg.base.world;
  wc.node_count = node_count;
  wc.initial_range = cfg.topo_initial_range;
  wc.seed = cfg.seed + static_cast<std::uint64_t>(replica);
  World world(wc);

  topology::RegionPolicy policy = cfg.base.policy;
  policy.network_size = node_count;

  const double rho = static_cast<double>(node_count) / (wc.side * wc.side);
  const double delta_star = topology::optimal_area({rho}, policy.n1, policy.n2);
  const topology::RangeLimits limits{wc.r_min, wc.r_max};

  Rng ctrl_rng = Rng::stream(wc.seed, "topo.controller");
  Rng dest_rng = Rng::stream(wc.seed, "topo.dest");

  // Fixed faraway destination per node (a stand-in for its traffic demand).
  std::vector<int> dest(static_cast<std::size_t>(node_count));
  const double d_lo = cfg.topo_dest_min_frac * wc.side;
  const double d_hi = cfg.topo_dest_max_frac * wc.side;
  for (int i = 0; i < node_count; ++i) {
    int best = i == 0 ? 1 : 0;
    double best_d = world.distance(i, best);
    for (int attempt = 0; attempt < 256; ++attempt) {
      const int c = static_cast<int>(dest_rng.uniform_int(0, node_count - 1));
      if (c == i) continue;
      const double d = world.distance(i, c);
      if (d >= d_lo && d <= d_hi) {
        best = c;
        best_d = d;
        break;
      }
      if (std::abs(d - 0.5 * (d_lo + d_hi)) < std::abs(best_d - 0.5 * (d_lo + d_hi))) {
        best = c;
        best_d = d;
      }
    }
    dest[static_cast<std::size_t>(i)] = best;
  }

  const long epochs = static_cast<long>(std::floor(cfg.base.duration_s / cfg.topo_epoch_s));
  TopoRunStats stats;
  long samples = 0;
  long in_band = 0;
  for (long e = 0; e < epochs; ++e) {
    world.step_mobility(cfg.topo_epoch_s);
    const double t = (static_cast<double>(e) + 1.0) * cfg.topo_epoch_s;
    long adjusters = 0;
    double rnd_acc = 0.0;
    for (int i = 0; i < node_count; ++i) {
      const int rnd = static_cast<int>(world.survival_set(i, dest[static_cast<std::size_t>(i)]).size());
      rnd_acc += rnd;
      NodeState& n = world.node(i);
      if (controller == TopoController::Otc) {
        const double p = topology::adjustment_probability(std::min(rnd, node_count), policy);
        if (p > 0.0 && ctrl_rng.bernoulli(p)) {
          const double d = std::max(world.distance(i, dest[static_cast<std::size_t>(i)]), 1.0);
          double r = topology::optimal_range(delta_star, d, limits);
          r = std::clamp(std::min(r, 2.0 * d * 0.999), wc.r_min, wc.r_max);
          n.range = r;
          ++adjusters;
        }
      } else {
        const auto action = topology::k_connection_decision(rnd, cfg.k_connection);
        if (action != topology::RangeAction::Hold) {
          const double f =
              action == topology::RangeAction::Grow ? cfg.grow_factor : cfg.shrink_factor;
          n.range = std::clamp(n.range * f, wc.r_min, wc.r_max);
          ++adjusters;
        }
      }
    }
    if (t < cfg.base.warmup_s) continue;
    ++samples;
    const double mean_rnd = rnd_acc / node_count;
    stats.adjust_ratio += static_cast<double>(adjusters) / node_count;
    stats.mean_rnd += mean_rnd;
    if (mean_rnd >= policy.n1 && mean_rnd <= policy.n2) ++in_band;
  }
  if (samples > 0) {
    stats.adjust_ratio /= static_cast<double>(samples);
    stats.mean_rnd /= static_cast<double>(samples);
    stats.frac_in_band = static_cast<double>(in_band) / static_cast<double>(samples);
  }
  return stats;
}

}  // namespace

TopoResult run_topo(const ExperimentConfig& cfg) {
  struct Job {
    TopoController controller;
    int node_count;
    int replica;
  };
  std::vector<Job> jobs;
  for (TopoController c : {TopoController::Otc, TopoController::KConnection})
    for (int n : cfg.topo_node_counts)
      for (int r = 0; r < cfg.replicas; ++r) jobs.push_back({c, n, r});

  auto results = run_jobs<Job, TopoRunStats>(jobs, cfg.workers, [&](const Job& job) {
    return run_topo_once(cfg, job.controller, job.node_count, job.replica);
  });

  TopoResult out;
  for (TopoController c : {TopoController::Otc, TopoController::KConnection}) {
    for (int n : cfg.topo_node_counts) {
      TopoCell cell;
      cell.controller = c;
      cell.node_count = n;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].controller != c || jobs[i].node_count != n) continue;
        ++cell.replicas;
        cell.adjust_ratio += results[i].adjust_ratio;
        cell.mean_rnd += results[i].mean_rnd;
        cell.frac_rnd_in_band += results[i].frac_in_band;
      }
      if (cell.replicas > 0) {
        cell.adjust_ratio /= cell.replicas;
        cell.mean_rnd /= cell.replicas;
        cell.frac_rnd_in_band /= cell.replicas;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

}  // namespace manet
