#include "manet/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "manet/csv.hpp"
#include "manet/lifetime.hpp"
#include "manet/sbfl.hpp"
#include "manet/svg.hpp"

namespace manet {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) { return csv::format_number(v); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

struct Observable {
  const char* key;
  const char* title;
  const char* y_label;
  double SweepCell::* field;
};

constexpr Observable kCompareObservables[] = {
    {"etx", "Per-hop ETX", "ETX", &SweepCell::final_etx},
    {"delay", "End-to-end delay", "delay [s]", &SweepCell::final_delay_s},
    {"queue", "Queue length", "packets", &SweepCell::queue_len_pw},
    {"rnd", "Relay node degree", "RND", &SweepCell::rnd_pw},
    {"range", "Transmission range", "range [m]", &SweepCell::range_pw},
    {"energy", "Residual energy", "energy [J]", &SweepCell::final_energy_j},
    {"throughput", "Throughput", "bit/s", &SweepCell::final_throughput_bps},
    {"lifetime", "Predicted link lifetime", "lifetime [s]", &SweepCell::lifetime_pw},
};

}  // namespace

ExperimentConfig resolve_config(const CliOptions& opts) {
  ExperimentConfig cfg =
      opts.config_path ? load_experiment_config(*opts.config_path) : ExperimentConfig{};
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.workers) cfg.workers = *opts.workers;
  cfg.validate();
  return cfg;
}

int cmd_run(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = resolve_config(opts);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    ensure_dir(cfg.out_dir);
    SimConfig run_cfg = make_run_config(cfg, cfg.protocols.front(), cfg.base.world.node_count, 0);
    const RunResult result = run_simulation(run_cfg);

    const std::string path = cfg.out_dir + "/run_metrics.csv";
    std::ostringstream csv_text;
    result.log.write_csv(csv_text);
    write_file(path, csv_text.str());

    out << "protocol: " << protocol_name(run_cfg.protocol) << "\n"
        << "nodes: " << run_cfg.world.node_count << "  seed: " << run_cfg.seed
        << "  duration_s: " << fmt(run_cfg.duration_s) << "\n"
        << "healthy band: [" << run_cfg.policy.n1 << ", " << run_cfg.policy.n2 << "]\n"
        << "generated: " << result.totals.generated << "  delivered: " << result.totals.delivered
        << "  dropped: " << result.totals.dropped << "  in-flight: " << result.totals.in_flight
        << "\n"
        << "drops: retries " << result.totals.dropped_retries << ", no-candidates "
        << result.totals.dropped_no_candidates << ", dead " << result.totals.dropped_dead << "\n"
        << "etx: " << fmt(result.final_etx) << "  delay_s: " << fmt(result.final_delay_s)
        << "  throughput_bps: " << fmt(result.final_throughput_bps)
        << "  residual_j: " << fmt(result.final_energy_j) << "\n"
        << "metrics csv: " << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = resolve_config(opts);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    ensure_dir(cfg.out_dir);
    const CompareResult result = run_compare(cfg);

    std::ostringstream csv_text;
    result.write_csv(csv_text);
    const std::string csv_path = cfg.out_dir + "/compare.csv";
    write_file(csv_path, csv_text.str());
    out << "sweep csv: " << csv_path << "\n";

    if (opts.emit_svg) {
      for (const Observable& ob : kCompareObservables) {
        std::vector<svg::Series> series;
        for (Protocol p : cfg.protocols) {
          svg::Series s;
          s.label = protocol_name(p);
          for (int n : cfg.node_counts) {
            const SweepCell* cell = result.find(p, n);
            if (!cell) continue;
            s.x.push_back(n);
            s.y.push_back(cell->*(ob.field));
          }
          series.push_back(std::move(s));
        }
        const std::string path = cfg.out_dir + "/compare_" + ob.key + ".svg";
        svg::write_line_chart_file(path, ob.title, "node count", ob.y_label, series);
        out << "chart: " << path << "\n";
      }
    }

    for (const auto& cell : result.cells) {
      out << protocol_name(cell.protocol) << " n=" << cell.node_count
          << " etx=" << fmt(cell.final_etx) << " delay=" << fmt(cell.final_delay_s)
          << " energy=" << fmt(cell.final_energy_j) << " range=" << fmt(cell.range_pw)
          << " lifetime=" << fmt(cell.lifetime_pw) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_topo(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = resolve_config(opts);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    ensure_dir(cfg.out_dir);
    const TopoResult result = run_topo(cfg);

    std::ostringstream csv_text;
    result.write_csv(csv_text);
    const std::string csv_path = cfg.out_dir + "/topo.csv";
    write_file(csv_path, csv_text.str());
    out << "topo csv: " << csv_path << "\n";

    if (opts.emit_svg) {
      const struct {
        const char* key;
        const char* title;
        const char* y_label;
        double TopoCell::* field;
      } charts[] = {
          {"adjust_ratio", "Range adjustment ratio", "ratio", &TopoCell::adjust_ratio},
          {"degree", "Relay node degree", "RND", &TopoCell::mean_rnd},
      };
      for (const auto& ch : charts) {
        std::vector<svg::Series> series;
        for (TopoController c : {TopoController::Otc, TopoController::KConnection}) {
          svg::Series s;
          s.label = topo_controller_name(c);
          for (int n : cfg.topo_node_counts) {
            const TopoCell* cell = result.find(c, n);
            if (!cell) continue;
            s.x.push_back(n);
            s.y.push_back(cell->*(ch.field));
          }
          series.push_back(std::move(s));
        }
        const std::string path = cfg.out_dir + std::string("/topo_") + ch.key + ".svg";
        svg::write_line_chart_file(path, ch.title, "node count", ch.y_label, series);
        out << "chart: " << path << "\n";
      }
    }

    for (const auto& cell : result.cells) {
      out << topo_controller_name(cell.controller) << " n=" << cell.node_count
          << " adjust_ratio=" << fmt(cell.adjust_ratio) << " mean_rnd=" << fmt(cell.mean_rnd)
          << " in_band=" << fmt(cell.frac_rnd_in_band) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_rank(const CliOptions& opts, const RankArgs& args, std::ostream& out, std::ostream& err) {
  sbfl::MetricTable table;
  try {
    std::ifstream f(args.csv_path);
    if (!f) {
      err << "config error: cannot open " << args.csv_path << "\n";
      return 2;
    }
    table = sbfl::parse_metric_table_csv(f);
  } catch (const std::exception& e) {
    err << "config error: " << args.csv_path << ": " << e.what() << "\n";
    return 2;
  }
  try {
    const auto rv = sbfl::relative_variances(table, &err);
    std::vector<double> weights;
    if (args.weights) {
      if (args.weights->size() != static_cast<std::size_t>(table.cols())) {
        err << "config error: --weights needs " << table.cols() << " values\n";
        return 2;
      }
      weights = *args.weights;
    } else {
      weights = sbfl::fuzzy_weights(rv, sbfl::FuzzySystem{});
    }
    const auto ranks = sbfl::rank_table(table);
    const auto psi = sbfl::node_utilities(ranks, weights);

    std::vector<std::pair<int, double>> order;
    for (std::size_t i = 0; i < psi.size(); ++i) order.emplace_back(static_cast<int>(i), psi[i]);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });

    if (opts.machine_csv) {
      out << "node,utility,priority";
      for (int j = 0; j < table.cols(); ++j) out << ",rank_" << table.column_names[j];
      out << "\n";
      std::vector<int> priority_of(psi.size(), 0);
      for (std::size_t pos = 0; pos < order.size(); ++pos)
        priority_of[static_cast<std::size_t>(order[pos].first)] = static_cast<int>(pos) + 1;
      for (std::size_t i = 0; i < psi.size(); ++i) {
        out << (i + 1) << ',' << fmt(psi[i]) << ',' << priority_of[i];
        for (int j = 0; j < table.cols(); ++j) out << ',' << ranks[i][static_cast<std::size_t>(j)];
        out << "\n";
      }
      return 0;
    }

    out << "metric";
    for (const auto& name : table.column_names) out << '\t' << name;
    out << "\nrv";
    for (double v : rv) out << '\t' << fmt(v);
    out << "\nweight";
    for (double w : weights) out << '\t' << fmt(w);
    out << "\n\nnode\tutility\tranks\n";
    for (std::size_t i = 0; i < psi.size(); ++i) {
      out << "node" << (i + 1) << '\t' << fmt(psi[i]) << '\t';
      for (std::size_t j = 0; j < ranks[i].size(); ++j) {
        if (j) out << ',';
        out << ranks[i][j];
      }
      out << "\n";
    }
    out << "\npriority:";
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      out << (pos ? " -> " : " ") << "node" << (order[pos].first + 1);
    }
    out << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_lifetime(const CliOptions&, const LifetimeArgs& args, std::ostream& out,
                 std::ostream& err) {
  const KinematicState s{args.sx, args.sy, args.s_speed, normalize_angle(args.s_heading)};
  const KinematicState r{args.rx, args.ry, args.r_speed, normalize_angle(args.r_heading)};
  const KinematicState d{args.dx, args.dy, args.d_speed, normalize_angle(args.d_heading)};
  if (args.range_m <= 0.0) {
    err << "config error: range must be > 0\n";
    return 2;
  }
  std::optional<double> predicted;
  try {
    predicted = residual_lifetime(s, r, d, args.range_m, args.horizon_s);
  } catch (const NotInSurvivalAreaError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CoincidentNodesError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const auto oracle =
      survival_exit_oracle(s, r, d, args.range_m, args.oracle_dt_s, args.horizon_s);
  auto print = [&](const char* label, const std::optional<double>& v) {
    out << label << ": ";
    if (v)
      out << fmt(*v) << " s\n";
    else
      out << "unbounded (> " << fmt(args.horizon_s) << " s)\n";
  };
  print("predicted", predicted);
  print("oracle", oracle);
  return 0;
}

int cmd_rules(const CliOptions& opts, const RulesArgs& args, std::ostream& out, std::ostream& err) {
  if (args.terms < 1 || args.metrics_max < 1 || args.sbfl_terms < 1) {
    err << "config error: terms and metrics must be >= 1\n";
    return 2;
  }
  out << "metrics,classic_rules,flat_rules\n";
  std::vector<svg::Series> series(2);
  series[0].label = "classic";
  series[1].label = "flat";
  for (int m = 1; m <= args.metrics_max; ++m) {
    std::string classic;
    try {
      classic = std::to_string(sbfl::rule_count(args.terms, m, sbfl::RuleCountMode::Classic));
      series[0].x.push_back(m);
      series[0].y.push_back(std::pow(static_cast<double>(args.terms), m));
    } catch (const std::overflow_error&) {
      classic = "overflow";
    }
    const auto flat = sbfl::rule_count(args.sbfl_terms, m, sbfl::RuleCountMode::Sbfl);
    series[1].x.push_back(m);
    series[1].y.push_back(static_cast<double>(flat));
    out << m << ',' << classic << ',' << flat << "\n";
  }
  if (opts.emit_svg) {
    const std::string dir = opts.out_dir.value_or("out");
    try {
      ensure_dir(dir);
      const std::string path = dir + "/rules.svg";
      svg::write_line_chart_file(path, "Rule count growth", "metric count", "rules", series);
      out << "chart: " << path << "\n";
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}

}  // namespace manet
