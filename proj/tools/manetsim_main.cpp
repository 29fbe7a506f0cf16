#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "manet/commands.hpp"

namespace {

std::vector<double> parse_weight_list(const std::string& csv, bool& ok) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  ok = true;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      ok = false;
      return out;
    }
  }
  if (out.empty()) ok = false;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MANET opportunistic-routing simulator and experiment harness"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  manet::CliOptions opts;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 0;
  app.add_option("--config", config_path, "experiment config file (INI)");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "parallel worker threads");
  app.add_flag("--csv", opts.machine_csv, "machine-readable output where applicable");
  app.add_flag("--svg", opts.emit_svg, "emit SVG charts");

  auto* run = app.add_subcommand("run", "single simulation run, metrics CSV + summary");
  auto* compare = app.add_subcommand("compare", "protocol sweep over node counts");
  auto* topo = app.add_subcommand("topo", "topology controller comparison");

  auto* rank = app.add_subcommand("rank", "rank a metric-table CSV");
  std::string rank_csv;
  std::string rank_weights;
  rank->add_option("csv", rank_csv, "metric table CSV path")->required();
  rank->add_option("--weights", rank_weights, "comma-separated weight override");

  auto* lifetime = app.add_subcommand("lifetime", "single-shot link lifetime prediction");
  manet::LifetimeArgs lt;
  lifetime->add_option("--sx", lt.sx, "source x [m]");
  lifetime->add_option("--sy", lt.sy, "source y [m]");
  lifetime->add_option("--sv", lt.s_speed, "source speed [m/s]");
  lifetime->add_option("--sh", lt.s_heading, "source heading [rad]");
  lifetime->add_option("--rx", lt.rx, "relay x [m]");
  lifetime->add_option("--ry", lt.ry, "relay y [m]");
  lifetime->add_option("--rv", lt.r_speed, "relay speed [m/s]");
  lifetime->add_option("--rh", lt.r_heading, "relay heading [rad]");
  lifetime->add_option("--dx", lt.dx, "destination x [m]");
  lifetime->add_option("--dy", lt.dy, "destination y [m]");
  lifetime->add_option("--dv", lt.d_speed, "destination speed [m/s]");
  lifetime->add_option("--dh", lt.d_heading, "destination heading [rad]");
  lifetime->add_option("--range", lt.range_m, "source transmission range [m]");
  lifetime->add_option("--dt", lt.oracle_dt_s, "oracle step [s]");
  lifetime->add_option("--horizon", lt.horizon_s, "horizon [s]");

  auto* rules = app.add_subcommand("rules", "rule-count comparison");
  manet::RulesArgs ra;
  rules->add_option("--terms", ra.terms, "linguistic terms per input (classic)");
  rules->add_option("--metrics", ra.metrics_max, "max metric count");
  rules->add_option("--flat-terms", ra.sbfl_terms, "terms in the flat single-input system");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  if (!config_path.empty()) opts.config_path = config_path;
  if (seed_opt->count() > 0) opts.seed = seed;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (workers > 0) opts.workers = workers;

  if (run->parsed()) return manet::cmd_run(opts, std::cout, std::cerr);
  if (compare->parsed()) return manet::cmd_compare(opts, std::cout, std::cerr);
  if (topo->parsed()) return manet::cmd_topo(opts, std::cout, std::cerr);
  if (rank->parsed()) {
    manet::RankArgs args;
    args.csv_path = rank_csv;
    if (!rank_weights.empty()) {
      bool ok = false;
      args.weights = parse_weight_list(rank_weights, ok);
      if (!ok) {
        std::cerr << "config error: bad --weights list\n";
        return 2;
      }
    }
    return manet::cmd_rank(opts, args, std::cout, std::cerr);
  }
  if (lifetime->parsed()) return manet::cmd_lifetime(opts, lt, std::cout, std::cerr);
  if (rules->parsed()) return manet::cmd_rules(opts, ra, std::cout, std::cerr);
  return 2;
}
