#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "manet/config.hpp"
#include "manet/experiment.hpp"

namespace manet {

/// Shared command-line options; subcommand-specific arguments travel in the
/// per-command structs below. Exit codes: 0 success, 1 runtime failure,
/// 2 usage/config error.
struct CliOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  bool machine_csv = false;
  bool emit_svg = false;
};

/// Loads the config (or defaults), applying CLI overrides.
ExperimentConfig resolve_config(const CliOptions& opts);

int cmd_run(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_topo(const CliOptions& opts, std::ostream& out, std::ostream& err);

struct RankArgs {
  std::string csv_path;
  std::optional<std::vector<double>> weights;  // bypass the fuzzy stage
};
int cmd_rank(const CliOptions& opts, const RankArgs& args, std::ostream& out, std::ostream& err);

struct LifetimeArgs {
  // source, relay, destination: x y speed heading (radians)
  double sx = 0, sy = 0, s_speed = 0, s_heading = 0;
  double rx = 0, ry = 0, r_speed = 0, r_heading = 0;
  double dx = 0, dy = 0, d_speed = 0, d_heading = 0;
  double range_m = 100.0;
  double oracle_dt_s = 0.001;
  double horizon_s = 1e9;
};
int cmd_lifetime(const CliOptions& opts, const LifetimeArgs& args, std::ostream& out,
                 std::ostream& err);

struct RulesArgs {
  int terms = 3;
  int metrics_max = 10;
  int sbfl_terms = 7;
};
int cmd_rules(const CliOptions& opts, const RulesArgs& args, std::ostream& out, std::ostream& err);

}  // namespace manet
