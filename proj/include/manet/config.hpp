#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "manet/simulator.hpp"

namespace manet {

/// Configuration problems carry the offending line for exit-code-2 messages.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(line > 0 ? file + ":" + std::to_string(line) + ": " + msg
                                    : file + ": " + msg) {}
};

/// Flat INI-style key/value file with [section] headers and '#' comments.
struct IniFile {
  // section -> key -> (value, line)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;
  std::string path;

  static IniFile parse_file(const std::string& path);
  static IniFile parse_text(const std::string& text, const std::string& name);
};

/// Everything the experiment harness needs: a base SimConfig plus the sweep,
/// replica, and output plan. Loaded from canonical INI sections (see README
/// for the schema); every field has a working default.
struct ExperimentConfig {
  SimConfig base;

  std::vector<Protocol> protocols{Protocol::CBRT, Protocol::ExOR};
  std::vector<int> node_counts{25, 50, 75, 100, 125, 150};
  int replicas = 5;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int workers = 1;

  // topology-control comparison (separate defaults: short initial ranges,
  // denser sweep)
  std::vector<int> topo_node_counts{50, 100, 150, 200};
  int k_connection = 5;
  double topo_initial_range = 100.0;
  double topo_epoch_s = 1.0;
  double topo_dest_min_frac = 0.55;
  double topo_dest_max_frac = 0.95;
  double grow_factor = 1.1;
  double shrink_factor = 0.9;

  void validate() const;
};

/// Parse and validate a config file; unknown sections/keys are errors with
/// line-precise messages.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_ini(const IniFile& ini);

}  // namespace manet
