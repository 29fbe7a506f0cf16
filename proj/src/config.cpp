#include "manet/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace manet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

IniFile IniFile::parse_text(const std::string& text, const std::string& name) {
  IniFile ini;
  ini.path = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(name, line_no, "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(name, line_no, "empty section name");
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name, line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(name, line_no, "empty key");
    if (section.empty()) throw ConfigError(name, line_no, "key outside any [section]");
    auto& sec = ini.sections[section];
    if (sec.count(key)) throw ConfigError(name, line_no, "duplicate key '" + key + "'");
    sec[key] = {value, line_no};
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str(), path);
}

namespace {

class IniReader {
 public:
  explicit IniReader(const IniFile& ini) : ini_(ini) {}

  bool has(const std::string& section, const std::string& key) const {
    auto sec = ini_.sections.find(section);
    return sec != ini_.sections.end() && sec->second.count(key) > 0;
  }

  std::string raw(const std::string& section, const std::string& key, int* line) const {
    const auto& entry = ini_.sections.at(section).at(key);
    if (line) *line = entry.second;
    consumed_.insert(section + "/" + key);
    return entry.first;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) {
    if (!has(section, key)) return fallback;
    int line = 0;
    const std::string v = raw(section, key, &line);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(ini_.path, line, "expected a number for '" + key + "', got '" + v + "'");
    }
  }

  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) {
    if (!has(section, key)) return fallback;
    int line = 0;
    const std::string v = raw(section, key, &line);
    try {
      std::size_t used = 0;
      const long long d = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(ini_.path, line, "expected an integer for '" + key + "', got '" + v + "'");
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) return fallback;
    int line = 0;
    const std::string v = lower(raw(section, key, &line));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(ini_.path, line, "expected a boolean for '" + key + "', got '" + v + "'");
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    if (!has(section, key)) return fallback;
    return raw(section, key, nullptr);
  }

  std::vector<std::string> get_list(const std::string& section, const std::string& key) {
    int line = 0;
    const std::string v = raw(section, key, &line);
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw ConfigError(ini_.path, line, "empty list for '" + key + "'");
    return out;
  }

  int line_of(const std::string& section, const std::string& key) const {
    return ini_.sections.at(section).at(key).second;
  }

  /// Reject anything the schema never consumed.
  void check_unknown(const std::vector<std::string>& known_sections) const {
    for (const auto& [section, keys] : ini_.sections) {
      if (std::find(known_sections.begin(), known_sections.end(), section) ==
          known_sections.end())
        throw ConfigError(ini_.path, 0, "unknown section [" + section + "]");
      for (const auto& [key, entry] : keys) {
        if (!consumed_.count(section + "/" + key))
          throw ConfigError(ini_.path, entry.second,
                            "unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

 private:
  const IniFile& ini_;
  mutable std::set<std::string> consumed_;
};

}  // namespace

void ExperimentConfig::validate() const {
  if (node_counts.empty()) throw std::invalid_argument("experiment: empty node count sweep");
  if (replicas < 1) throw std::invalid_argument("experiment: replicas must be >= 1");
  if (workers < 1) throw std::invalid_argument("experiment: workers must be >= 1");
  if (protocols.empty()) throw std::invalid_argument("experiment: no protocols selected");
  if (topo_node_counts.empty()) throw std::invalid_argument("experiment: empty topo sweep");
  SimConfig probe = base;
  probe.world.node_count = std::max(2, probe.world.node_count);
  probe.policy.network_size = probe.world.node_count;
  probe.validate();
}

ExperimentConfig experiment_config_from_ini(const IniFile& ini) {
  ExperimentConfig cfg;
  IniReader r(ini);

  // [experiment]
  if (r.has("experiment", "protocols")) {
    cfg.protocols.clear();
    for (const auto& name : r.get_list("experiment", "protocols")) {
      const auto p = parse_protocol(name);
      if (!p)
        throw ConfigError(ini.path, r.line_of("experiment", "protocols"),
                          "unknown protocol '" + name + "' (use cbrt, exor)");
      cfg.protocols.push_back(*p);
    }
  }
  if (r.has("experiment", "node_counts")) {
    cfg.node_counts.clear();
    for (const auto& s : r.get_list("experiment", "node_counts")) {
      try {
        cfg.node_counts.push_back(std::stoi(s));
      } catch (const std::exception&) {
        throw ConfigError(ini.path, r.line_of("experiment", "node_counts"),
                          "bad node count '" + s + "'");
      }
    }
  }
  cfg.replicas = static_cast<int>(r.get_int("experiment", "replicas", cfg.replicas));
  cfg.seed =
      static_cast<std::uint64_t>(r.get_int("experiment", "seed", static_cast<std::int64_t>(cfg.seed)));
  cfg.base.duration_s = r.get_double("experiment", "sim_duration_s", cfg.base.duration_s);
  cfg.base.warmup_s = r.get_double("experiment", "warmup_s", cfg.base.warmup_s);
  cfg.out_dir = r.get_string("experiment", "out_dir", cfg.out_dir);
  cfg.workers = static_cast<int>(r.get_int("experiment", "workers", cfg.workers));

  // [world]
  WorldConfig& w = cfg.base.world;
  w.side = r.get_double("world", "side_m", w.side);
  w.node_count = static_cast<int>(r.get_int("world", "node_count", w.node_count));
  w.speed_mean = r.get_double("world", "speed_mean_mps", w.speed_mean);
  w.initial_range = r.get_double("world", "initial_range_m", w.initial_range);
  w.initial_energy = r.get_double("world", "initial_energy_j", w.initial_energy);
  w.r_min = r.get_double("world", "r_min_m", w.r_min);
  w.r_max = r.get_double("world", "r_max_m", w.r_max);
  if (r.has("world", "mobility")) {
    int line = 0;
    const std::string m = lower(r.raw("world", "mobility", &line));
    if (m == "random_waypoint")
      w.mobility = MobilityModel::RandomWaypoint;
    else if (m == "constant_velocity")
      w.mobility = MobilityModel::ConstantVelocity;
    else
      throw ConfigError(ini.path, line, "unknown mobility model '" + m + "'");
  }
  if (r.has("world", "link_model")) {
    int line = 0;
    const std::string m = lower(r.raw("world", "link_model", &line));
    if (m == "quadratic") {
      w.link.kind = LinkModelKind::Quadratic;
    } else if (m == "unit_disc") {
      w.link.kind = LinkModelKind::UnitDisc;
    } else if (m.rfind("fixed:", 0) == 0) {
      w.link.kind = LinkModelKind::FixedP;
      try {
        w.link.fixed_p = std::stod(m.substr(6));
      } catch (const std::exception&) {
        throw ConfigError(ini.path, line, "bad fixed link probability in '" + m + "'");
      }
    } else {
      throw ConfigError(ini.path, line, "unknown link model '" + m + "'");
    }
  }

  // [policy]: either n1/n2 directly, or p1/p2 + p_link (band derived from the
  // per-link delivery ratio)
  topology::RegionPolicy& pol = cfg.base.policy;
  const bool has_band = r.has("policy", "n1") || r.has("policy", "n2");
  const bool has_ptp = r.has("policy", "p1") || r.has("policy", "p2");
  if (has_ptp && !has_band) {
    pol.p1 = r.get_double("policy", "p1", pol.p1);
    pol.p2 = r.get_double("policy", "p2", pol.p2);
    const double p_link = r.get_double("policy", "p_link", 0.3);
    if (!(pol.p1 > 0.0 && pol.p1 < pol.p2 && pol.p2 < 1.0))
      throw ConfigError(ini.path, 0, "[policy] requires 0 < p1 < p2 < 1");
    if (!(p_link > 0.0 && p_link < 1.0))
      throw ConfigError(ini.path, 0, "[policy] p_link must be in (0,1)");
    pol.n1 = topology::required_rnd(p_link, pol.p1);
    pol.n2 = std::max(topology::required_rnd(p_link, pol.p2), pol.n1 + 1);
  } else {
    pol.n1 = static_cast<int>(r.get_int("policy", "n1", pol.n1));
    pol.n2 = static_cast<int>(r.get_int("policy", "n2", pol.n2));
    pol.p1 = r.get_double("policy", "p1", pol.p1);
    pol.p2 = r.get_double("policy", "p2", pol.p2);
    if (r.has("policy", "p_link")) r.get_double("policy", "p_link", 0.3);
  }
  cfg.k_connection = static_cast<int>(r.get_int("policy", "k", cfg.k_connection));
  cfg.grow_factor = r.get_double("policy", "grow_factor", cfg.grow_factor);
  cfg.shrink_factor = r.get_double("policy", "shrink_factor", cfg.shrink_factor);

  // [traffic]
  cfg.base.traffic_rate_pps = r.get_double("traffic", "rate_pps", cfg.base.traffic_rate_pps);
  cfg.base.flows = static_cast<int>(r.get_int("traffic", "flows", cfg.base.flows));
  cfg.base.min_flow_separation_frac =
      r.get_double("traffic", "min_separation_frac", cfg.base.min_flow_separation_frac);

  // [radio]
  cfg.base.data_rate_bps = r.get_double("radio", "data_rate_bps", cfg.base.data_rate_bps);
  cfg.base.packet_bits = static_cast<int>(r.get_int("radio", "packet_bits", cfg.base.packet_bits));
  cfg.base.control_bits =
      static_cast<int>(r.get_int("radio", "control_bits", cfg.base.control_bits));
  cfg.base.beacon_interval_s =
      r.get_double("radio", "beacon_interval_s", cfg.base.beacon_interval_s);
  cfg.base.tx_power_high_w = r.get_double("radio", "tx_power_high_w", cfg.base.tx_power_high_w);
  cfg.base.tx_power_low_w = r.get_double("radio", "tx_power_low_w", cfg.base.tx_power_low_w);
  cfg.base.rx_power_w = r.get_double("radio", "rx_power_w", cfg.base.rx_power_w);
  cfg.base.high_power_range_fraction =
      r.get_double("radio", "high_power_range_fraction", cfg.base.high_power_range_fraction);
  cfg.base.lsr_bits_per_neighbor = static_cast<int>(
      r.get_int("radio", "lsr_bits_per_neighbor", cfg.base.lsr_bits_per_neighbor));
  cfg.base.lsr_interval_s = r.get_double("radio", "lsr_interval_s", cfg.base.lsr_interval_s);
  cfg.base.exor_batch_size =
      static_cast<int>(r.get_int("radio", "exor_batch_size", cfg.base.exor_batch_size));
  cfg.base.exor_batch_timeout_s =
      r.get_double("radio", "exor_batch_timeout_s", cfg.base.exor_batch_timeout_s);

  // [sim]
  cfg.base.mobility_dt_s = r.get_double("sim", "mobility_dt_s", cfg.base.mobility_dt_s);
  cfg.base.sample_interval_s = r.get_double("sim", "sample_interval_s", cfg.base.sample_interval_s);
  cfg.base.max_retries = static_cast<int>(r.get_int("sim", "max_retries", cfg.base.max_retries));
  cfg.base.retry_backoff_s = r.get_double("sim", "retry_backoff_s", cfg.base.retry_backoff_s);
  cfg.base.candidate_cache_s = r.get_double("sim", "candidate_cache_s", cfg.base.candidate_cache_s);
  cfg.base.ewma_alpha = r.get_double("sim", "ewma_alpha", cfg.base.ewma_alpha);
  cfg.base.min_relay_energy_j =
      r.get_double("sim", "min_relay_energy_j", cfg.base.min_relay_energy_j);
  cfg.base.lifetime_horizon_s =
      r.get_double("sim", "lifetime_horizon_s", cfg.base.lifetime_horizon_s);
  cfg.base.network_otc = r.get_bool("sim", "network_otc", cfg.base.network_otc);

  // [topo]
  if (r.has("topo", "node_counts")) {
    cfg.topo_node_counts.clear();
    for (const auto& s : r.get_list("topo", "node_counts")) {
      try {
        cfg.topo_node_counts.push_back(std::stoi(s));
      } catch (const std::exception&) {
        throw ConfigError(ini.path, r.line_of("topo", "node_counts"), "bad node count '" + s + "'");
      }
    }
  }
  cfg.topo_initial_range = r.get_double("topo", "initial_range_m", cfg.topo_initial_range);
  cfg.topo_epoch_s = r.get_double("topo", "epoch_s", cfg.topo_epoch_s);
  cfg.topo_dest_min_frac = r.get_double("topo", "dest_min_frac", cfg.topo_dest_min_frac);
  cfg.topo_dest_max_frac = r.get_double("topo", "dest_max_frac", cfg.topo_dest_max_frac);

  r.check_unknown({"experiment", "world", "policy", "traffic", "radio", "sim", "topo"});

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(ini.path, 0, e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_ini(IniFile::parse_file(path));
}

}  // namespace manet
