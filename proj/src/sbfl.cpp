#include "manet/sbfl.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace manet::sbfl {

std::vector<double> MetricTable::column(int j) const {
  std::vector<double> col;
  col.reserve(values.size());
  for (const auto& row : values) col.push_back(row.at(static_cast<std::size_t>(j)));
  return col;
}

void MetricTable::validate() const {
  if (values.empty()) throw std::invalid_argument("metric table has no rows");
  const std::size_t n = values.front().size();
  if (n == 0) throw std::invalid_argument("metric table has no columns");
  for (const auto& row : values) {
    if (row.size() != n) throw std::invalid_argument("metric table rows have unequal lengths");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("metric table contains a non-finite value");
    }
  }
  if (orientations.size() != n)
    throw std::invalid_argument("metric table needs one orientation per column");
}

double variance(const std::vector<double>& column) {
  if (column.empty()) throw std::invalid_argument("variance of empty column");
  const double m = static_cast<double>(column.size());
  const double mean = std::accumulate(column.begin(), column.end(), 0.0) / m;
  double acc = 0.0;
  for (double v : column) acc += (v - mean) * (v - mean);
  return acc / m;
}

double relative_variance(const std::vector<double>& column) {
  if (column.empty()) throw std::invalid_argument("relative variance of empty column");
  const double m = static_cast<double>(column.size());
  const double mean = std::accumulate(column.begin(), column.end(), 0.0) / m;
  if (mean == 0.0) throw MeanIsZeroError();
  double acc = 0.0;
  for (double v : column) {
    const double rel = (v - mean) / mean;
    acc += rel * rel;
  }
  return acc / m;
}

std::vector<double> relative_variances(const MetricTable& table, std::ostream* warn) {
  table.validate();
  std::vector<double> rv(static_cast<std::size_t>(table.cols()), 0.0);
  for (int j = 0; j < table.cols(); ++j) {
    try {
      rv[static_cast<std::size_t>(j)] = relative_variance(table.column(j));
    } catch (const MeanIsZeroError&) {
      rv[static_cast<std::size_t>(j)] = 0.0;
      if (warn) {
        const auto& name = table.column_names.size() > static_cast<std::size_t>(j)
                               ? table.column_names[static_cast<std::size_t>(j)]
                               : std::to_string(j);
        *warn << "warning: column '" << name << "' has zero mean, using rv = 0\n";
      }
    }
  }
  return rv;
}

FuzzySystem FuzzySystem::with_terms(int n) {
  if (n < 2) throw std::invalid_argument("fuzzy system needs at least 2 terms");
  FuzzySystem sys;
  sys.term_count = n;
  return sys;
}

double FuzzySystem::term_center(int k) const {
  return static_cast<double>(k) / static_cast<double>(term_count - 1);
}

double FuzzySystem::membership(int k, double x) const {
  const double half_width = 1.0 / static_cast<double>(term_count - 1);
  const double d = std::abs(x - term_center(k)) / half_width;
  return d >= 1.0 ? 0.0 : 1.0 - d;
}

double FuzzySystem::infer(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  std::vector<double> activation(static_cast<std::size_t>(term_count));
  for (int k = 0; k < term_count; ++k) activation[static_cast<std::size_t>(k)] = membership(k, x);

  // Centroid of the clipped max-aggregate, integrated on a fixed fine grid.
  // The aggregate is piecewise linear; 4096 cells keep the quadrature error
  // well below the ordering margins exercised by the tests.
  constexpr int kCells = 4096;
  double area = 0.0;
  double moment = 0.0;
  double prev_y = 0.0;
  double prev_h = 0.0;
  for (int i = 0; i <= kCells; ++i) {
    const double y = static_cast<double>(i) / kCells;
    double h = 0.0;
    for (int k = 0; k < term_count; ++k) {
      const double a = activation[static_cast<std::size_t>(k)];
      if (a <= 0.0) continue;
      h = std::max(h, std::min(a, membership(k, y)));
    }
    if (i > 0) {
      const double dy = y - prev_y;
      area += 0.5 * (prev_h + h) * dy;
      moment += 0.5 * (prev_h * prev_y + h * y) * dy;
    }
    prev_y = y;
    prev_h = h;
  }
  if (area <= 0.0) return 0.5;  // unreachable: the terms cover [0,1]
  return moment / area;
}

std::vector<double> fuzzy_weights(const std::vector<double>& rv, const FuzzySystem& sys) {
  for (double v : rv) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("fuzzy_weights: rv entries must be finite and >= 0");
  }
  const double max_rv = rv.empty() ? 0.0 : *std::max_element(rv.begin(), rv.end());
  std::vector<double> weights;
  weights.reserve(rv.size());
  for (double v : rv) {
    const double x = max_rv > 0.0 ? v / max_rv : 0.0;
    weights.push_back(sys.infer(x));
  }
  return weights;
}

std::vector<std::vector<int>> rank_table(const MetricTable& table) {
  table.validate();
  const int m = table.rows();
  const int n = table.cols();
  std::vector<std::vector<int>> ranks(static_cast<std::size_t>(m),
                                      std::vector<int>(static_cast<std::size_t>(n), 0));
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int j = 0; j < n; ++j) {
    const auto col = table.column(j);
    const bool benefit = table.orientations[static_cast<std::size_t>(j)] == Orientation::Benefit;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return benefit ? col[static_cast<std::size_t>(a)] < col[static_cast<std::size_t>(b)]
                     : col[static_cast<std::size_t>(a)] > col[static_cast<std::size_t>(b)];
    });
    // Competition ranks: a tie group shares the rank of its first member.
    int current_rank = 1;
    for (int pos = 0; pos < m; ++pos) {
      if (pos > 0) {
        const double prev = col[static_cast<std::size_t>(order[static_cast<std::size_t>(pos - 1)])];
        const double cur = col[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
        if (cur != prev) current_rank = pos + 1;
      }
      ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])]
           [static_cast<std::size_t>(j)] = current_rank;
    }
  }
  return ranks;
}

std::vector<double> node_utilities(const std::vector<std::vector<int>>& ranks,
                                   const std::vector<double>& weights) {
  if (ranks.empty()) throw DimensionMismatchError("node_utilities: empty rank table");
  std::vector<double> psi;
  psi.reserve(ranks.size());
  for (const auto& row : ranks) {
    if (row.size() != weights.size())
      throw DimensionMismatchError("node_utilities: rank row length != weight count");
    double u = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) u += weights[j] * static_cast<double>(row[j]);
    psi.push_back(u);
  }
  return psi;
}

std::vector<std::pair<int, double>> prioritize(const MetricTable& table, const FuzzySystem& sys,
                                               std::ostream* warn) {
  const auto rv = relative_variances(table, warn);
  const auto weights = fuzzy_weights(rv, sys);
  const auto ranks = rank_table(table);
  const auto psi = node_utilities(ranks, weights);
  std::vector<std::pair<int, double>> out;
  out.reserve(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) out.emplace_back(static_cast<int>(i), psi[i]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::uint64_t rule_count(int term_count, int metric_count, RuleCountMode mode) {
  if (term_count < 1 || metric_count < 1)
    throw std::invalid_argument("rule_count: arguments must be >= 1");
  if (mode == RuleCountMode::Sbfl) return static_cast<std::uint64_t>(term_count);
  std::uint64_t result = 1;
  const auto base = static_cast<std::uint64_t>(term_count);
  const std::uint64_t limit = std::numeric_limits<std::int64_t>::max();
  for (int i = 0; i < metric_count; ++i) {
    if (base != 0 && result > limit / base)
      throw std::overflow_error("rule_count: classic rule count overflows");
    result *= base;
  }
  return result;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

MetricTable parse_metric_table_csv(std::istream& in) {
  MetricTable table;
  std::string line;
  int line_no = 0;
  bool have_orientations = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (table.column_names.empty()) {
      table.column_names = cells;
      continue;
    }
    if (!have_orientations && table.values.empty()) {
      const bool all_flags = std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
        return c == "benefit" || c == "cost";
      });
      if (all_flags) {
        if (cells.size() != table.column_names.size())
          throw std::runtime_error("line " + std::to_string(line_no) +
                                   ": orientation row length does not match header");
        for (const auto& c : cells)
          table.orientations.push_back(c == "cost" ? Orientation::Cost : Orientation::Benefit);
        have_orientations = true;
        continue;
      }
    }
    if (cells.size() != table.column_names.size())
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(table.column_names.size()) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        const double v = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad numeric cell '" + c + "'");
      }
    }
    table.values.push_back(std::move(row));
  }
  if (table.column_names.empty()) throw std::runtime_error("empty metric table");
  if (table.values.empty()) throw std::runtime_error("metric table has no data rows");
  if (!have_orientations)
    table.orientations.assign(table.column_names.size(), Orientation::Benefit);
  table.validate();
  return table;
}

}  // namespace manet::sbfl
