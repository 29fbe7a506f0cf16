#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace manet::sbfl {

/// Thrown by relative_variance when the column mean is zero; callers that
/// rank whole tables substitute rv = 0 for such columns (an all-equal or
/// zero-mean column carries no discriminating power).
class MeanIsZeroError : public std::domain_error {
 public:
  MeanIsZeroError() : std::domain_error("relative variance undefined: column mean is zero") {}
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  explicit DimensionMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

enum class Orientation { Benefit, Cost };

/// Candidate-nodes x metrics matrix. Rows are candidates, columns are
/// cross-layer metrics; each column carries an orientation flag so that a
/// larger rank always means "better" (cost metrics rank in reverse).
struct MetricTable {
  std::vector<std::vector<double>> values;  // row-major, m x n
  std::vector<Orientation> orientations;    // size n
  std::vector<std::string> column_names;    // size n

  int rows() const { return static_cast<int>(values.size()); }
  int cols() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  std::vector<double> column(int j) const;

  /// Throws std::invalid_argument on shape/finiteness violations.
  void validate() const;
};

/// Single-input single-output Mamdani system: `term_count` symmetric
/// triangular terms partitioning [0,1] with half-overlap, an identity rule
/// base (input term k fires output term k), centroid defuzzification.
struct FuzzySystem {
  int term_count = 7;

  static FuzzySystem with_terms(int n);

  double term_center(int k) const;
  /// Membership of x in term k (triangle of half-width 1/(term_count-1)).
  double membership(int k, double x) const;
  /// Fuzzify -> identity rules -> clip -> max-aggregate -> centroid.
  /// Monotone non-decreasing in x; output lies in (0, 1).
  double infer(double x) const;
};

/// Mean squared relative deviation of a column: (1/m) * sum(((u - mean)/mean)^2).
/// Scale-invariant dispersion measure. Throws MeanIsZeroError when mean == 0.
double relative_variance(const std::vector<double>& column);

/// Population variance (1/m) * sum((u - mean)^2); shown for contrast with rv.
double variance(const std::vector<double>& column);

/// Per-column relative variances of a table. Zero-mean columns get rv = 0 and
/// a warning line on `warn` (when non-null).
std::vector<double> relative_variances(const MetricTable& table, std::ostream* warn = nullptr);

/// Normalize rv by its max (all-zero input maps to all-zero) and run each
/// value through the fuzzy system. Weights are in [0,1] and ordered like rv.
std::vector<double> fuzzy_weights(const std::vector<double>& rv, const FuzzySystem& sys);

/// Per-column competition ranks in [1, m]. Benefit columns: rank 1 = smallest
/// value; cost columns: rank 1 = largest. Ties share the smallest rank of
/// their group; sorting is stable in row order.
std::vector<std::vector<int>> rank_table(const MetricTable& table);

/// psi_i = sum_j w_j * rank(i, j). Throws DimensionMismatchError.
std::vector<double> node_utilities(const std::vector<std::vector<int>>& ranks,
                                   const std::vector<double>& weights);

/// Full pipeline: rv -> weights -> ranks -> utilities, returning (row index,
/// utility) sorted by descending utility, ties by ascending row index.
std::vector<std::pair<int, double>> prioritize(const MetricTable& table, const FuzzySystem& sys,
                                               std::ostream* warn = nullptr);

enum class RuleCountMode { Classic, Sbfl };

/// Classic multi-input rule-base size (terms^metrics, throws
/// std::overflow_error past 2^63-1) vs. the flat single-input count.
std::uint64_t rule_count(int term_count, int metric_count, RuleCountMode mode);

/// CSV ingestion: header row of metric names, optional second row of
/// orientations ("benefit"/"cost", default benefit), then numeric rows.
/// Throws std::runtime_error with a line-qualified message on bad input.
MetricTable parse_metric_table_csv(std::istream& in);

}  // namespace manet::sbfl
