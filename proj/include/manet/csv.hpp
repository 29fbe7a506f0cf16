#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace manet::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  double number(std::size_t row, int col) const;
};

/// Strict reader for the tool's own output: every row must match the header
/// width. Throws std::runtime_error with the offending line number.
Table read(std::istream& in);
Table read_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<std::string>& cells);
std::string format_number(double v);  // "%.9g", the project-wide cell format

}  // namespace manet::csv
