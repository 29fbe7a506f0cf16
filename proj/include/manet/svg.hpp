#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace manet::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static line chart: axes, ticks, legend, one polyline per series.
/// Output is deterministic for identical inputs.
void write_line_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

void write_line_chart_file(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

}  // namespace manet::svg
