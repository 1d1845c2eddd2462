#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace groklab {
namespace svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color;     // empty picks from the palette
  bool dashed = false;
  bool points_only = false;
  int axis = 0;  // 0 = left, 1 = right
};

// Static line/scatter chart with an optional secondary y-axis and vertical
// step markers. Output is deterministic for golden-file style checks.
struct LinePlot {
  std::string title, xlabel, ylabel, ylabel_right;
  std::vector<Series> series;
  bool log_y = false;
  std::vector<std::pair<double, std::string>> vmarkers;

  void write(const std::string& path) const;
};

struct Heatmap {
  std::string title, xlabel, ylabel;
  std::vector<std::string> xticks, yticks;
  std::vector<double> values;  // rows x cols, row-major; NaN cells are left blank
  int rows = 0, cols = 0;

  void write(const std::string& path) const;
};

}  // namespace svg
}  // namespace groklab
