#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tdann {

// Minimal static SVG emitters for the figure types the CLI reproduces:
// overlaid line plots of two series and an (N, d) correlation heatmap.

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> values;
};

// Overlaid polylines with axes; one polyline vertex per sample.
std::string render_line_plot(const std::string& title, std::span<const SvgSeries> series,
                             std::size_t width = 960, std::size_t height = 420);

// Grid heatmap; cell (row, col) colored by value, NaN cells hatched gray.
std::string render_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<double>>& cells,
                           std::size_t cell_size = 28);

}  // namespace tdann
