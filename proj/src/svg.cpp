#include "tdann/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tdann {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Diverging blue-white-red map over [-1, 1]; values outside are clamped.
std::string heat_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const auto channel = [](double x) {
    return static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  };
  double r, g, b;
  if (v >= 0.0) {
    r = 1.0;
    g = 1.0 - v;
    b = 1.0 - v;
  } else {
    r = 1.0 + v;
    g = 1.0 + v;
    b = 1.0;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(r), channel(g), channel(b));
  return buf;
}

}  // namespace

std::string render_line_plot(const std::string& title, std::span<const SvgSeries> series,
                             std::size_t width, std::size_t height) {
  constexpr double kMarginLeft = 64.0;
  constexpr double kMarginRight = 16.0;
  constexpr double kMarginTop = 40.0;
  constexpr double kMarginBottom = 36.0;

  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (n == 0) {
    lo = 0.0;
    hi = 1.0;
    n = 1;
  }
  if (hi <= lo) {
    hi = lo + 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double plot_w = static_cast<double>(width) - kMarginLeft - kMarginRight;
  const double plot_h = static_cast<double>(height) - kMarginTop - kMarginBottom;
  const auto x_of = [&](std::size_t i) {
    return kMarginLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1)
                                : plot_w / 2.0);
  };
  const auto y_of = [&](double v) { return kMarginTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";

  // Axes with a few y ticks.
  out << "  <line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\""
      << fmt(kMarginLeft) << "\" y2=\"" << fmt(kMarginTop + plot_h)
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kMarginTop + plot_h)
      << "\" x2=\"" << fmt(kMarginLeft + plot_w) << "\" y2=\"" << fmt(kMarginTop + plot_h)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = y_of(v);
    out << "  <line x1=\"" << fmt(kMarginLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(kMarginLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_tick(v) << "</text>\n";
  }

  double legend_x = kMarginLeft + 8.0;
  for (const auto& s : series) {
    if (s.values.empty()) continue;
    out << "  <polyline fill=\"none\" stroke=\"" << xml_escape(s.color)
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) out << ' ';
      out << fmt(x_of(i)) << ',' << fmt(y_of(s.values[i]));
    }
    out << "\"/>\n";
    out << "  <rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(kMarginTop - 12)
        << "\" width=\"18\" height=\"4\" fill=\"" << xml_escape(s.color) << "\"/>\n";
    out << "  <text x=\"" << fmt(legend_x + 24) << "\" y=\"" << fmt(kMarginTop - 6)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.name)
        << "</text>\n";
    legend_x += 150.0;
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<double>>& cells,
                           std::size_t cell_size) {
  const std::size_t rows = row_labels.size();
  const std::size_t cols = col_labels.size();
  const double left = 72.0;
  const double top = 56.0;
  const double cs = static_cast<double>(cell_size);
  const std::size_t width = static_cast<std::size_t>(left + cs * static_cast<double>(cols) + 24);
  const std::size_t height =
      static_cast<std::size_t>(top + cs * static_cast<double>(rows) + 40);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = left + cs * static_cast<double>(c);
      const double y = top + cs * static_cast<double>(r);
      const double v = r < cells.size() && c < cells[r].size()
                           ? cells[r][c]
                           : std::numeric_limits<double>::quiet_NaN();
      const std::string fill = std::isfinite(v) ? heat_color(v) : "#c8c8c8";
      out << "  <rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(cs)
          << "\" height=\"" << fmt(cs) << "\" fill=\"" << fill
          << "\" stroke=\"#444444\" stroke-width=\"0.5\">";
      out << "<title>" << xml_escape(row_labels[r]) << ", " << xml_escape(col_labels[c]) << ": "
          << (std::isfinite(v) ? fmt_tick(v) : std::string("n/a")) << "</title></rect>\n";
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    out << "  <text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(top + cs * (r + 0.5) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(row_labels[r]) << "</text>\n";
  }
  for (std::size_t c = 0; c < cols; ++c) {
    out << "  <text x=\"" << fmt(left + cs * (c + 0.5)) << "\" y=\"" << fmt(top - 8)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(col_labels[c]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tdann
