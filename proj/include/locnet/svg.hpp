#pragma once

// Two static SVG charts: per-node mean in-degree with a one-std band over the
// sweep, and the component membership trace of the reference IC.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "locnet/format.hpp"
#include "locnet/io.hpp"

namespace locnet::svg {

inline constexpr std::array<const char*, 10> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline const char* node_color(std::size_t i) { return palette[i % palette.size()]; }

struct Frame {
    double width = 760, height = 420;
    double left = 60, right = 110, top = 30, bottom = 50;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    [[nodiscard]] double px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    [[nodiscard]] double py(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

namespace detail {

inline std::string num(double v) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << v;
    return o.str();
}

inline void open(std::ostringstream& o, const Frame& f, const std::string& title) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(f.width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
}

inline void x_axis(std::ostringstream& o, const Frame& f, const std::string& label) {
    const double y0 = f.height - f.bottom;
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(f.width - f.right) << "\" y2=\""
      << num(y0) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = f.x_min + (f.x_max - f.x_min) * k / 4.0;
        o << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
          << format_double(std::round(x * 1000.0) / 1000.0) << "</text>\n";
    }
    o << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\"" << num(f.height - 10)
      << "\" text-anchor=\"middle\">" << label << "</text>\n";
}

inline void legend(std::ostringstream& o, const Frame& f, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double y = f.top + 16.0 * static_cast<double>(i) + 6;
        const double x = f.width - f.right + 14;
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 18) << "\" y2=\"" << num(y)
          << "\" stroke=\"" << node_color(i) << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << num(x + 24) << "\" y=\"" << num(y + 4) << "\">node " << i + 1 << "</text>\n";
    }
}

// Sweep values in increasing order with their original positions.
inline std::vector<std::size_t> increasing_order(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

}  // namespace detail

/// Mean in-degree per node against the swept value, with a shaded +-1 std band.
inline std::string degree_chart(const StatsTable& s, const std::string& title = "mean in-degree") {
    Frame f;
    const auto order = detail::increasing_order(s.sweep_values);
    f.x_min = s.sweep_values[order.front()];
    f.x_max = s.sweep_values[order.back()];
    if (f.x_max == f.x_min) f.x_max = f.x_min + 1.0;
    f.y_min = 0.0;
    f.y_max = std::max<double>(1.0, static_cast<double>(s.n_osc) - 1.0);

    std::ostringstream o;
    detail::open(o, f, title);
    for (int k = 0; k <= static_cast<int>(f.y_max); ++k) {
        const double y = f.py(k);
        o << "<line x1=\"" << f.left << "\" y1=\"" << detail::num(y) << "\" x2=\"" << f.width - f.right << "\" y2=\""
          << detail::num(y) << "\" stroke=\"#e0e0e0\"/>\n"
          << "<text x=\"" << f.left - 8 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">" << k
          << "</text>\n";
    }
    for (std::size_t i = 0; i < s.n_osc; ++i) {
        std::ostringstream band, line;
        for (std::size_t k : order) {
            if (std::isnan(s.mean[k][i])) continue;
            band << detail::num(f.px(s.sweep_values[k])) << ','
                 << detail::num(f.py(std::min(f.y_max, s.mean[k][i] + s.std[k][i]))) << ' ';
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if (std::isnan(s.mean[*it][i])) continue;
            band << detail::num(f.px(s.sweep_values[*it])) << ','
                 << detail::num(f.py(std::max(f.y_min, s.mean[*it][i] - s.std[*it][i]))) << ' ';
        }
        for (std::size_t k : order) {
            if (std::isnan(s.mean[k][i])) continue;
            line << detail::num(f.px(s.sweep_values[k])) << ',' << detail::num(f.py(s.mean[k][i])) << ' ';
        }
        o << "<polygon points=\"" << band.str() << "\" fill=\"" << node_color(i)
          << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"
          << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << node_color(i)
          << "\" stroke-width=\"1.5\"/>\n";
    }
    detail::x_axis(o, f, "m4");
    detail::legend(o, f, s.n_osc);
    o << "</svg>\n";
    return o.str();
}

/// One line per node; nodes of the same component are drawn on adjacent
/// slots, separate components are pulled apart by a gap.
inline std::string scc_trace_chart(const SccTraceTable& t, const std::string& title = "SCC evolution") {
    Frame f;
    const auto order = detail::increasing_order(t.sweep_values);
    f.x_min = t.sweep_values[order.front()];
    f.x_max = t.sweep_values[order.back()];
    if (f.x_max == f.x_min) f.x_max = f.x_min + 1.0;
    const double gap = 1.5;
    const std::size_t n = t.n_osc;
    f.y_min = -0.5;
    f.y_max = static_cast<double>(n) - 0.5 + gap * static_cast<double>(n > 0 ? n - 1 : 0);

    // Slot of every node per sweep value.
    std::vector<std::vector<double>> y(t.sweep_values.size(), std::vector<double>(n, NAN));
    for (std::size_t v = 0; v < t.sweep_values.size(); ++v) {
        if (!t.component_of[v]) continue;
        const auto& of = *t.component_of[v];
        std::vector<std::size_t> nodes(n);
        for (std::size_t i = 0; i < n; ++i) nodes[i] = i;
        std::stable_sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) { return of[a] < of[b]; });
        for (std::size_t slot = 0; slot < n; ++slot)
            y[v][nodes[slot]] = static_cast<double>(slot) + gap * static_cast<double>(of[nodes[slot]]);
    }

    std::ostringstream o;
    detail::open(o, f, title);
    for (std::size_t i = 0; i < n; ++i) {
        std::ostringstream line;
        for (std::size_t k : order) {
            if (std::isnan(y[k][i])) continue;
            line << detail::num(f.px(t.sweep_values[k])) << ',' << detail::num(f.py(f.y_max - y[k][i] + f.y_min))
                 << ' ';
        }
        o << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << node_color(i)
          << "\" stroke-width=\"2\"/>\n";
    }
    detail::x_axis(o, f, "m4");
    detail::legend(o, f, n);
    o << "</svg>\n";
    return o.str();
}

}  // namespace locnet::svg
