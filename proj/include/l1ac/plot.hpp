#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "l1ac/engine.hpp"

namespace l1ac {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string fmt(double v, int prec = 6) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

/// Round step size for roughly `target` ticks over [lo, hi].
inline double tick_step(double lo, double hi, int target) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double k : {1.0, 2.0, 5.0, 10.0}) {
        if (k * mag >= raw) return k * mag;
    }
    return 10.0 * mag;
}

/// Keeps min and max of each bucket so narrow spikes survive.
inline std::vector<std::pair<double, double>> decimate(const Series& s, std::size_t max_points) {
    std::vector<std::pair<double, double>> pts;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (n <= max_points) {
        for (std::size_t i = 0; i < n; ++i) pts.emplace_back(s.x[i], s.y[i]);
        return pts;
    }
    const std::size_t buckets = max_points / 2;
    for (std::size_t b = 0; b < buckets; ++b) {
        const std::size_t i0 = b * n / buckets;
        const std::size_t i1 = std::max(i0 + 1, (b + 1) * n / buckets);
        std::size_t lo = i0;
        std::size_t hi = i0;
        for (std::size_t i = i0; i < i1; ++i) {
            if (s.y[i] < s.y[lo]) lo = i;
            if (s.y[i] > s.y[hi]) hi = i;
        }
        pts.emplace_back(s.x[std::min(lo, hi)], s.y[std::min(lo, hi)]);
        if (lo != hi) pts.emplace_back(s.x[std::max(lo, hi)], s.y[std::max(lo, hi)]);
    }
    return pts;
}

}  // namespace detail

/// Renders a chart as a standalone SVG document.
inline std::string render_svg(const LineChart& chart) {
    constexpr double width = 800.0;
    constexpr double height = 480.0;
    constexpr double left = 80.0;
    constexpr double right = 170.0;
    constexpr double top = 40.0;
    constexpr double bottom = 60.0;
    static constexpr std::array<const char*, 6> palette = {"#000000", "#1f77b4", "#d62728",
                                                           "#2ca02c", "#ff7f0e", "#9467bd"};

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : chart.series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (!std::isfinite(xmin)) { xmin = 0.0; xmax = 1.0; }
    if (!std::isfinite(ymin)) { ymin = 0.0; ymax = 1.0; }
    if (xmax - xmin <= 0.0) xmax = xmin + 1.0;
    if (ymax - ymin <= 1e-12 * std::max(1.0, std::abs(ymax))) {
        const double pad = std::max(1e-3, 0.1 * std::abs(ymax));
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }

    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" "
           "viewBox=\"0 0 800 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-size=\"15\">" + detail::xml_escape(chart.title) + "</text>\n";

    svg += "<g class=\"axes\" stroke=\"#888\" stroke-width=\"1\">\n";
    svg += "<rect x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(top) + "\" width=\"" +
           detail::fmt(pw) + "\" height=\"" + detail::fmt(ph) + "\" fill=\"none\"/>\n";
    const double xs = detail::tick_step(xmin, xmax, 8);
    for (double v = std::ceil(xmin / xs) * xs; v <= xmax + 1e-9 * xs; v += xs) {
        svg += "<line x1=\"" + detail::fmt(px(v)) + "\" y1=\"" + detail::fmt(top + ph) +
               "\" x2=\"" + detail::fmt(px(v)) + "\" y2=\"" + detail::fmt(top + ph + 5) + "\"/>\n";
        svg += "<text x=\"" + detail::fmt(px(v)) + "\" y=\"" + detail::fmt(top + ph + 18) +
               "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#000\">" +
               detail::fmt(std::abs(v) < 1e-12 * xs ? 0.0 : v) + "</text>\n";
    }
    const double ys = detail::tick_step(ymin, ymax, 6);
    for (double v = std::ceil(ymin / ys) * ys; v <= ymax + 1e-9 * ys; v += ys) {
        svg += "<line x1=\"" + detail::fmt(left - 5) + "\" y1=\"" + detail::fmt(py(v)) +
               "\" x2=\"" + detail::fmt(left) + "\" y2=\"" + detail::fmt(py(v)) + "\"/>\n";
        svg += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" + detail::fmt(py(v) + 4) +
               "\" text-anchor=\"end\" stroke=\"none\" fill=\"#000\">" +
               detail::fmt(std::abs(v) < 1e-12 * ys ? 0.0 : v) + "</text>\n";
    }
    svg += "</g>\n";
    svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" + detail::fmt(height - 15) +
           "\" text-anchor=\"middle\">" + detail::xml_escape(chart.x_label) + "</text>\n";
    svg += "<text transform=\"translate(20," + detail::fmt(top + ph / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + detail::xml_escape(chart.y_label) +
           "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = palette[k % palette.size()];
        svg += "<polyline class=\"series\" fill=\"none\" stroke-width=\"1.5\" stroke=\"";
        svg += color;
        svg += "\"";
        if (k == 0 && chart.series.size() > 1) svg += " stroke-dasharray=\"6,3\"";
        svg += " points=\"";
        for (const auto& [xv, yv] : detail::decimate(s, 4000)) {
            svg += detail::fmt(px(xv), 7) + "," + detail::fmt(py(yv), 7) + " ";
        }
        svg += "\"/>\n";
    }

    svg += "<g class=\"legend\">\n";
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const double ly = top + 14 + 20.0 * static_cast<double>(k);
        const double lx = left + pw + 15;
        svg += "<line x1=\"" + detail::fmt(lx) + "\" y1=\"" + detail::fmt(ly) + "\" x2=\"" +
               detail::fmt(lx + 25) + "\" y2=\"" + detail::fmt(ly) +
               "\" stroke-width=\"2\" stroke=\"" + palette[k % palette.size()] + "\"" +
               (k == 0 && chart.series.size() > 1 ? " stroke-dasharray=\"6,3\"" : "") + "/>\n";
        svg += "<text class=\"legend-entry\" x=\"" + detail::fmt(lx + 32) + "\" y=\"" +
               detail::fmt(ly + 4) + "\">" + detail::xml_escape(chart.series[k].name) +
               "</text>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

inline void write_svg(const LineChart& chart, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("emit_plots: cannot open " + path.string());
    }
    out << render_svg(chart);
    if (!out) {
        throw Error("emit_plots: write failed for " + path.string());
    }
}

enum class PlotGroup { output, adaptive };

/// Output chart: the reference (from the first trace) then y of every trace.
/// With two traces this is the paired original/modified overlay.
inline LineChart output_chart(std::span<const SimTrace> traces, const std::string& title) {
    LineChart chart{title, "time [s]", "output y", {}};
    if (traces.empty()) {
        throw Error("emit_plots: no traces");
    }
    chart.series.push_back({"reference", traces.front().t, traces.front().r});
    for (const auto& tr : traces) {
        chart.series.push_back({tr.label.empty() ? "y" : tr.label, tr.t, tr.y});
    }
    return chart;
}

/// Adaptive signal u_a of every trace (first input channel).
inline LineChart adaptive_chart(std::span<const SimTrace> traces, const std::string& title) {
    LineChart chart{title, "time [s]", "adaptive signal u_a", {}};
    if (traces.empty()) {
        throw Error("emit_plots: no traces");
    }
    for (const auto& tr : traces) {
        std::vector<double> u;
        u.reserve(tr.size());
        for (const auto& v : tr.u_a) u.push_back(v.size() > 0 ? v(0) : 0.0);
        chart.series.push_back({tr.label.empty() ? "u_a" : tr.label, tr.t, std::move(u)});
    }
    return chart;
}

/// Writes one SVG per requested group as <dir>/<stem>_<group>.svg.
inline std::vector<std::filesystem::path> emit_plots(std::span<const SimTrace> traces,
                                                     const std::filesystem::path& dir,
                                                     const std::string& stem,
                                                     std::span<const PlotGroup> groups) {
    if (traces.empty()) {
        throw Error("emit_plots: no traces");
    }
    std::vector<std::filesystem::path> written;
    for (PlotGroup g : groups) {
        const bool out = g == PlotGroup::output;
        const auto chart = out ? output_chart(traces, stem + ": system output")
                               : adaptive_chart(traces, stem + ": adaptive signal magnitude");
        auto path = dir / (stem + (out ? "_output.svg" : "_adaptive.svg"));
        write_svg(chart, path);
        written.push_back(std::move(path));
    }
    return written;
}

}  // namespace l1ac
