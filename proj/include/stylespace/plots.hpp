#pragma once
// Minimal SVG rendering for the stability curve and correlation bars. The CSV
// written next to each SVG is the canonical data artifact.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/distributions.hpp"
#include "stylespace/error.hpp"
#include "stylespace/metrics.hpp"

namespace stylespace {

enum class PlotFormat { svg, csv };

inline PlotFormat parse_plot_format(std::string_view s) {
  if (s == "svg") return PlotFormat::svg;
  if (s == "csv") return PlotFormat::csv;
  throw ConfigError("unknown plot format '" + std::string(s) + "'");
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << body;
}

}  // namespace detail

// Mean curve as a polyline (one vertex per t) over a +/- stddev band.
inline std::string stability_svg(const StabilityTrace& trace) {
  if (trace.series.empty()) throw ComputeError("empty stability trace");
  constexpr double W = 480, H = 300, L = 50, R = 20, T = 20, B = 40;
  const auto& s = trace.series;
  double ymax = 0.0;
  for (const auto& p : s) ymax = std::max(ymax, p.value + p.stddev);
  if (ymax <= 0.0) ymax = 1.0;
  const double t0 = static_cast<double>(s.front().t), t1 = static_cast<double>(s.back().t);
  auto x = [&](double t) { return L + (t1 > t0 ? (t - t0) / (t1 - t0) : 0.5) * (W - L - R); };
  auto y = [&](double v) { return H - B - std::clamp(v / ymax, 0.0, 1.0) * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  svg << "<polygon class=\"band\" fill=\"steelblue\" fill-opacity=\"0.25\" points=\"";
  for (const auto& p : s) svg << detail::fmt(x(static_cast<double>(p.t))) << ',' << detail::fmt(y(p.value + p.stddev)) << ' ';
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    svg << detail::fmt(x(static_cast<double>(it->t))) << ',' << detail::fmt(y(std::max(0.0, it->value - it->stddev))) << ' ';
  }
  svg << "\"/>\n";
  svg << "<polyline class=\"mean\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < s.size(); ++i) {
    svg << (i ? " " : "") << detail::fmt(x(static_cast<double>(s[i].t))) << ',' << detail::fmt(y(s[i].value));
  }
  svg << "\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">t</text>\n";
  svg << "<text x=\"12\" y=\"" << T + 10 << "\">S_t</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

// Grouped bars: one group per representation pair, Pearson and dCor side by side.
inline std::string correlation_svg(const std::vector<CorrelationEntry>& entries) {
  if (entries.empty()) throw ComputeError("empty correlation report");
  constexpr double W = 480, H = 300, L = 50, B = 50, T = 20, bar = 30;
  const double group = (W - L - 20) / static_cast<double>(entries.size());
  auto height = [&](double v) { return std::clamp(v, 0.0, 1.0) * (H - T - B); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double gx = L + group * static_cast<double>(i) + group / 2 - bar;
    const double hp = height(entries[i].pearson), hd = height(entries[i].dcor);
    svg << "<rect class=\"pearson\" x=\"" << detail::fmt(gx) << "\" y=\"" << detail::fmt(H - B - hp) << "\" width=\""
        << bar << "\" height=\"" << detail::fmt(hp) << "\" fill=\"steelblue\"/>\n";
    svg << "<rect class=\"dcor\" x=\"" << detail::fmt(gx + bar) << "\" y=\"" << detail::fmt(H - B - hd)
        << "\" width=\"" << bar << "\" height=\"" << detail::fmt(hd) << "\" fill=\"darkorange\"/>\n";
    svg << "<text x=\"" << detail::fmt(gx + bar) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << entries[i].pair << "</text>\n";
  }
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - 20 << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << L << "\" y=\"" << H - 10 << "\">blue: Pearson r, orange: distance correlation</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

inline std::string correlation_csv(const std::vector<CorrelationEntry>& entries) {
  std::ostringstream out;
  out.precision(17);
  out << "pair,pearson,dcor\n";
  for (const auto& e : entries) out << e.pair << ',' << e.pearson << ',' << e.dcor << '\n';
  return out.str();
}

// Writes <stem>.csv always and <stem>.svg when format is svg. Returns the files written.
inline std::vector<std::filesystem::path> emit_plots(const StabilityTrace& trace, std::string_view format,
                                                     const std::filesystem::path& stem) {
  const auto f = parse_plot_format(format);
  if (trace.series.empty()) throw ComputeError("empty stability trace");
  std::vector<std::filesystem::path> written;
  std::ostringstream csv;
  write_trace_csv(trace, csv);
  auto csv_path = stem;
  csv_path += ".csv";
  detail::write_text(csv_path, csv.str());
  written.push_back(csv_path);
  if (f == PlotFormat::svg) {
    auto svg_path = stem;
    svg_path += ".svg";
    detail::write_text(svg_path, stability_svg(trace));
    written.push_back(svg_path);
  }
  return written;
}

inline std::vector<std::filesystem::path> emit_plots(const std::vector<CorrelationEntry>& entries,
                                                     std::string_view format, const std::filesystem::path& stem) {
  const auto f = parse_plot_format(format);
  if (entries.empty()) throw ComputeError("empty correlation report");
  std::vector<std::filesystem::path> written;
  auto csv_path = stem;
  csv_path += ".csv";
  detail::write_text(csv_path, correlation_csv(entries));
  written.push_back(csv_path);
  if (f == PlotFormat::svg) {
    auto svg_path = stem;
    svg_path += ".svg";
    detail::write_text(svg_path, correlation_svg(entries));
    written.push_back(svg_path);
  }
  return written;
}

}  // namespace stylespace
