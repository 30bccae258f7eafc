#include "wasubench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "wasubench/error.hpp"
#include "wasubench/text.hpp"

namespace wasubench {

std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::score: return "score";
    case ValueKind::time_ns: return "time_ns";
    case ValueKind::rss: return "rss";
    case ValueKind::vms: return "vms";
    case ValueKind::generic: return "value";
  }
  return "value";
}

PlotMode select_mode(std::span<const Summary> summaries) {
  std::map<std::pair<std::string, std::string>, std::set<std::string>> runtimes;
  for (const auto& s : summaries) {
    auto& labels = runtimes[{s.group, s.benchmark_id}];
    labels.insert(s.runtime_label());
    if (labels.size() >= 2) return PlotMode::normalized;
  }
  return PlotMode::absolute;
}

namespace {

void require_positive(std::span<const double> values) {
  for (double v : values) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw NonPositiveValue("normalization needs positive finite values, got " + format_real(v));
    }
  }
}

std::optional<double> summary_value(const Summary& s, ValueKind kind) {
  switch (kind) {
    case ValueKind::score: return s.mean_score;
    case ValueKind::time_ns: return s.mean_time_ns;
    case ValueKind::rss: return s.mean_rss_bytes;
    case ValueKind::vms: return s.mean_vms_bytes;
    case ValueKind::generic: return s.mean_time_ns;
  }
  return std::nullopt;
}

// Numbers in SVG output use a fixed two-decimal format.
std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string svg_open(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) +
         "\" font-family=\"DejaVu Sans, Arial, sans-serif\" font-size=\"12\">\n"
         "<rect x=\"0\" y=\"0\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
}

std::string text_el(double x, double y, std::string_view body, std::string_view extra = "") {
  std::string out = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"";
  if (!extra.empty()) out += " " + std::string(extra);
  return out + ">" + xml_escape(body) + "</text>\n";
}

std::string line_el(double x1, double y1, double x2, double y2, std::string_view extra) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" " + std::string(extra) + "/>\n";
}

// Smallest of {1, 2, 2.5, 5, 10} x 10^e that is >= v.
double nice_ceiling(double v) {
  if (!(v > 0)) return 1.0;
  const double base = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * base >= v * (1 - 1e-12)) return m * base;
  }
  return 10 * base;
}

std::string tick_label(double v) {
  char buf[48];
  if (v != 0 && (std::abs(v) >= 1e6 || std::abs(v) < 1e-2)) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

}  // namespace

std::vector<double> normalize_scores(std::span<const double> values) {
  require_positive(values);
  if (values.empty()) return {};
  const double best = *std::max_element(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values) out.push_back(v / best);
  return out;
}

std::vector<double> normalize_times(std::span<const double> values) {
  require_positive(values);
  if (values.empty()) return {};
  const double best = *std::min_element(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values) out.push_back(v / best);
  return out;
}

PlotSeries build_series(std::span<const Summary> summaries, ValueKind kind, PlotMode mode) {
  std::set<std::string> label_set, runtime_set;
  std::map<std::pair<std::string, std::string>, double> cells;  // (label, runtime) -> value
  for (const auto& s : summaries) {
    const auto v = summary_value(s, kind);
    const std::string label = s.group + "/" + s.benchmark_id;
    label_set.insert(label);
    runtime_set.insert(s.runtime_label());
    if (v) cells[{label, s.runtime_label()}] = *v;
  }

  PlotSeries out;
  out.kind = kind;
  out.mode = mode;
  out.labels.assign(label_set.begin(), label_set.end());
  for (const auto& rt : runtime_set) out.series.push_back({rt, {}});
  for (auto& s : out.series) s.values.resize(out.labels.size());

  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    std::vector<std::size_t> present;
    std::vector<double> raw;
    for (std::size_t r = 0; r < out.series.size(); ++r) {
      auto it = cells.find({out.labels[i], out.series[r].runtime});
      if (it == cells.end()) continue;
      present.push_back(r);
      raw.push_back(it->second);
    }
    if (mode == PlotMode::normalized && !raw.empty()) {
      raw = kind == ValueKind::score ? normalize_scores(raw) : normalize_times(raw);
    }
    for (std::size_t k = 0; k < present.size(); ++k) out.series[present[k]].values[i] = raw[k];
  }
  return out;
}

std::string render_grouped_bars(const PlotSeries& series, std::string_view title,
                                bool log_scale) {
  if (series.labels.empty() || series.series.empty()) throw EmptySeries("nothing to plot");
  for (const auto& s : series.series) {
    if (s.values.size() != series.labels.size()) {
      throw std::invalid_argument("series length differs from label count");
    }
  }

  constexpr double kLeft = 80, kTop = 50, kPlotH = 400, kBarW = 18, kGap = 24, kLegendW = 200;
  const double group_w = static_cast<double>(series.series.size()) * kBarW + kGap;
  const double plot_w = group_w * static_cast<double>(series.labels.size());
  const double width = kLeft + plot_w + kLegendW;
  const double height = kTop + kPlotH + 150;
  const double base_y = kTop + kPlotH;

  double max_v = 0;
  std::size_t missing = 0;
  for (const auto& s : series.series) {
    for (const auto& v : s.values) {
      if (v) {
        max_v = std::max(max_v, *v);
      } else {
        ++missing;
      }
    }
  }

  // Maps a value to a bar height in pixels.
  double top = 1;
  int top_exp = 1;
  if (log_scale) {
    top_exp = std::max(1, static_cast<int>(std::ceil(std::log10(std::max(max_v, 1.0)) - 1e-12)));
  } else {
    top = nice_ceiling(max_v);
  }
  auto bar_height = [&](double v) {
    if (log_scale) return v > 1 ? kPlotH * std::log10(v) / top_exp : 0.0;
    return v > 0 ? kPlotH * v / top : 0.0;
  };

  std::string out = svg_open(width, height);
  out += text_el(width / 2, 24, title, "text-anchor=\"middle\" font-size=\"16\" class=\"title\"");

  // Axes and ticks.
  out += line_el(kLeft, kTop, kLeft, base_y, "stroke=\"#000000\" class=\"axis\"");
  out += line_el(kLeft, base_y, kLeft + plot_w, base_y, "stroke=\"#000000\" class=\"axis\"");
  std::vector<std::pair<double, double>> ticks;  // (value, y)
  if (log_scale) {
    for (int e = 0; e <= top_exp; ++e) {
      ticks.emplace_back(std::pow(10.0, e), base_y - kPlotH * e / top_exp);
    }
  } else {
    for (int i = 0; i <= 5; ++i) ticks.emplace_back(top * i / 5, base_y - kPlotH * i / 5);
  }
  for (const auto& [v, y] : ticks) {
    out += line_el(kLeft - 4, y, kLeft + plot_w, y, "stroke=\"#dddddd\" class=\"grid\"");
    out += text_el(kLeft - 8, y + 4, tick_label(v), "text-anchor=\"end\" class=\"tick\"");
  }
  std::string y_title(to_string(series.kind));
  if (series.mode == PlotMode::normalized) y_title += " (normalized)";
  if (log_scale) y_title += " (log10)";
  out += text_el(18, kTop + kPlotH / 2, y_title,
                 "text-anchor=\"middle\" transform=\"rotate(-90 18 " + num(kTop + kPlotH / 2) +
                     ")\" class=\"ylabel\"");

  for (std::size_t i = 0; i < series.labels.size(); ++i) {
    const double gx = kLeft + group_w * static_cast<double>(i) + kGap / 2;
    for (std::size_t r = 0; r < series.series.size(); ++r) {
      const auto& v = series.series[r].values[i];
      if (!v) continue;
      const double h = bar_height(*v);
      const double x = gx + kBarW * static_cast<double>(r);
      out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(base_y - h) + "\" width=\"" +
             num(kBarW - 2) + "\" height=\"" + num(h) + "\" fill=\"" +
             std::string(kPalette[r % kPalette.size()]) + "\" data-benchmark=\"" +
             xml_escape(series.labels[i]) + "\" data-runtime=\"" +
             xml_escape(series.series[r].runtime) + "\" data-value=\"" + format_real(*v) +
             "\"/>\n";
    }
    const double cx = gx + kBarW * static_cast<double>(series.series.size()) / 2;
    out += text_el(cx, base_y + 14, series.labels[i],
                   "text-anchor=\"end\" transform=\"rotate(-45 " + num(cx) + " " +
                       num(base_y + 14) + ")\" class=\"category\"");
  }

  const double lx = kLeft + plot_w + 20;
  for (std::size_t r = 0; r < series.series.size(); ++r) {
    const double ly = kTop + 18 * static_cast<double>(r);
    out += "<rect class=\"swatch\" x=\"" + num(lx) + "\" y=\"" + num(ly) +
           "\" width=\"12\" height=\"12\" fill=\"" + std::string(kPalette[r % kPalette.size()]) +
           "\"/>\n";
    out += text_el(lx + 18, ly + 10, series.series[r].runtime, "class=\"legend\"");
  }
  if (missing > 0) {
    out += text_el(kLeft, height - 10,
                   std::to_string(missing) + " benchmark/runtime cell(s) without data are not drawn",
                   "class=\"footnote\"");
  }
  out += "</svg>\n";
  return out;
}

std::string pc_axis_label(int component, double explained_ratio) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "PC%d (%.1f%%)", component, explained_ratio * 100.0);
  return buf;
}

std::string render_scatter(std::span<const pca::ScatterPoint<double>> points,
                           std::string_view x_label, std::string_view y_label,
                           std::string_view title) {
  if (points.empty()) throw EmptySeries("no points to plot");

  constexpr double kLeft = 70, kTop = 50, kSize = 400, kLegendW = 180;
  const double width = kLeft + kSize + kLegendW;
  const double height = kTop + kSize + 60;

  auto span_of = [&](auto get) {
    double lo = get(points.front()), hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    const double pad = hi > lo ? (hi - lo) * 0.1 : 1.0;
    return std::pair(lo - pad, hi + pad);
  };
  const auto [x0, x1] = span_of([](const auto& p) { return p.x; });
  const auto [y0, y1] = span_of([](const auto& p) { return p.y; });
  auto px = [&](double x) { return kLeft + kSize * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return kTop + kSize - kSize * (y - y0) / (y1 - y0); };

  std::set<std::string> group_set;
  for (const auto& p : points) group_set.insert(p.group);
  const std::vector<std::string> groups(group_set.begin(), group_set.end());
  auto color = [&](const std::string& g) {
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(groups.begin(), groups.end(), g) - groups.begin());
    return std::string(kPalette[idx % kPalette.size()]);
  };

  std::string out = svg_open(width, height);
  out += text_el(width / 2, 24, title, "text-anchor=\"middle\" font-size=\"16\" class=\"title\"");
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kSize) +
         "\" height=\"" + num(kSize) + "\" fill=\"none\" stroke=\"#000000\" class=\"frame\"/>\n";
  if (x0 < 0 && x1 > 0) {
    out += line_el(px(0), kTop, px(0), kTop + kSize,
                   "stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\" class=\"zero\"");
  }
  if (y0 < 0 && y1 > 0) {
    out += line_el(kLeft, py(0), kLeft + kSize, py(0),
                   "stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\" class=\"zero\"");
  }
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    out += text_el(px(xv), kTop + kSize + 16, tick_label(xv),
                   "text-anchor=\"middle\" class=\"tick\"");
    out += text_el(kLeft - 6, py(yv) + 4, tick_label(yv), "text-anchor=\"end\" class=\"tick\"");
  }
  out += text_el(kLeft + kSize / 2, kTop + kSize + 40, x_label,
                 "text-anchor=\"middle\" class=\"xlabel\"");
  out += text_el(18, kTop + kSize / 2, y_label,
                 "text-anchor=\"middle\" transform=\"rotate(-90 18 " + num(kTop + kSize / 2) +
                     ")\" class=\"ylabel\"");

  for (const auto& p : points) {
    char data[96];
    std::snprintf(data, sizeof data, "data-x=\"%.6f\" data-y=\"%.6f\"", p.x, p.y);
    out += "<circle class=\"point\" cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) +
           "\" r=\"4\" fill=\"" + color(p.group) + "\" fill-opacity=\"0.8\" data-label=\"" +
           xml_escape(p.label) + "\" data-group=\"" + xml_escape(p.group) + "\" " + data +
           "/>\n";
  }
  const double lx = kLeft + kSize + 20;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double ly = kTop + 18 * static_cast<double>(g);
    out += "<circle class=\"swatch\" cx=\"" + num(lx + 6) + "\" cy=\"" + num(ly + 6) +
           "\" r=\"5\" fill=\"" + color(groups[g]) + "\"/>\n";
    out += text_el(lx + 18, ly + 10, groups[g], "class=\"legend\"");
  }
  out += "</svg>\n";
  return out;
}

std::string render_cdf(std::span<const std::pair<double, double>> points, std::string_view title) {
  if (points.empty()) throw EmptySeries("no CDF points");

  constexpr double kLeft = 70, kTop = 50, kSize = 400;
  const double width = kLeft + kSize + 40;
  const double height = kTop + kSize + 60;
  auto px = [&](double x) { return kLeft + kSize * x; };
  auto py = [&](double y) { return kTop + kSize - kSize * y; };

  std::string out = svg_open(width, height);
  out += text_el(width / 2, 24, title, "text-anchor=\"middle\" font-size=\"16\" class=\"title\"");
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kSize) +
         "\" height=\"" + num(kSize) + "\" fill=\"none\" stroke=\"#000000\" class=\"frame\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    out += text_el(px(v), kTop + kSize + 16, tick_label(v), "text-anchor=\"middle\" class=\"tick\"");
    out += text_el(kLeft - 6, py(v) + 4, tick_label(v), "text-anchor=\"end\" class=\"tick\"");
  }
  out += text_el(kLeft + kSize / 2, kTop + kSize + 40, "fraction of executed functions",
                 "text-anchor=\"middle\" class=\"xlabel\"");
  out += text_el(18, kTop + kSize / 2, "fraction of execution",
                 "text-anchor=\"middle\" transform=\"rotate(-90 18 " + num(kTop + kSize / 2) +
                     ")\" class=\"ylabel\"");

  std::string pts = num(px(0)) + "," + num(py(0));
  for (const auto& [x, y] : points) pts += " " + num(px(x)) + "," + num(py(y));
  out += "<polyline class=\"cdf\" fill=\"none\" stroke=\"" + std::string(kPalette[0]) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  out += "</svg>\n";
  return out;
}

std::string export_distribution(const std::map<std::string, std::vector<double>>& values) {
  std::string body;
  for (const auto& [engine, vs] : values) {
    for (double v : vs) body += csv_line({engine, format_real(v)});
  }
  if (body.empty()) throw EmptySeries("no distribution values");
  return "engine,value\n" + body;
}

}  // namespace wasubench
