#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wasubench/pca.hpp"
#include "wasubench/results.hpp"

namespace wasubench {

enum class ValueKind { score, time_ns, rss, vms, generic };
enum class PlotMode { normalized, absolute };

std::string_view to_string(ValueKind k);

struct PlotSeries {
  struct Series {
    std::string runtime;
    std::vector<std::optional<double>> values;  // one per label; nullopt = not run
  };

  std::vector<std::string> labels;  // benchmark categories on the x axis
  std::vector<Series> series;       // sorted by runtime label
  ValueKind kind = ValueKind::generic;
  PlotMode mode = PlotMode::absolute;
};

/// Fixed palette; runtime colors follow sorted runtime-label order.
inline constexpr std::array<std::string_view, 12> kPalette{
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#8c564b"};

/// normalized iff some benchmark has summaries from two or more runtime labels.
PlotMode select_mode(std::span<const Summary> summaries);

/// v / max(values): the best (highest) score becomes 1.0.
std::vector<double> normalize_scores(std::span<const double> values);

/// v / min(values): the best (lowest) time becomes 1.0, the rest are >= 1.
std::vector<double> normalize_times(std::span<const double> values);

/// One chart's worth of data from summaries. Benchmarks are labelled
/// `group/benchmark`; in normalized mode each benchmark is normalized over
/// the runtimes that produced a value for it. Lower-is-better kinds
/// (time, rss, vms) use normalize_times; score uses normalize_scores.
PlotSeries build_series(std::span<const Summary> summaries, ValueKind kind, PlotMode mode);

/// Grouped bar chart. With `log_scale`, bar heights are proportional to
/// log10(value) over a baseline of 1. Throws EmptySeries.
std::string render_grouped_bars(const PlotSeries& series, std::string_view title,
                                bool log_scale = false);

/// "PC2 (17.3%)"
std::string pc_axis_label(int component, double explained_ratio);

/// One marker per point, colored by group, with a legend. Throws EmptySeries.
std::string render_scatter(std::span<const pca::ScatterPoint<double>> points,
                           std::string_view x_label, std::string_view y_label,
                           std::string_view title = "");

/// Line chart through (0, 0) and the given points on unit axes. Throws EmptySeries.
std::string render_cdf(std::span<const std::pair<double, double>> points,
                       std::string_view title = "");

/// `engine,value`, engines in map order, values in input order. Throws EmptySeries.
std::string export_distribution(const std::map<std::string, std::vector<double>>& values);

}  // namespace wasubench
