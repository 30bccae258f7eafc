#pragma once

#include <string>
#include <string_view>

#include "wasubench/pca.hpp"

namespace wasubench::pca {

/// Reads a metrics table (benchmark_id, group, metric columns...). Columns
/// empty in every row are dropped first; then rows with any empty or
/// non-numeric cell are dropped. Both are recorded on the result.
/// Throws MalformedTable.
DataMatrix<double> read_metrics_csv(std::string_view text);

/// `component,metric,loading`, components PC1..PCK, metrics in column order.
std::string loadings_csv(const PcaModel<double>& m);

/// `benchmark,group,pc1..pcK`.
std::string scores_csv(const PcaModel<double>& m);

/// `component,eigenvalue,explained_ratio,cumulative_ratio`.
std::string explained_variance_csv(const PcaModel<double>& m);

}  // namespace wasubench::pca
