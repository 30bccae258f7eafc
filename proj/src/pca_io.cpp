#include "wasubench/pca_io.hpp"

#include "wasubench/text.hpp"

namespace wasubench::pca {

DataMatrix<double> read_metrics_csv(std::string_view text) {
  const std::vector<CsvRow> rows = parse_csv(text);
  if (rows.empty()) throw MalformedTable("metrics table is empty");
  const CsvRow& header = rows.front();
  if (header.size() < 3 || header[0] != "benchmark_id" || header[1] != "group") {
    throw MalformedTable("header must start with benchmark_id,group and name at least one metric");
  }
  const std::size_t width = header.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw MalformedTable("row " + std::to_string(r + 1) + " has " +
                           std::to_string(rows[r].size()) + " fields, expected " +
                           std::to_string(width));
    }
  }

  DataMatrix<double> out;
  std::vector<std::size_t> cols;
  for (std::size_t c = 2; c < width; ++c) {
    bool any = false;
    for (std::size_t r = 1; r < rows.size() && !any; ++r) any = !rows[r][c].empty();
    if (any) {
      cols.push_back(c);
      out.col_labels.push_back(header[c]);
    } else {
      out.dropped_cols.push_back(header[c]);
    }
  }

  std::vector<std::vector<double>> kept;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::vector<double> values;
    bool complete = true;
    for (std::size_t c : cols) {
      const auto v = parse_real(rows[r][c]);
      if (!v) {
        complete = false;
        break;
      }
      values.push_back(*v);
    }
    if (!complete) {
      out.dropped_rows.push_back(rows[r][0]);
      continue;
    }
    out.row_labels.push_back(rows[r][0]);
    out.row_groups.push_back(rows[r][1]);
    kept.push_back(std::move(values));
  }

  out.values.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
    }
  }
  return out;
}

std::string loadings_csv(const PcaModel<double>& m) {
  std::string out = "component,metric,loading\n";
  for (Eigen::Index c = 0; c < m.loadings.cols(); ++c) {
    for (Eigen::Index i = 0; i < m.loadings.rows(); ++i) {
      out += csv_line({"PC" + std::to_string(c + 1), m.col_labels[static_cast<std::size_t>(i)],
                       format_real(m.loadings(i, c))});
    }
  }
  return out;
}

std::string scores_csv(const PcaModel<double>& m) {
  CsvRow header{"benchmark", "group"};
  for (Eigen::Index c = 0; c < m.scores.cols(); ++c) header.push_back("pc" + std::to_string(c + 1));
  std::string out = csv_line(header);
  for (Eigen::Index i = 0; i < m.scores.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    CsvRow row{m.row_labels[r], r < m.row_groups.size() ? m.row_groups[r] : ""};
    for (Eigen::Index c = 0; c < m.scores.cols(); ++c) row.push_back(format_real(m.scores(i, c)));
    out += csv_line(row);
  }
  return out;
}

std::string explained_variance_csv(const PcaModel<double>& m) {
  std::string out = "component,eigenvalue,explained_ratio,cumulative_ratio\n";
  double cumulative = 0;
  for (Eigen::Index c = 0; c < m.eigenvalues.size(); ++c) {
    cumulative += m.explained_ratio(c);
    out += csv_line({"PC" + std::to_string(c + 1), format_real(m.eigenvalues(c)),
                     format_real(m.explained_ratio(c)), format_real(cumulative)});
  }
  return out;
}

}  // namespace wasubench::pca
