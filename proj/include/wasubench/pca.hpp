#pragma once

// Principal component analysis over a benchmark x metric matrix.
//
// The matrix is standardized column-wise (sample statistics, denominator
// N-1), the K x K correlation matrix C = Y^T Y / (N-1) is diagonalized with
// cyclic Jacobi rotations, and scores are S = Y L. Everything is templated
// on the scalar type; the file readers/writers in pca_io.hpp use double.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "wasubench/error.hpp"

namespace wasubench::pca {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct DataMatrix {
  std::vector<std::string> row_labels;  // N benchmark ids
  std::vector<std::string> row_groups;  // N group tags
  std::vector<std::string> col_labels;  // K metric names
  Matrix<Scalar> values;                // N x K, finite
  std::vector<std::string> dropped_rows;  // removed before construction (missing data)
  std::vector<std::string> dropped_cols;  // removed before construction (no data at all)
};

template <typename Scalar = double>
struct Standardized {
  DataMatrix<Scalar> y;  // retained columns only
  Vector<Scalar> means;
  Vector<Scalar> stddevs;
  std::vector<std::string> dropped_cols;  // zero variance
};

template <typename Scalar = double>
struct SymmetricEigen {
  Vector<Scalar> values;   // unsorted, diagonal of the rotated matrix
  Matrix<Scalar> vectors;  // columns
  int sweeps = 0;
  Scalar residual = 0;     // largest off-diagonal magnitude at exit
};

template <typename Scalar = double>
struct PcaModel {
  std::vector<std::string> row_labels;
  std::vector<std::string> row_groups;
  std::vector<std::string> col_labels;  // post-drop
  Vector<Scalar> means;
  Vector<Scalar> stddevs;
  Matrix<Scalar> loadings;  // K x K, orthonormal columns
  Vector<Scalar> eigenvalues;  // nonincreasing, nonnegative
  Vector<Scalar> explained_ratio;
  Matrix<Scalar> scores;  // N x K
  std::vector<std::string> dropped_cols;
  std::vector<std::string> dropped_rows;
  int sweeps = 0;

  Eigen::Index components() const { return loadings.cols(); }
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

/// Magnitudes closer than this count as tied for the sign convention.
inline constexpr double kSignTieTolerance = 1e-10;

/// Sample standard deviation with denominator N-1.
template <typename Derived>
typename Derived::Scalar sample_stddev(const Eigen::MatrixBase<Derived>& column) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = column.size();
  const Scalar mean = column.mean();
  return std::sqrt((column.array() - mean).square().sum() / static_cast<Scalar>(n - 1));
}

/// Y_j = (X_j - mean_j) / s_j. Constant columns are dropped and listed.
template <typename Scalar>
Standardized<Scalar> standardize(const DataMatrix<Scalar>& x) {
  const Eigen::Index n = x.values.rows();
  if (n < 2) throw TooFewRows("need at least 2 rows, have " + std::to_string(n));

  std::vector<Eigen::Index> keep;
  Standardized<Scalar> out;
  for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
    const auto col = x.values.col(j);
    if ((col.array() == col(0)).all()) {
      out.dropped_cols.push_back(x.col_labels[static_cast<std::size_t>(j)]);
    } else {
      keep.push_back(j);
    }
  }

  const auto k = static_cast<Eigen::Index>(keep.size());
  out.y.row_labels = x.row_labels;
  out.y.row_groups = x.row_groups;
  out.y.dropped_rows = x.dropped_rows;
  out.y.dropped_cols = x.dropped_cols;
  out.y.values.resize(n, k);
  out.means.resize(k);
  out.stddevs.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto col = x.values.col(keep[static_cast<std::size_t>(c)]);
    const Scalar mean = col.mean();
    const Scalar s = sample_stddev(col);
    out.means(c) = mean;
    out.stddevs(c) = s;
    out.y.values.col(c) = (col.array() - mean) / s;
    out.y.col_labels.push_back(x.col_labels[static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])]);
  }
  return out;
}

template <typename Derived>
typename Derived::Scalar max_off_diagonal(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) worst = std::max(worst, std::abs(a(i, j)));
    }
  }
  return worst;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps visit
/// every (p, q), p < q, in row order until all off-diagonal magnitudes are
/// <= `tolerance`. Throws NoConvergence after `max_sweeps`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(
    const Eigen::MatrixBase<Derived>& symmetric,
    typename Derived::Scalar tolerance = static_cast<typename Derived::Scalar>(kJacobiTolerance),
    int max_sweeps = kJacobiMaxSweeps) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> a = symmetric;
  const Eigen::Index n = a.rows();
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);

  SymmetricEigen<Scalar> out;
  Scalar residual = max_off_diagonal(a);
  while (residual > tolerance) {
    if (out.sweeps == max_sweeps) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "Jacobi did not converge in %d sweeps (residual %.3e)",
                    max_sweeps, static_cast<double>(residual));
      throw NoConvergence(buf);
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        // Rotation angle chosen so the rotated (p, q) entry vanishes.
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++out.sweeps;
    residual = max_off_diagonal(a);
  }
  out.values = a.diagonal();
  out.vectors = std::move(v);
  out.residual = residual;
  return out;
}

/// Flips `column` so its largest-magnitude entry is positive; near-ties go
/// to the lowest index.
template <typename Derived>
void apply_sign_convention(Eigen::MatrixBase<Derived>&& column) {
  using Scalar = typename Derived::Scalar;
  Eigen::Index lead = 0;
  for (Eigen::Index i = 1; i < column.size(); ++i) {
    if (std::abs(column(i)) > std::abs(column(lead)) + static_cast<Scalar>(kSignTieTolerance)) {
      lead = i;
    }
  }
  if (column.size() > 0 && column(lead) < Scalar(0)) column = -column;
}

template <typename Scalar>
PcaModel<Scalar> fit_pca(const Standardized<Scalar>& st) {
  const Matrix<Scalar>& y = st.y.values;
  const Eigen::Index n = y.rows();
  const Eigen::Index k = y.cols();
  if (n < 2) throw TooFewRows("need at least 2 rows, have " + std::to_string(n));
  if (k < 1) throw TooFewRows("no metric with nonzero variance remains");

  const Matrix<Scalar> corr = (y.transpose() * y) / static_cast<Scalar>(n - 1);
  const SymmetricEigen<Scalar> eig = jacobi_eigen(corr);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eig.values(a) > eig.values(b);
  });

  PcaModel<Scalar> m;
  m.row_labels = st.y.row_labels;
  m.row_groups = st.y.row_groups;
  m.col_labels = st.y.col_labels;
  m.means = st.means;
  m.stddevs = st.stddevs;
  m.dropped_cols = st.y.dropped_cols;
  m.dropped_cols.insert(m.dropped_cols.end(), st.dropped_cols.begin(), st.dropped_cols.end());
  m.dropped_rows = st.y.dropped_rows;
  m.sweeps = eig.sweeps;
  m.loadings.resize(k, k);
  m.eigenvalues.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    // The correlation matrix is positive semidefinite; negatives are roundoff.
    m.eigenvalues(j) = std::max(eig.values(src), Scalar(0));
    m.loadings.col(j) = eig.vectors.col(src);
    apply_sign_convention(m.loadings.col(j));
  }
  m.explained_ratio = m.eigenvalues / m.eigenvalues.sum();
  m.scores = y * m.loadings;
  return m;
}

/// standardize + fit_pca.
template <typename Scalar>
PcaModel<Scalar> fit_pca(const DataMatrix<Scalar>& x) {
  return fit_pca(standardize(x));
}

template <typename Scalar = double>
struct LoadingEntry {
  std::string metric;
  Scalar loading;
};

template <typename Scalar = double>
struct LoadingSection {
  int component = 0;  // 1-based
  std::vector<LoadingEntry<Scalar>> rows;  // by |loading| descending
};

/// Signed, three decimals: "+0.378", "-0.029".
template <typename Scalar>
std::string format_loading(Scalar value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f", static_cast<double>(value));
  return buf;
}

template <typename Scalar>
std::vector<LoadingSection<Scalar>> loading_table(const PcaModel<Scalar>& m, int n_components) {
  if (n_components < 0 || n_components > m.components()) {
    throw IndexOutOfRange("requested " + std::to_string(n_components) + " components of " +
                          std::to_string(m.components()));
  }
  std::vector<LoadingSection<Scalar>> out;
  for (int c = 0; c < n_components; ++c) {
    LoadingSection<Scalar> sec;
    sec.component = c + 1;
    for (Eigen::Index i = 0; i < m.loadings.rows(); ++i) {
      sec.rows.push_back({m.col_labels[static_cast<std::size_t>(i)], m.loadings(i, c)});
    }
    std::stable_sort(sec.rows.begin(), sec.rows.end(), [](const auto& a, const auto& b) {
      return std::abs(a.loading) > std::abs(b.loading);
    });
    out.push_back(std::move(sec));
  }
  return out;
}

/// Plain-text rendering of loading_table: one block per component.
template <typename Scalar>
std::string render_loading_table(const std::vector<LoadingSection<Scalar>>& sections) {
  std::string out;
  for (const auto& sec : sections) {
    std::size_t width = 6;
    for (const auto& r : sec.rows) width = std::max(width, r.metric.size());
    out += "PC" + std::to_string(sec.component) + "\n";
    for (const auto& r : sec.rows) {
      out += "  " + r.metric + std::string(width - r.metric.size() + 2, ' ') +
             format_loading(r.loading) + "\n";
    }
  }
  return out;
}

template <typename Scalar = double>
struct ScatterPoint {
  std::string label;
  std::string group;
  Scalar x;
  Scalar y;
};

/// One point per retained row: (score on pc_a, score on pc_b), 1-based.
template <typename Scalar>
std::vector<ScatterPoint<Scalar>> scatter_data(const PcaModel<Scalar>& m, int pc_a, int pc_b) {
  for (int pc : {pc_a, pc_b}) {
    if (pc < 1 || pc > m.components()) {
      throw IndexOutOfRange("component " + std::to_string(pc) + " not in 1.." +
                            std::to_string(m.components()));
    }
  }
  std::vector<ScatterPoint<Scalar>> out;
  for (Eigen::Index i = 0; i < m.scores.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    out.push_back({m.row_labels[r], r < m.row_groups.size() ? m.row_groups[r] : std::string{},
                   m.scores(i, pc_a - 1), m.scores(i, pc_b - 1)});
  }
  return out;
}

template <typename Scalar>
Scalar cumulative_variance(const PcaModel<Scalar>& m, int n) {
  if (n < 0 || n > m.components()) {
    throw IndexOutOfRange("requested " + std::to_string(n) + " components of " +
                          std::to_string(m.components()));
  }
  return m.explained_ratio.head(n).sum();
}

}  // namespace wasubench::pca
