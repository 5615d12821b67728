// Tolerance-based numerical rank with margins, plus the deterministic
// sign/pivot conventions shared by the frame-adaptation code.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <complex>
#include <stdexcept>
#include <string>

namespace crsing {

struct LinalgError : std::runtime_error {
  explicit LinalgError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every rank decision carries its margin (smallest retained singular value)
// and gap (first discarded one) so callers can detect near-degenerate calls.
struct RankResult {
  int rank = 0;
  double margin = 0.0;
  double gap = 0.0;
  double sigma_max = 0.0;
  double tol_rel = 0.0;

  double threshold() const { return tol_rel * sigma_max; }
  // A decision is shaky when the retained/discarded values crowd the
  // threshold within the given factor. A zero matrix is decisively rank 0.
  bool indeterminate(double factor = 10.0) const {
    if (sigma_max == 0.0) return false;
    const double t = threshold();
    if (rank > 0 && margin < factor * t) return true;
    if (gap > t / factor) return true;
    return false;
  }
};

inline constexpr double kDefaultRankTol = 1e-8;

template <typename Derived>
RankResult numerical_rank(const Eigen::MatrixBase<Derived>& M, double tol_rel = kDefaultRankTol) {
  if (M.rows() == 0 || M.cols() == 0) throw LinalgError("numerical_rank: empty matrix");
  if (!(tol_rel > 0.0 && tol_rel < 1.0)) throw LinalgError("numerical_rank: tol_rel must lie in (0,1)");
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(M.derived());
  const auto& sv = svd.singularValues();
  RankResult r;
  r.tol_rel = tol_rel;
  r.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = tol_rel * r.sigma_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  r.rank = rank;
  r.margin = rank > 0 ? sv(rank - 1) : 0.0;
  r.gap = rank < sv.size() ? sv(rank) : 0.0;
  return r;
}

inline double smallest_singular_value(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

// Right singular vector of the smallest singular value, normalized so the
// largest-magnitude entry is exactly 1 (ties resolved by lowest index).
inline Eigen::VectorXcd kernel_direction(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXcd v = svd.matrixV().col(svd.matrixV().cols() - 1);
  Eigen::Index best = 0;
  double best_mag = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best_mag * (1.0 + 1e-12)) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag == 0.0) throw LinalgError("kernel_direction: zero vector");
  return v / v(best);
}

// Orthonormal basis of the orthogonal complement of the column span,
// sign-fixed so each basis vector's largest entry is positive real.
inline Eigen::MatrixXcd orthogonal_complement(const Eigen::MatrixXcd& cols) {
  const Eigen::Index n = cols.rows();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cols, Eigen::ComputeFullU);
  const Eigen::Index r = cols.cols();
  Eigen::MatrixXcd comp = svd.matrixU().rightCols(n - r);
  for (Eigen::Index j = 0; j < comp.cols(); ++j) {
    Eigen::Index best = 0;
    double best_mag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mag = std::abs(comp(i, j));
      if (mag > best_mag * (1.0 + 1e-12)) {
        best_mag = mag;
        best = i;
      }
    }
    const std::complex<double> pivot = comp(best, j);
    if (std::abs(pivot) > 0.0) comp.col(j) *= std::conj(pivot) / std::abs(pivot);
  }
  return comp;
}

}  // namespace crsing
