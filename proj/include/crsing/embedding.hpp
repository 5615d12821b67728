// Chart embeddings R^m -> C^n with polynomial components, their complexified
// differentials, and the CR order of a point.
//
// The real 2n x m Jacobian interleaves (Re f_j, Im f_j) row pairs; combining
// each pair as a + i c yields the n x m complex matrix whose rank drop below
// m detects CR singularities.
#pragma once

#include <crsing/linalg.hpp>
#include <crsing/polynomial.hpp>

#include <optional>
#include <string>
#include <vector>

namespace crsing {

struct EmbeddingError : std::runtime_error {
  explicit EmbeddingError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NotImmersionError : EmbeddingError {
  explicit NotImmersionError(const std::string& msg) : EmbeddingError(msg) {}
};

struct EmbeddingMap {
  int m = 0;  // source dimension
  int n = 0;  // target complex dimension
  std::vector<Polynomial> comp;
  std::string label;

  EmbeddingMap() = default;
  EmbeddingMap(int m_, int n_) : m(m_), n(n_), comp(n_, Polynomial(m_)) {
    if (m_ < 1 || n_ < m_) throw EmbeddingError("embedding: need 1 <= m <= n");
  }

  void check() const {
    if (static_cast<int>(comp.size()) != n) throw EmbeddingError("embedding: component count != n");
    for (const auto& p : comp)
      if (p.num_vars() != m) throw EmbeddingError("embedding: component arity != m");
  }

  Eigen::VectorXcd eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != m) throw EmbeddingError("embedding eval: dimension mismatch");
    Eigen::VectorXcd v(n);
    for (int j = 0; j < n; ++j) v(j) = comp[j].eval(x);
    return v;
  }
};

// Interleaved-row complexification: row pair (a-row, c-row) -> a + i c.
inline Eigen::MatrixXcd complexify(const Eigen::MatrixXd& J_real) {
  if (J_real.rows() % 2 != 0) throw EmbeddingError("complexify: odd row count");
  const Eigen::Index n = J_real.rows() / 2;
  Eigen::MatrixXcd M(n, J_real.cols());
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < J_real.cols(); ++k)
      M(j, k) = Complex(J_real(2 * j, k), J_real(2 * j + 1, k));
  return M;
}

inline Eigen::MatrixXd real_jacobian(const EmbeddingMap& f, std::span<const double> x) {
  Eigen::MatrixXd J(2 * f.n, f.m);
  for (int j = 0; j < f.n; ++j)
    for (int k = 0; k < f.m; ++k) {
      const Complex d = f.comp[j].derivative(k).eval(x);
      J(2 * j, k) = d.real();
      J(2 * j + 1, k) = d.imag();
    }
  return J;
}

struct ComplexifiedJacobian {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXd basepoint;
};

// Gauss map value: the complexified differential at x.
inline ComplexifiedJacobian gauss_map(const EmbeddingMap& f, std::span<const double> x) {
  ComplexifiedJacobian g;
  g.matrix.resize(f.n, f.m);
  for (int j = 0; j < f.n; ++j)
    for (int k = 0; k < f.m; ++k) g.matrix(j, k) = f.comp[j].derivative(k).eval(x);
  g.basepoint = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  return g;
}

// Derivative of the complexified differential in the source direction k.
inline Eigen::MatrixXcd gauss_map_derivative(const EmbeddingMap& f, std::span<const double> x, int k) {
  Eigen::MatrixXcd D(f.n, f.m);
  for (int j = 0; j < f.n; ++j)
    for (int i = 0; i < f.m; ++i) D(j, i) = f.comp[j].derivative(i).derivative(k).eval(x);
  return D;
}

// nu = m - rank_C(df_C) at an immersion point; non-immersion points are an
// explicit error, never order m.
inline int cr_order(const EmbeddingMap& f, std::span<const double> x, double tol_rel = kDefaultRankTol) {
  const Eigen::MatrixXd J = real_jacobian(f, x);
  const RankResult rr = numerical_rank(J, tol_rel);
  if (rr.rank < f.m)
    throw NotImmersionError("cr_order: real rank " + std::to_string(rr.rank) + " < m at the given point");
  const RankResult rc = numerical_rank(complexify(J), tol_rel);
  return f.m - rc.rank;
}

}  // namespace crsing
