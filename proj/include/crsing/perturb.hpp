// Degeneracy-repairing perturbations.
//
// The quadratic family acts on adapted coordinates by
//   z_u -> z_u + b_u |z1|^2 + c_u z1bar^2,  u = m..n,
// and moves the second-order Gauss map value to
//   rows (2 Im g_u + Im b_u + 2 Im c_u,  beta_u + 2 Re g_u + Re b_u - 2 Re c_u;
//         beta_u - 2 Re g_u + Re b_u + 2 Re c_u,  2 Im g_u - Im b_u + 2 Im c_u).
// The (b, c) -> matrix map is onto, so any target value is reachable by an
// explicit linear solve.
//
// Tangent steering perturbs single entries in the last column of the
// linearized degenerate-locus system and reads the displacement of its
// kernel line off the generalized cross product of the rows.
#pragma once

#include <crsing/classify.hpp>

namespace crsing {

struct PerturbError : EmbeddingError {
  explicit PerturbError(const std::string& msg) : EmbeddingError(msg) {}
};

struct QuadPerturbation {
  Eigen::VectorXcd b, c;  // length n-m+1, indices u = m..n
  std::optional<double> cutoff_radius;
};

inline Eigen::MatrixXd psi_matrix(const PreNormalForm& nf, const QuadPerturbation& q) {
  const int ell = nf.normal_count();
  if (q.b.size() != ell || q.c.size() != ell) throw PerturbError("psi_matrix: (b,c) length must be n-m+1");
  Eigen::MatrixXd P = psi_base_matrix(nf);
  for (int i = 0; i < ell; ++i) {
    P(2 * i, 0) += q.b(i).imag() + 2.0 * q.c(i).imag();
    P(2 * i, 1) += q.b(i).real() - 2.0 * q.c(i).real();
    P(2 * i + 1, 0) += q.b(i).real() + 2.0 * q.c(i).real();
    P(2 * i + 1, 1) += -q.b(i).imag() + 2.0 * q.c(i).imag();
  }
  return P;
}

// Exact (b, c) with psi_matrix(nf, q) equal to the target; the row-pair
// system decouples per normal index.
inline QuadPerturbation solve_psi_target(const PreNormalForm& nf, const Eigen::MatrixXd& target) {
  const int ell = nf.normal_count();
  if (target.rows() != 2 * ell || target.cols() != 2) throw PerturbError("solve_psi_target: bad target shape");
  const Eigen::MatrixXd base = psi_base_matrix(nf);
  QuadPerturbation q;
  q.b.resize(ell);
  q.c.resize(ell);
  for (int i = 0; i < ell; ++i) {
    const double p = target(2 * i, 0) - base(2 * i, 0);
    const double qq = target(2 * i + 1, 1) - base(2 * i + 1, 1);
    const double r = target(2 * i, 1) - base(2 * i, 1);
    const double s = target(2 * i + 1, 0) - base(2 * i + 1, 0);
    q.b(i) = Complex((r + s) / 2.0, (p - qq) / 2.0);
    q.c(i) = Complex((s - r) / 4.0, (p + qq) / 4.0);
  }
  return q;
}

// Smallest perturbation reaching the requested rank of the second-order
// Gauss map value, with margin >= epsilon/10.
enum class RepairTarget { WebsterRank2, CoffmanRank2 };

inline QuadPerturbation solve_nondegenerate_bc(const PreNormalForm& nf, RepairTarget target, double epsilon,
                                               double tol_rel = kDefaultRankTol) {
  const int ell = nf.normal_count();
  if (epsilon < 10.0 * tol_rel) throw PerturbError("solve_nondegenerate_bc: epsilon below 10x rank tolerance");

  QuadPerturbation zero;
  zero.b = Eigen::VectorXcd::Zero(ell);
  zero.c = Eigen::VectorXcd::Zero(ell);

  if (target == RepairTarget::WebsterRank2) {
    const Eigen::MatrixXd base = psi_base_matrix(nf);
    if (base.norm() > 0.0) {
      const RankResult rr = numerical_rank(base, tol_rel);
      if (rr.rank == 2 && rr.margin >= epsilon / 10.0) return zero;
    }
    // bump the first row pair towards an epsilon/2-scaled identity block
    Eigen::MatrixXd T = base;
    T(0, 0) += epsilon / 2.0;
    T(1, 1) += epsilon / 2.0;
    QuadPerturbation q = solve_psi_target(nf, T);
    RankResult rr = numerical_rank(psi_matrix(nf, q), tol_rel);
    if (rr.rank == 2 && rr.margin >= epsilon / 10.0) return q;
    // replace the first pair outright
    T = base;
    T.row(0) << epsilon / 2.0, 0.0;
    T.row(1) << 0.0, epsilon / 2.0;
    q = solve_psi_target(nf, T);
    rr = numerical_rank(psi_matrix(nf, q), tol_rel);
    if (rr.rank != 2 || rr.margin < epsilon / 10.0)
      throw PerturbError("solve_nondegenerate_bc: failed to reach Webster rank 2");
    return q;
  }

  // Coffman repair: the perturbation adds (b_u, c_u) to the (beta_u, gamma_u)
  // rows, so two rows can be pushed to an epsilon/2-scaled identity block.
  Eigen::MatrixXcd C = coffman_matrix(nf);
  {
    const RankResult rr = C.norm() > 0.0 ? numerical_rank(C, tol_rel) : RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    if (rr.rank == 2 && rr.margin >= epsilon / 10.0) return zero;
  }
  if (ell < 2) throw PerturbError("solve_nondegenerate_bc: Coffman rank 2 needs n > m");
  QuadPerturbation q = zero;
  q.b(0) = Complex(epsilon / 2.0, 0.0) - C(0, 0);
  q.c(0) = -C(0, 1);
  q.b(1) = -C(1, 0);
  q.c(1) = Complex(epsilon / 2.0, 0.0) - C(1, 1);
  Eigen::MatrixXcd C2 = C;
  C2(0, 0) += q.b(0);
  C2(0, 1) += q.c(0);
  C2(1, 0) += q.b(1);
  C2(1, 1) += q.c(1);
  const RankResult rr = numerical_rank(C2, tol_rel);
  if (rr.rank != 2 || rr.margin < epsilon / 10.0)
    throw PerturbError("solve_nondegenerate_bc: failed to reach Coffman rank 2");
  return q;
}

// Compose the perturbation map with an adapted chart map. With a cutoff
// radius the added terms are damped by (1 - |x - p|^2 / r^2)^3, which leaves
// the 3-jet at the basepoint untouched while taming far-field growth.
inline EmbeddingMap apply_quad_perturbation(const EmbeddingMap& f, const Eigen::VectorXd& basepoint,
                                            const QuadPerturbation& q) {
  f.check();
  const int m = f.m, n = f.n, ell = n - f.m + 1;
  if (q.b.size() != ell || q.c.size() != ell) throw PerturbError("apply_quad_perturbation: (b,c) length mismatch");
  if (basepoint.size() != m) throw PerturbError("apply_quad_perturbation: basepoint dimension mismatch");

  const Polynomial z1 = f.comp[0];
  const Polynomial z1b = z1.conjugated();
  const Polynomial abs_sq = z1 * z1b;
  const Polynomial zbar_sq = z1b * z1b;

  Polynomial bump = Polynomial::constant(m, 1.0);
  if (q.cutoff_radius) {
    const double r = *q.cutoff_radius;
    if (!(r > 0.0)) throw PerturbError("apply_quad_perturbation: cutoff radius must be positive");
    Polynomial t(m);
    for (int k = 0; k < m; ++k) {
      Polynomial d = Polynomial::variable(m, k) - Polynomial::constant(m, basepoint(k));
      t += d * d;
    }
    t *= Complex(1.0 / (r * r));
    Polynomial one_minus = Polynomial::constant(m, 1.0) - t;
    bump = one_minus * one_minus * one_minus;
  }

  EmbeddingMap g = f;
  for (int u = f.m; u <= n; ++u) {
    const int i = u - f.m;
    Polynomial add(m);
    if (q.b(i) != Complex(0.0)) add += q.b(i) * abs_sq;
    if (q.c(i) != Complex(0.0)) add += q.c(i) * zbar_sq;
    if (!add.is_zero()) g.comp[u - 1] += bump * add;
  }
  return g;
}

// --- tangent steering -----------------------------------------------------------

// Formal-determinant cross product of m-1 rows in R^m, with the basis
// vectors in the last row: the j-th component is the signed minor obtained
// by deleting column j. Orthogonal to every input row; zero iff the rows
// are dependent.
inline Eigen::VectorXd cross_product(const Eigen::MatrixXd& rows) {
  const int m = static_cast<int>(rows.cols());
  if (m < 2 || rows.rows() != m - 1) throw PerturbError("cross_product: need (m-1) x m input with m >= 2");
  Eigen::VectorXd x(m);
  Eigen::MatrixXd minor(m - 1, m - 1);
  for (int j = 0; j < m; ++j) {
    int col = 0;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      minor.col(col++) = rows.col(k);
    }
    const double det = m == 2 ? minor(0, 0) : minor.determinant();
    x(j) = (((m + 1 + j) % 2) == 0 ? 1.0 : -1.0) * det;
  }
  return x;
}

struct TangentSteer {
  Eigen::MatrixXd R;        // the (m-1) x m input, after any small repair
  int j0 = -1, k0 = -1;     // selected columns (0-based)
  double sigma_j0 = 0.0, sigma_k0 = 0.0;
  Eigen::VectorXd omega_j0, omega_k0;  // tangent displacements
  Eigen::VectorXd tangent;             // cross product of the unperturbed rows
  double independence_margin = 0.0;    // smallest singular value of the 3 x m stack
};

namespace detail {

inline double minor_without(const Eigen::MatrixXd& R, int drop_row, int drop_col_a, int drop_col_b) {
  const int m = static_cast<int>(R.cols());
  Eigen::MatrixXd sub(m - 2, m - 2);
  int r = 0;
  for (int i = 0; i + 1 < m; ++i) {
    if (i == drop_row) continue;
    int c = 0;
    for (int j = 0; j < m; ++j) {
      if (j == drop_col_a || j == drop_col_b) continue;
      sub(r, c++) = R(i, j);
    }
    ++r;
  }
  return sub.determinant();
}

}  // namespace detail

// Column selection and steering displacements for the degenerate-locus
// tangent. Perturbing entry (m-2, m-1) by sigma moves the cross product by a
// vector whose j-th component is sigma times the minor with the last row and
// columns {j, m} removed; entry (m-3, m-1) plays the same role one row up.
// Preconditions: the last row restricted to the first m-1 columns is
// nonzero, and the leading (m-1) x (m-1) minor is nonsingular.
inline TangentSteer steer_tangent(const Eigen::MatrixXd& R_in, double epsilon, double tol_rel = kDefaultRankTol) {
  const int m = static_cast<int>(R_in.cols());
  if (m < 3 || R_in.rows() != m - 1) throw PerturbError("steer_tangent: need (m-1) x m input with m >= 3");
  const double scale = std::max(1.0, R_in.norm());

  if (R_in.row(m - 2).head(m - 1).norm() <= tol_rel * scale)
    throw PerturbError("steer_tangent: last row vanishes on the first m-1 columns");
  {
    const Eigen::MatrixXd lead = R_in.leftCols(m - 1);
    const RankResult rr = numerical_rank(lead, tol_rel);
    if (rr.rank < m - 1) throw PerturbError("steer_tangent: leading (m-1) x (m-1) minor is singular");
  }

  TangentSteer st;
  st.R = R_in;

  // (i): column j0 whose removal (with column m and the last row) leaves a
  // nonsingular minor.
  int j0 = -1;
  double best = 0.0;
  for (int j = 0; j + 1 < m; ++j) {
    const double d = std::abs(detail::minor_without(st.R, m - 2, j, m - 1));
    if (d > best) {
      best = d;
      j0 = j;
    }
  }
  if (j0 < 0 || best <= tol_rel * scale)
    throw PerturbError("steer_tangent: all row-(m-1) steering minors vanish");

  // (ii): column k0 != j0 with the row above removed instead; a tiny bump of
  // the (last row, j0) entry repairs the degenerate tie case.
  auto pick_k0 = [&](const Eigen::MatrixXd& R) {
    int k0 = -1;
    double val = 0.0;
    for (int k = 0; k + 1 < m; ++k) {
      if (k == j0) continue;
      const double d = std::abs(detail::minor_without(R, m - 3, k, m - 1));
      if (d > val) {
        val = d;
        k0 = k;
      }
    }
    return std::make_pair(k0, val);
  };
  auto [k0, val] = pick_k0(st.R);
  if (k0 < 0 || val <= tol_rel * scale) {
    st.R(m - 2, j0) += 1e-6 * scale;
    std::tie(k0, val) = pick_k0(st.R);
    if (k0 < 0 || val <= tol_rel * scale)
      throw PerturbError("steer_tangent: row-(m-2) steering minors vanish even after repair");
  }

  st.j0 = j0;
  st.k0 = k0;
  st.sigma_j0 = epsilon;
  st.sigma_k0 = epsilon;
  st.tangent = cross_product(st.R);

  Eigen::MatrixXd Rj = st.R;
  Rj(m - 2, m - 1) += epsilon;
  st.omega_j0 = cross_product(Rj) - st.tangent;
  Eigen::MatrixXd Rk = st.R;
  Rk(m - 3, m - 1) += epsilon;
  st.omega_k0 = cross_product(Rk) - st.tangent;

  Eigen::MatrixXd stack(3, m);
  stack.row(0) = st.tangent.transpose();
  stack.row(1) = (st.tangent + st.omega_j0).transpose();
  stack.row(2) = (st.tangent + st.omega_k0).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack);
  st.independence_margin = svd.singularValues()(2);
  return st;
}

}  // namespace crsing
