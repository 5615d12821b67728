// Rank criteria at an order-1 CR singular point and the induced stratum
// labels.
//
//   transversality: the 2(n-m+1) x m real matrix dS(0) has full row rank,
//   Webster class:  rank over R of the 2(n-m+1) x 2 matrix with row pairs
//                   (2 Im gamma_u, beta_u - 2 Re gamma_u;
//                    beta_u + 2 Re gamma_u, 2 Im gamma_u),
//   Coffman class:  rank over C of the (n-m+1) x 2 matrix with rows
//                   (beta_u, gamma_u).
//
// A Coffman-rank-2 record can be reduced, by an explicit linear change of
// the normal coordinates plus re-extraction, to the pattern
//   beta_m = ... = beta_{n-1} = gamma_m = ... = gamma_{n-2} = gamma_n = 0,
//   beta_n = gamma_{n-1} = 1, eps_{n-1}^s = 0,
// after which the second nondegeneracy condition asks the 2(n-m) x (m-2)
// real matrix of (Re eps_u^s, Im eps_u^s), u != n-1, for full row rank.
#pragma once

#include <crsing/defining_system.hpp>
#include <crsing/fixtures.hpp>

#include <optional>
#include <string>

namespace crsing {

struct ClassifyError : EmbeddingError {
  explicit ClassifyError(const std::string& msg) : EmbeddingError(msg) {}
};

// --- displays ----------------------------------------------------------------

inline Eigen::MatrixXd webster_matrix(const PreNormalForm& nf) {
  const int ell = nf.normal_count();
  Eigen::MatrixXd W(2 * ell, 2);
  for (int i = 0; i < ell; ++i) {
    const double beta = nf.beta_u[i];
    const Complex g = nf.gamma_u[i];
    W(2 * i, 0) = 2.0 * g.imag();
    W(2 * i, 1) = beta - 2.0 * g.real();
    W(2 * i + 1, 0) = beta + 2.0 * g.real();
    W(2 * i + 1, 1) = 2.0 * g.imag();
  }
  return W;
}

inline Eigen::MatrixXcd coffman_matrix(const PreNormalForm& nf) {
  const int ell = nf.normal_count();
  Eigen::MatrixXcd C(ell, 2);
  for (int i = 0; i < ell; ++i) {
    C(i, 0) = nf.beta_u[i];
    C(i, 1) = nf.gamma_u[i];
  }
  return C;
}

// Second-order Gauss map value at the basepoint, before any perturbation.
inline Eigen::MatrixXd psi_base_matrix(const PreNormalForm& nf) {
  const int ell = nf.normal_count();
  Eigen::MatrixXd P(2 * ell, 2);
  for (int i = 0; i < ell; ++i) {
    const double beta = nf.beta_u[i];
    const Complex g = nf.gamma_u[i];
    P(2 * i, 0) = 2.0 * g.imag();
    P(2 * i, 1) = beta + 2.0 * g.real();
    P(2 * i + 1, 0) = beta - 2.0 * g.real();
    P(2 * i + 1, 1) = 2.0 * g.imag();
  }
  return P;
}

// --- rank tests ---------------------------------------------------------------

struct TransversalityResult {
  bool transversal = false;
  bool achievable = true;  // false when 2(n-m+1) > m
  RankResult rank;
};

inline TransversalityResult transversality_test(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  TransversalityResult r;
  const int required = 2 * nf.normal_count();
  r.achievable = required <= nf.m;
  r.rank = numerical_rank(singular_set_jacobian(nf), tol_rel);
  r.transversal = r.achievable && r.rank.rank == required;
  return r;
}

struct ClassDecision {
  int cls = 0;
  RankResult rank;
};

inline ClassDecision webster_class(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  const Eigen::MatrixXd W = webster_matrix(nf);
  ClassDecision d;
  if (W.norm() == 0.0) {
    d.cls = 0;
    d.rank = RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    return d;
  }
  d.rank = numerical_rank(W, tol_rel);
  d.cls = d.rank.rank;
  return d;
}

inline ClassDecision coffman_class(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  const Eigen::MatrixXcd C = coffman_matrix(nf);
  ClassDecision d;
  if (C.norm() == 0.0) {
    d.cls = 0;
    d.rank = RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    return d;
  }
  d.rank = numerical_rank(C, tol_rel);
  d.cls = d.rank.rank;
  return d;
}

// --- dual-route projection matrices (jet route) --------------------------------

// The projection of the complex tangent line into the normal space of the
// locus, computed from the defining jets and the kernel field rather than
// from the display formulas. Rows pair (V B_u, Vbar B_u) at 0; real rank
// recovers the Webster class, complex rank the Coffman class.
inline Eigen::MatrixXcd pi_complex_from_jets(const PreNormalForm& nf) {
  const DefiningSystem d = defining_system(nf);
  const KernelField V = kernel_field(nf);
  const KernelField Vb = V.conjugated();
  const int ell = nf.normal_count();
  Eigen::MatrixXcd P(ell, 2);
  for (int u = nf.m; u <= nf.n; ++u) {
    const Jet vb = V.apply(d.B[u - nf.m]);
    const Jet vbb = Vb.apply(d.B[u - nf.m]);
    P(u - nf.m, 0) = vb.coeff_id(0);
    P(u - nf.m, 1) = vbb.coeff_id(0);
  }
  return P;
}

inline Eigen::MatrixXd pi_real_from_jets(const PreNormalForm& nf) {
  const Eigen::MatrixXcd P = pi_complex_from_jets(nf);
  // columns of the real projection: images of Re V and Im V; the normal
  // space carries the complex coordinates B_u.
  const int ell = nf.normal_count();
  Eigen::MatrixXd R(2 * ell, 2);
  for (int i = 0; i < ell; ++i) {
    const Complex re_img = 0.5 * (P(i, 0) + P(i, 1));
    const Complex im_img = Complex(0.0, -0.5) * (P(i, 0) - P(i, 1));
    R(2 * i, 0) = re_img.real();
    R(2 * i + 1, 0) = re_img.imag();
    R(2 * i, 1) = im_img.real();
    R(2 * i + 1, 1) = im_img.imag();
  }
  return R;
}

// --- helpers: run the pipeline on a synthesized record -------------------------

namespace detail {

inline SingularPoint singular_point_at_origin(const EmbeddingMap& f, double tol_rel = kDefaultRankTol) {
  SingularPoint p;
  p.location = Eigen::VectorXd::Zero(f.m);
  std::vector<double> zero(f.m, 0.0);
  p.order = cr_order(f, zero, tol_rel);
  if (p.order < 1) throw ClassifyError("expected a CR singular point at the origin");
  const Eigen::MatrixXcd A = gauss_map(f, zero).matrix;
  p.kernel_vector = kernel_direction(A);
  p.residual = smallest_singular_value(A);
  return p;
}

// Graph form of a chart map already in graph position at 0 (identity frame).
inline GraphForm graph_form_in_place(const EmbeddingMap& f, int order = 3) {
  GraphForm g;
  g.m = f.m;
  g.n = f.n;
  g.order = order;
  g.adapted = f;
  g.frame.linear = Eigen::MatrixXcd::Identity(f.n, f.n);
  g.frame.target_shift = Eigen::VectorXcd::Zero(f.n);
  g.frame.source_linear = Eigen::MatrixXd::Identity(f.m, f.m);
  g.frame.base_shift = Eigen::VectorXd::Zero(f.m);
  regraph(g);
  return g;
}

// Apply an ambient op to a graph form and re-run both normalization passes.
inline GraphForm renormalize_after(GraphForm g, const AmbientOp& op) {
  g.adapted = apply_ambient(op, g.adapted);
  g.trail.push_back(op);
  regraph(g);
  return normalize_cubic(normalize_quadratic(std::move(g)));
}

}  // namespace detail

// --- Coffman reduction ----------------------------------------------------------

struct ReducedRecord {
  PreNormalForm nf;
  GraphForm graph;
};

// Explicit linear change of the normal coordinates (plus a tangent shear and
// re-extraction) realizing the reduced pattern on a Coffman-rank-2 record.
inline ReducedRecord coffman_reduction(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  const int m = nf.m, n = nf.n, ell = nf.normal_count();
  const ClassDecision cc = coffman_class(nf, tol_rel);
  if (cc.cls != 2) throw ClassifyError("coffman_reduction: record has class " + std::to_string(cc.cls) + ", need 2");

  const Eigen::MatrixXcd B2 = coffman_matrix(nf);

  // Rows of the normal mixing: two rows hitting (0,1) and (1,0), the rest a
  // basis of the left null space of the (beta, gamma) rows.
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(ell, ell);
  {
    const Eigen::MatrixXcd Bt = B2.transpose();  // 2 x ell
    auto solve_row = [&](Complex t0, Complex t1) {
      Eigen::VectorXcd t(2);
      t << t0, t1;
      return Bt.completeOrthogonalDecomposition().solve(t).eval();
    };
    const Eigen::VectorXcd row_n = solve_row(1.0, 0.0);       // beta slot
    const Eigen::VectorXcd row_n1 = solve_row(0.0, 1.0);      // gamma slot
    Eigen::MatrixXcd nullrows;
    if (ell > 2) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Bt, Eigen::ComputeFullV);
      nullrows = svd.matrixV().rightCols(ell - 2);
    }
    for (int r = 0; r + 2 < ell; ++r) L.row(r) = nullrows.col(r).transpose();
    L.row(ell - 2) = row_n1.transpose();
    L.row(ell - 1) = row_n.transpose();
    const RankResult lr = numerical_rank(L, tol_rel);
    if (lr.rank < ell) throw ClassifyError("coffman_reduction: singular normal mixing");
  }

  AmbientOp mix;
  mix.kind = AmbientOp::Kind::Linear;
  mix.linear = Eigen::MatrixXcd::Identity(n, n);
  mix.linear.block(m - 1, m - 1, ell, ell) = L;

  GraphForm g = detail::graph_form_in_place(synthesize_embedding(nf));
  g = detail::renormalize_after(std::move(g), mix);
  PreNormalForm r1 = extract_coefficients(g);

  // Tangent absorption of the z1bar x_s terms in the gamma-normalized row:
  // z1 -> z1 + sum_s conj(eps_{n-1}^s)/2 z_s.
  if (m > 2) {
    AmbientOp shear;
    shear.kind = AmbientOp::Kind::Linear;
    shear.linear = Eigen::MatrixXcd::Identity(n, n);
    bool any = false;
    for (int s = 2; s <= m - 1; ++s) {
      const Complex e = r1.eps_u_s[ell - 2][s - 2];
      if (std::abs(e) > kNormalizationTol) {
        shear.linear(0, s - 1) = std::conj(e) / 2.0;
        any = true;
      }
    }
    if (any) {
      g = detail::renormalize_after(std::move(g), shear);
      r1 = extract_coefficients(g);
    }
  }

  // Validate the reduced pattern.
  double worst = 0.0;
  for (int u = m; u <= n - 1; ++u) worst = std::max(worst, std::abs(r1.beta_u[u - m]));
  for (int u = m; u <= n; ++u)
    if (u != n - 1) worst = std::max(worst, std::abs(r1.gamma_u[u - m]));
  worst = std::max(worst, std::abs(r1.beta_u[ell - 1] - 1.0));
  worst = std::max(worst, std::abs(r1.gamma_u[ell - 2] - 1.0));
  for (int s = 2; s <= m - 1; ++s) worst = std::max(worst, std::abs(r1.eps_u_s[ell - 2][s - 2]));
  if (worst > 1e-8)
    throw ClassifyError("coffman_reduction: reduced pattern violated (residual " + std::to_string(worst) + ")");

  return ReducedRecord{std::move(r1), std::move(g)};
}

// --- second nondegeneracy --------------------------------------------------------

struct SecondNondegeneracy {
  bool holds = false;
  bool achievable = true;  // false when 2(n-m) > m-2
  RankResult rank;
};

inline Eigen::MatrixXd second_nondegeneracy_matrix(const PreNormalForm& reduced) {
  const int m = reduced.m, n = reduced.n;
  Eigen::MatrixXd E(2 * (n - m), std::max(0, m - 2));
  int row = 0;
  for (int u = m; u <= n; ++u) {
    if (u == n - 1) continue;
    for (int s = 2; s <= m - 1; ++s) {
      E(row, s - 2) = reduced.eps_u_s[u - m][s - 2].real();
      E(row + 1, s - 2) = reduced.eps_u_s[u - m][s - 2].imag();
    }
    row += 2;
  }
  return E;
}

inline SecondNondegeneracy second_nondegeneracy(const PreNormalForm& reduced, double tol_rel = kDefaultRankTol) {
  const int m = reduced.m, n = reduced.n, ell = reduced.normal_count();
  // the reduced pattern is a precondition
  double worst = 0.0;
  for (int u = m; u <= n - 1; ++u) worst = std::max(worst, std::abs(reduced.beta_u[u - m]));
  for (int u = m; u <= n; ++u)
    if (u != n - 1) worst = std::max(worst, std::abs(reduced.gamma_u[u - m]));
  worst = std::max(worst, std::abs(reduced.beta_u[ell - 1] - 1.0));
  worst = std::max(worst, std::abs(reduced.gamma_u[ell - 2] - 1.0));
  if (worst > 1e-6) throw ClassifyError("second_nondegeneracy: record is not in reduced form");

  SecondNondegeneracy r;
  const int required = 2 * (n - m);
  r.achievable = required <= m - 2;
  if (required == 0) {
    // no constraint rows; vacuously nondegenerate
    r.holds = true;
    r.rank = RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    return r;
  }
  const Eigen::MatrixXd E = second_nondegeneracy_matrix(reduced);
  if (E.size() == 0 || E.norm() == 0.0) {
    r.holds = false;
    r.rank = RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    return r;
  }
  r.rank = numerical_rank(E, tol_rel);
  r.holds = r.achievable && r.rank.rank == required;
  return r;
}

// --- the C1 system ----------------------------------------------------------------

struct C1System {
  PreNormalForm normalized;            // (beta_m, gamma_m) != 0, rows above m cleared
  std::vector<Complex> tilde_beta;     // j = m+1..n at index j-m-1
  std::vector<Complex> tilde_gamma;
  std::vector<std::vector<Complex>> tilde_eps;  // [j-m-1][s-2]
  Eigen::MatrixXd dC_matrix;           // (4n-4m+2) x m
  bool psi_transversal = false;
  bool achievable = true;              // false when 4n-4m+2 > m
  RankResult rank;
};

inline C1System c1_system(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  const int m = nf.m, n = nf.n, ell = nf.normal_count();
  const ClassDecision cc = coffman_class(nf, tol_rel);
  if (cc.cls != 1) throw ClassifyError("c1_system: record has class " + std::to_string(cc.cls) + ", need 1");

  // Normalization: swap the strongest (beta, gamma) row into slot m, then
  // clear the proportional rows above it.
  int pivot = 0;
  double best = -1.0;
  for (int i = 0; i < ell; ++i) {
    const double w = std::hypot(nf.beta_u[i], std::abs(nf.gamma_u[i]));
    if (w > best) {
      best = w;
      pivot = i;
    }
  }
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(ell, ell);
  if (pivot != 0) {
    L(0, 0) = 0.0;
    L(pivot, pivot) = 0.0;
    L(0, pivot) = 1.0;
    L(pivot, 0) = 1.0;
  }
  const Eigen::MatrixXcd B2 = L * coffman_matrix(nf);
  const Complex norm_sq = B2(0, 0) * std::conj(B2(0, 0)) + B2(0, 1) * std::conj(B2(0, 1));
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(ell, ell);
  for (int j = 1; j < ell; ++j) {
    const Complex lam = (B2(j, 0) * std::conj(B2(0, 0)) + B2(j, 1) * std::conj(B2(0, 1))) / norm_sq;
    S(j, 0) = -lam;
  }

  AmbientOp mix;
  mix.kind = AmbientOp::Kind::Linear;
  mix.linear = Eigen::MatrixXcd::Identity(n, n);
  mix.linear.block(m - 1, m - 1, ell, ell) = S * L;

  GraphForm g = detail::graph_form_in_place(synthesize_embedding(nf));
  g = detail::renormalize_after(std::move(g), mix);
  PreNormalForm r1 = extract_coefficients(g);

  const double scale = std::max(1.0, r1.max_abs());
  for (int j = m + 1; j <= n; ++j) {
    const double res = std::hypot(r1.beta_u[j - m], std::abs(r1.gamma_u[j - m]));
    if (res > 1e-6 * scale)
      throw ClassifyError("c1_system: class-1 normalization left residue " + std::to_string(res));
  }

  C1System sys;
  sys.normalized = r1;
  const DefiningSystem d = defining_system(r1);
  const KernelField V = kernel_field(r1);
  const KernelField Vb = V.conjugated();

  std::vector<Jet> VB(ell), VbB(ell);
  for (int i = 0; i < ell; ++i) {
    VB[i] = V.apply(d.B[i]);
    VbB[i] = Vb.apply(d.B[i]);
  }

  sys.dC_matrix.resize(4 * (n - m) + 2, m);
  auto fill_rows = [&](int row, const Jet& Bj) {
    for (int k = 0; k < m; ++k) {
      std::vector<int> mi(m, 0);
      mi[k] = 1;
      const Complex c = Bj.coeff(mi);
      sys.dC_matrix(row, k) = c.real();
      sys.dC_matrix(row + 1, k) = c.imag();
    }
  };
  for (int i = 0; i < ell; ++i) fill_rows(2 * i, d.B[i]);

  sys.tilde_beta.assign(ell - 1, Complex(0.0));
  sys.tilde_gamma.assign(ell - 1, Complex(0.0));
  sys.tilde_eps.assign(ell - 1, std::vector<Complex>(std::max(0, m - 2), Complex(0.0)));
  for (int j = m + 1; j <= n; ++j) {
    const int i = j - m;
    Jet Btilde = VB[0] * VbB[i] - VbB[0] * VB[i];
    Btilde = Btilde.truncated(1);
    const Jet zb = to_zbar_basis(Btilde);
    sys.tilde_beta[i - 1] = zb.coeff(detail::zb_index(m, 1, 0));
    sys.tilde_gamma[i - 1] = 0.5 * zb.coeff(detail::zb_index(m, 0, 1));
    for (int s = 2; s <= m - 1; ++s) sys.tilde_eps[i - 1][s - 2] = zb.coeff(detail::zb_index(m, 0, 0, {{s, 1}}));
    fill_rows(2 * ell + 2 * (i - 1), Btilde);
  }

  const int required = 4 * (n - m) + 2;
  sys.achievable = required <= m;
  if (sys.dC_matrix.norm() == 0.0) {
    sys.rank = RankResult{0, 0.0, 0.0, 0.0, tol_rel};
    sys.psi_transversal = false;
    return sys;
  }
  sys.rank = numerical_rank(sys.dC_matrix, tol_rel);
  sys.psi_transversal = sys.achievable && sys.rank.rank == required;
  return sys;
}

// --- expected stratum dimensions ----------------------------------------------

struct ExpectedDims {
  int m = 0, n = 0;
  std::vector<int> dim_S_nu;  // index nu-1; negative means empty
  int dim_W0 = 0, dim_W1 = 0, dim_C1 = 0;
  std::string case_label;     // set only in the n = floor(5m/4) regime
};

inline ExpectedDims expected_dimensions(int m, int n) {
  if (m < 1 || n < m) throw ClassifyError("expected_dimensions: need 1 <= m <= n");
  ExpectedDims d;
  d.m = m;
  d.n = n;
  for (int nu = 1; nu <= m / 2; ++nu) d.dim_S_nu.push_back(m - 2 * nu * (n - m + nu));
  d.dim_W0 = 7 * m - 6 * n - 6;
  d.dim_W1 = 5 * m - 4 * n - 3;
  d.dim_C1 = 5 * m - 4 * n - 2;
  if (n == (5 * m) / 4) {
    switch (m % 4) {
      case 0:
      case 1:
        d.case_label = "m=" + std::to_string(m % 4) + " (mod 4): S = C2";
        break;
      case 2:
        d.case_label = "m=2 (mod 4): S = C2 u C1, dim C1 = 0";
        break;
      default:
        d.case_label = "m=3 (mod 4): S = C2 u (C1&W2) u (C1&W1), dim C1 = 1, dim W1 = 0";
        break;
    }
  }
  return d;
}

// --- per-point report -----------------------------------------------------------

struct ClassificationReport {
  TransversalityResult transversal;
  ClassDecision webster;
  ClassDecision coffman;
  std::optional<SecondNondegeneracy> coffman_second;  // populated when coffman class is 2
  Eigen::MatrixXd psi_matrix;
  std::optional<int> local_dim;
  ExpectedDims expected;
  bool any_indeterminate = false;
};

inline ClassificationReport classify_point(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  ClassificationReport rep;
  rep.transversal = transversality_test(nf, tol_rel);
  rep.webster = webster_class(nf, tol_rel);
  rep.coffman = coffman_class(nf, tol_rel);
  rep.psi_matrix = psi_base_matrix(nf);
  rep.local_dim = local_dimension_estimate(nf, tol_rel);
  rep.expected = expected_dimensions(nf.m, nf.n);
  if (rep.coffman.cls == 2 && !rep.coffman.rank.indeterminate()) {
    ReducedRecord red = coffman_reduction(nf, tol_rel);
    rep.coffman_second = second_nondegeneracy(red.nf, tol_rel);
  }
  rep.any_indeterminate = rep.transversal.rank.indeterminate() || rep.webster.rank.indeterminate() ||
                          rep.coffman.rank.indeterminate() ||
                          (rep.coffman_second && rep.coffman_second->rank.indeterminate());
  return rep;
}

}  // namespace crsing
