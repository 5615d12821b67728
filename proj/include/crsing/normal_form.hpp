// Pre-normal form machinery at an order-1 CR singular point.
//
// adapt_frame translates and complex-linearly rotates the chart so that the
// complexified differential at the point takes the block shape with a single
// (1, i) row, an identity block on the remaining tangent directions, and zero
// normal rows. graph_form re-expresses the manifold as a graph
//   y_s = H_s(z1, z1bar, x2..x_{m-1}),  z_u = h_u(z1, z1bar, x2..x_{m-1}),
// and the two normalization passes remove the holomorphically absorbable
// quadratic terms (z1^2, z1 x_t, x_t x_r) and cubic terms (z1^3, z1^2 x_s,
// z1 x_s x_t, x_s x_t x_r) from every graph component, conjugate types
// included for the real-valued H_s. What survives is the coefficient record
// driving all classification:
//   H_s = beta_s |z1|^2 + mu_s z1^2 z1b + conj(mu_s) z1b^2 z1
//         + sum_t lambda_s^t |z1|^2 x_t + O(4)
//   h_u = beta_u |z1|^2 + gamma_u z1b^2 + sum_s eps_u^s z1b x_s
//         + kappa_u z1^2 z1b + theta_u z1 z1b^2 + pi_u z1b^3
//         + sum_s (phi_u^s |z1|^2 x_s + psi_u^s z1b^2 x_s
//                  + sum_t sigma_u^{s,t} z1b x_s x_t) + O(4)
// with beta_s, beta_u, lambda real and the rest complex.
#pragma once

#include <crsing/embedding.hpp>
#include <crsing/locus.hpp>

#include <cmath>
#include <vector>

namespace crsing {

struct NormalFormError : EmbeddingError {
  explicit NormalFormError(const std::string& msg) : EmbeddingError(msg) {}
};
struct OrderMismatch : NormalFormError {
  explicit OrderMismatch(const std::string& msg) : NormalFormError(msg) {}
};

inline constexpr double kNormalizationTol = 1e-10;
inline constexpr double kRealityTol = 1e-12;
inline constexpr double kForbiddenTol = 1e-8;

// Target-side affine change w = linear (z - target_shift) together with the
// source-side affine chart change x = base_shift + source_linear x'.
struct AffineFrame {
  Eigen::MatrixXcd linear;
  Eigen::VectorXcd target_shift;
  Eigen::MatrixXd source_linear;
  Eigen::VectorXd base_shift;
};

// Holomorphic polynomial maps of the ambient space used by the
// normalization trail. A Linear op is w = L z; a Shear op adds to each
// component a holomorphic polynomial in the first m-1 coordinates.
struct AmbientOp {
  enum class Kind { Linear, Shear };
  Kind kind = Kind::Linear;
  Eigen::MatrixXcd linear;            // Kind::Linear
  std::vector<Polynomial> shear;      // Kind::Shear, one per target component; arity m-1
};

inline EmbeddingMap apply_frame(const AffineFrame& fr, const EmbeddingMap& f) {
  f.check();
  const int m = f.m, n = f.n;
  EmbeddingMap g(m, n);
  g.label = f.label;
  // shifted, source-reparametrized components
  std::vector<Polynomial> shifted(n, Polynomial(m));
  std::vector<Polynomial> args;
  args.reserve(m);
  for (int k = 0; k < m; ++k) {
    Polynomial a = Polynomial::constant(m, fr.base_shift(k));
    for (int j = 0; j < m; ++j)
      if (fr.source_linear(k, j) != 0.0) a += Polynomial::variable(m, j, fr.source_linear(k, j));
    args.push_back(std::move(a));
  }
  for (int j = 0; j < n; ++j) shifted[j] = f.comp[j].substituted(args) - Polynomial::constant(m, fr.target_shift(j));
  for (int j = 0; j < n; ++j) {
    Polynomial acc(m);
    for (int k = 0; k < n; ++k) {
      const Complex c = fr.linear(j, k);
      if (c != Complex(0.0)) acc += c * shifted[k];
    }
    g.comp[j] = std::move(acc);
  }
  return g;
}

inline EmbeddingMap apply_ambient(const AmbientOp& op, const EmbeddingMap& f) {
  f.check();
  EmbeddingMap g(f.m, f.n);
  g.label = f.label;
  if (op.kind == AmbientOp::Kind::Linear) {
    for (int j = 0; j < f.n; ++j) {
      Polynomial acc(f.m);
      for (int k = 0; k < f.n; ++k) {
        const Complex c = op.linear(j, k);
        if (c != Complex(0.0)) acc += c * f.comp[k];
      }
      g.comp[j] = std::move(acc);
    }
  } else {
    std::vector<Polynomial> tangent(f.comp.begin(), f.comp.begin() + (f.m - 1));
    for (int j = 0; j < f.n; ++j) {
      g.comp[j] = f.comp[j];
      if (!op.shear[j].is_zero()) g.comp[j] += op.shear[j].substituted(tangent);
    }
  }
  return g;
}

// --- frame adaptation ------------------------------------------------------

struct AdaptedEmbedding {
  EmbeddingMap map;    // frame applied; singular point at 0, differential in block shape
  AffineFrame frame;
};

inline AdaptedEmbedding adapt_frame(const EmbeddingMap& f, const SingularPoint& p, double tol_rel = kDefaultRankTol) {
  f.check();
  const int m = f.m, n = f.n;
  if (p.order != 1) throw OrderMismatch("adapt_frame: point has order " + std::to_string(p.order) + ", need 1");
  std::span<const double> xs(p.location.data(), static_cast<std::size_t>(p.location.size()));
  const Eigen::MatrixXcd A = gauss_map(f, xs).matrix;

  const Eigen::VectorXcd v = kernel_direction(A);
  Eigen::VectorXd vr = v.real(), vi = v.imag();

  // Orthonormal frame of the complex tangent plane in the source.
  Eigen::VectorXd q1 = vr.normalized();
  Eigen::VectorXd w = vi - q1.dot(vi) * q1;
  if (w.norm() < 1e-10) throw NormalFormError("adapt_frame: degenerate kernel plane");
  Eigen::VectorXd q2 = w.normalized();

  // Totally real complement by pivoted QR of the orthogonal projector,
  // largest-pivot-positive sign convention.
  Eigen::MatrixXd S(m, m);
  S.col(0) = vr;
  S.col(1) = vi;
  if (m > 2) {
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(m, m) - q1 * q1.transpose() - q2 * q2.transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(proj);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
    for (int j = 0; j < m - 2; ++j) {
      Eigen::VectorXd col = Q.col(j);
      if (R(j, j) < 0) col = -col;
      S.col(2 + j) = col;
    }
  }

  // Target frame: map (A vr, A t_3, ..., A t_m) to the first m-1 basis
  // vectors and an orthonormal completion of their span to the rest.
  Eigen::MatrixXcd cols(n, m - 1);
  cols.col(0) = A * vr.cast<Complex>();
  for (int j = 0; j < m - 2; ++j) cols.col(1 + j) = A * S.col(2 + j).cast<Complex>();
  Eigen::MatrixXcd completion = orthogonal_complement(cols);
  Eigen::MatrixXcd Binv(n, n);
  Binv.leftCols(m - 1) = cols;
  Binv.rightCols(n - m + 1) = completion;
  {
    const RankResult rr = numerical_rank(Binv, tol_rel);
    if (rr.rank < n) throw NormalFormError("adapt_frame: ill-conditioned tangent decomposition");
  }

  AffineFrame fr;
  fr.linear = Binv.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
  fr.target_shift = f.eval(xs);
  fr.source_linear = S;
  fr.base_shift = p.location;

  AdaptedEmbedding out{apply_frame(fr, f), fr};

  // the adapted differential must take the block shape to working precision
  std::vector<double> zero(m, 0.0);
  Eigen::MatrixXcd D = gauss_map(out.map, zero).matrix;
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(n, m);
  expected(0, 0) = 1.0;
  expected(0, 1) = Complex(0.0, 1.0);
  for (int s = 2; s <= m - 1; ++s) expected(s - 1, s) = 1.0;
  const double scale = std::max(1.0, D.norm());
  if ((D - expected).norm() > 1e-8 * scale)
    throw NormalFormError("adapt_frame: adapted differential misses the block shape (residual " +
                          std::to_string((D - expected).norm()) + ")");
  return out;
}

// --- graph form -------------------------------------------------------------

struct GraphForm {
  int m = 0, n = 0, order = 3;
  std::vector<Jet> H;  // s = 2..m-1, real-valued; index s-2
  std::vector<Jet> h;  // u = m..n, complex-valued; index u-m
  EmbeddingMap adapted;        // current chart map, all recorded ops applied
  AffineFrame frame;           // initial adaptation
  std::vector<AmbientOp> trail;
  JetMap reparam;              // graph re-parametrization jet

  const Jet& H_s(int s) const { return H[s - 2]; }
  const Jet& h_u(int u) const { return h[u - m]; }
};

namespace detail {

// Rebuild the graph jets of an adapted chart map (basepoint 0).
inline void regraph(GraphForm& g) {
  const int m = g.m, n = g.n, N = g.order;
  std::vector<double> zero(m, 0.0);
  std::vector<Jet> F(n);
  for (int j = 0; j < n; ++j) F[j] = g.adapted.comp[j].jet_at(zero, N);

  JetMap graph_vars(m, N, m);
  graph_vars.comp[0] = real_part(F[0]);
  graph_vars.comp[1] = imag_part(F[0]);
  for (int s = 2; s <= m - 1; ++s) graph_vars.comp[s] = real_part(F[s - 1]);
  g.reparam = graph_invert(graph_vars);

  g.H.assign(std::max(0, m - 2), Jet(m, N));
  g.h.assign(n - m + 1, Jet(m, N));
  for (int s = 2; s <= m - 1; ++s) g.H[s - 2] = compose(imag_part(F[s - 1]), g.reparam);
  for (int u = m; u <= n; ++u) g.h[u - m] = compose(F[u - 1], g.reparam);

  for (int s = 2; s <= m - 1; ++s) {
    if (imag_part(g.H[s - 2]).max_abs() > kRealityTol * std::max(1.0, g.H[s - 2].max_abs()))
      throw NormalFormError("graph_form: imaginary residue in a real graph component");
  }
  auto check_flat = [&](const Jet& j, const char* what) {
    double flat = std::abs(j.coeff_id(0));
    flat = std::max(flat, j.max_abs_degree(1));
    if (flat > kForbiddenTol)
      throw NormalFormError(std::string("graph_form: ") + what + " does not vanish to first order at 0");
  };
  for (const auto& j : g.H) check_flat(j, "H component");
  for (const auto& j : g.h) check_flat(j, "h component");
}

}  // namespace detail

inline GraphForm graph_form(const AdaptedEmbedding& adapted, int order = 3) {
  GraphForm g;
  g.m = adapted.map.m;
  g.n = adapted.map.n;
  g.order = order;
  g.adapted = adapted.map;
  g.frame = adapted.frame;
  detail::regraph(g);
  return g;
}

// --- normalization ----------------------------------------------------------

namespace detail {

// z-index helpers into the zbar basis: slots (a, b, x-exponents) meaning
// z1^a z1bar^b x^gamma.
inline std::vector<int> zb_index(int m, int a, int b, std::initializer_list<std::pair<int, int>> xs = {}) {
  std::vector<int> mi(m, 0);
  mi[0] = a;
  mi[1] = b;
  for (auto [var, e] : xs) mi[var] += e;
  return mi;
}

// Holomorphic shear killing the removable quadratic terms; exact at order 2.
inline AmbientOp quadratic_shear(const GraphForm& g) {
  const int m = g.m, n = g.n;
  AmbientOp op;
  op.kind = AmbientOp::Kind::Shear;
  op.shear.assign(n, Polynomial(m - 1));
  const Complex minus_2i(0.0, -2.0), minus_i(0.0, -1.0);

  auto var_slot = [&](int t) { return t - 1; };  // ambient coordinate z_t -> shear arity slot

  for (int s = 2; s <= m - 1; ++s) {
    const Jet zb = to_zbar_basis(g.H_s(s));
    Polynomial& q = op.shear[s - 1];
    // Im Q matches the offending real-valued part of H_s.
    const Complex c20 = zb.coeff(zb_index(m, 2, 0));
    if (c20 != Complex(0.0)) {
      std::vector<int> pw(m - 1, 0);
      pw[0] = 2;
      q.add_term(pw, minus_2i * c20);
    }
    for (int t = 2; t <= m - 1; ++t) {
      const Complex ct = zb.coeff(zb_index(m, 1, 0, {{t, 1}}));
      if (ct != Complex(0.0)) {
        std::vector<int> pw(m - 1, 0);
        pw[0] = 1;
        pw[var_slot(t)] = 1;
        q.add_term(pw, minus_2i * ct);
      }
    }
    for (int t = 2; t <= m - 1; ++t)
      for (int r = t; r <= m - 1; ++r) {
        const Complex e = zb.coeff(zb_index(m, 0, 0, {{t, 1}, {r, 1}}));
        if (e != Complex(0.0)) {
          std::vector<int> pw(m - 1, 0);
          pw[var_slot(t)] += 1;
          pw[var_slot(r)] += 1;
          q.add_term(pw, minus_i * e.real());
        }
      }
  }

  for (int u = m; u <= n; ++u) {
    const Jet zb = to_zbar_basis(g.h_u(u));
    Polynomial& q = op.shear[u - 1];
    const Complex c20 = zb.coeff(zb_index(m, 2, 0));
    if (c20 != Complex(0.0)) {
      std::vector<int> pw(m - 1, 0);
      pw[0] = 2;
      q.add_term(pw, -c20);
    }
    for (int t = 2; t <= m - 1; ++t) {
      const Complex ct = zb.coeff(zb_index(m, 1, 0, {{t, 1}}));
      if (ct != Complex(0.0)) {
        std::vector<int> pw(m - 1, 0);
        pw[0] = 1;
        pw[var_slot(t)] = 1;
        q.add_term(pw, -ct);
      }
    }
    for (int t = 2; t <= m - 1; ++t)
      for (int r = t; r <= m - 1; ++r) {
        const Complex e = zb.coeff(zb_index(m, 0, 0, {{t, 1}, {r, 1}}));
        if (e != Complex(0.0)) {
          std::vector<int> pw(m - 1, 0);
          pw[var_slot(t)] += 1;
          pw[var_slot(r)] += 1;
          q.add_term(pw, -e);
        }
      }
  }
  return op;
}

// Cubic shear of the transformation family z_alpha -> z_alpha + A z1^3 +
// B^s z1^2 z_s + C^{s,t} z1 z_s z_t + D^{s,t,r} z_s z_t z_r; exact at order 3
// once the quadratic pass has run.
inline AmbientOp cubic_shear(const GraphForm& g) {
  const int m = g.m, n = g.n;
  AmbientOp op;
  op.kind = AmbientOp::Kind::Shear;
  op.shear.assign(n, Polynomial(m - 1));
  const Complex minus_2i(0.0, -2.0), minus_i(0.0, -1.0);

  auto add = [&](Polynomial& q, std::vector<int> pw, Complex c) {
    if (c != Complex(0.0)) q.add_term(pw, c);
  };
  auto pw_of = [&](int e1, std::initializer_list<int> ts) {
    std::vector<int> pw(m - 1, 0);
    pw[0] = e1;
    for (int t : ts) pw[t - 1] += 1;
    return pw;
  };

  for (int alpha = 2; alpha <= n; ++alpha) {
    const bool tangent = alpha <= m - 1;
    const Jet source = tangent ? g.H_s(alpha) : g.h_u(alpha);
    const Jet zb = to_zbar_basis(source);
    Polynomial& q = op.shear[alpha - 1];
    const Complex scale_pure = tangent ? minus_2i : Complex(-1.0);

    add(q, pw_of(3, {}), scale_pure * zb.coeff(zb_index(m, 3, 0)));
    for (int s = 2; s <= m - 1; ++s)
      add(q, pw_of(2, {s}), scale_pure * zb.coeff(zb_index(m, 2, 0, {{s, 1}})));
    for (int s = 2; s <= m - 1; ++s)
      for (int t = s; t <= m - 1; ++t)
        add(q, pw_of(1, {s, t}), scale_pure * zb.coeff(zb_index(m, 1, 0, {{s, 1}, {t, 1}})));
    for (int s = 2; s <= m - 1; ++s)
      for (int t = s; t <= m - 1; ++t)
        for (int r = t; r <= m - 1; ++r) {
          const Complex e = zb.coeff(zb_index(m, 0, 0, {{s, 1}, {t, 1}, {r, 1}}));
          add(q, pw_of(0, {s, t, r}), tangent ? minus_i * e.real() : -e);
        }
  }
  return op;
}

inline double quadratic_offender_mass(const GraphForm& g) {
  const int m = g.m, n = g.n;
  double worst = 0.0;
  auto measure = [&](const Jet& j, bool with_conjugates) {
    const Jet zb = to_zbar_basis(j);
    double w = std::abs(zb.coeff(zb_index(m, 2, 0)));
    if (with_conjugates) w = std::max(w, std::abs(zb.coeff(zb_index(m, 0, 2))));
    for (int t = 2; t <= m - 1; ++t) {
      w = std::max(w, std::abs(zb.coeff(zb_index(m, 1, 0, {{t, 1}}))));
      if (with_conjugates) w = std::max(w, std::abs(zb.coeff(zb_index(m, 0, 1, {{t, 1}}))));
      for (int r = t; r <= m - 1; ++r) w = std::max(w, std::abs(zb.coeff(zb_index(m, 0, 0, {{t, 1}, {r, 1}}))));
    }
    return w;
  };
  for (int s = 2; s <= m - 1; ++s) worst = std::max(worst, measure(g.H_s(s), true));
  for (int u = m; u <= n; ++u) worst = std::max(worst, measure(g.h_u(u), false));
  return worst;
}

inline double cubic_offender_mass(const GraphForm& g) {
  const int m = g.m, n = g.n;
  double worst = 0.0;
  auto measure = [&](const Jet& j) {
    const Jet zb = to_zbar_basis(j);
    double w = std::abs(zb.coeff(zb_index(m, 3, 0)));
    for (int s = 2; s <= m - 1; ++s) {
      w = std::max(w, std::abs(zb.coeff(zb_index(m, 2, 0, {{s, 1}}))));
      for (int t = s; t <= m - 1; ++t) {
        w = std::max(w, std::abs(zb.coeff(zb_index(m, 1, 0, {{s, 1}, {t, 1}}))));
        for (int r = t; r <= m - 1; ++r) w = std::max(w, std::abs(zb.coeff(zb_index(m, 0, 0, {{s, 1}, {t, 1}, {r, 1}}))));
      }
    }
    return w;
  };
  for (int s = 2; s <= m - 1; ++s) worst = std::max(worst, measure(g.H_s(s)));
  for (int u = m; u <= n; ++u) worst = std::max(worst, measure(g.h_u(u)));
  return worst;
}

}  // namespace detail

// Remove quadratic terms of type z1^2, z1 x_t, x_t x_r (with conjugates in
// the real components), then rotate each normal coordinate so the |z1|^2
// coefficient becomes real nonnegative. Retained quadratic coefficients
// (|z1|^2, z1bar^2, z1bar x_s) are untouched.
inline GraphForm normalize_quadratic(GraphForm g) {
  AmbientOp shear = detail::quadratic_shear(g);
  g.adapted = apply_ambient(shear, g.adapted);
  g.trail.push_back(shear);
  detail::regraph(g);

  // Phase rotation of each normal coordinate, taking the |z1|^2 coefficient
  // to the nearest point of the real axis (its sign is not a convention of
  // the record, so an already-real coefficient of either sign is fixed).
  AmbientOp rot;
  rot.kind = AmbientOp::Kind::Linear;
  rot.linear = Eigen::MatrixXcd::Identity(g.n, g.n);
  bool any = false;
  for (int u = g.m; u <= g.n; ++u) {
    const Jet zb = to_zbar_basis(g.h_u(u));
    const Complex b = zb.coeff(detail::zb_index(g.m, 1, 1));
    if (std::abs(b) > kRealityTol) {
      const double psi = 0.5 * std::arg(b * b);
      if (std::abs(psi) > 1e-14) {
        rot.linear(u - 1, u - 1) = std::polar(1.0, -psi);
        any = true;
      }
    }
  }
  if (any) {
    g.adapted = apply_ambient(rot, g.adapted);
    g.trail.push_back(rot);
    detail::regraph(g);
  }

  if (detail::quadratic_offender_mass(g) > kNormalizationTol)
    throw NormalFormError("normalize_quadratic: offending terms survived the pass");
  return g;
}

// Remove cubic terms of type z1^3, z1^2 x_s, z1 x_s x_t, x_s x_t x_r (with
// conjugates in the real components). Retained cubics (z1^2 z1b, z1 z1b^2,
// z1b^3, |z1|^2 x_s, z1b^2 x_s, z1b x_s x_t) are untouched.
inline GraphForm normalize_cubic(GraphForm g) {
  if (detail::quadratic_offender_mass(g) > kNormalizationTol)
    throw NormalFormError("normalize_cubic: run the quadratic pass first");
  AmbientOp shear = detail::cubic_shear(g);
  g.adapted = apply_ambient(shear, g.adapted);
  g.trail.push_back(shear);
  detail::regraph(g);
  if (detail::cubic_offender_mass(g) > kNormalizationTol)
    throw NormalFormError("normalize_cubic: offending terms survived the pass");
  return g;
}

// --- the coefficient record ---------------------------------------------------

struct PreNormalForm {
  int m = 0, n = 0;
  // tangent data, s = 2..m-1 (stored at s-2)
  std::vector<double> beta_s;
  std::vector<Complex> mu_s;
  std::vector<std::vector<double>> lambda_s_t;  // [s-2][t-2]
  // normal data, u = m..n (stored at u-m)
  std::vector<double> beta_u;
  std::vector<Complex> gamma_u;
  std::vector<std::vector<Complex>> eps_u_s;    // [u-m][s-2]
  std::vector<Complex> kappa_u, theta_u, pi_u;
  std::vector<std::vector<Complex>> phi_u_s, psi_u_s;
  std::vector<std::vector<std::vector<Complex>>> sigma_u_st;  // symmetric in (s,t)

  static PreNormalForm zero(int m, int n) {
    PreNormalForm r;
    r.m = m;
    r.n = n;
    const int ns = std::max(0, m - 2), nu = n - m + 1;
    r.beta_s.assign(ns, 0.0);
    r.mu_s.assign(ns, Complex(0.0));
    r.lambda_s_t.assign(ns, std::vector<double>(ns, 0.0));
    r.beta_u.assign(nu, 0.0);
    r.gamma_u.assign(nu, Complex(0.0));
    r.eps_u_s.assign(nu, std::vector<Complex>(ns, Complex(0.0)));
    r.kappa_u.assign(nu, Complex(0.0));
    r.theta_u.assign(nu, Complex(0.0));
    r.pi_u.assign(nu, Complex(0.0));
    r.phi_u_s.assign(nu, std::vector<Complex>(ns, Complex(0.0)));
    r.psi_u_s.assign(nu, std::vector<Complex>(ns, Complex(0.0)));
    r.sigma_u_st.assign(nu, std::vector<std::vector<Complex>>(ns, std::vector<Complex>(ns, Complex(0.0))));
    return r;
  }

  int tangent_count() const { return std::max(0, m - 2); }
  int normal_count() const { return n - m + 1; }

  double max_abs() const {
    double w = 0.0;
    for (double v : beta_s) w = std::max(w, std::abs(v));
    for (auto v : mu_s) w = std::max(w, std::abs(v));
    for (const auto& row : lambda_s_t)
      for (double v : row) w = std::max(w, std::abs(v));
    for (double v : beta_u) w = std::max(w, std::abs(v));
    for (auto v : gamma_u) w = std::max(w, std::abs(v));
    auto scan = [&](const std::vector<std::vector<Complex>>& rows) {
      for (const auto& row : rows)
        for (auto v : row) w = std::max(w, std::abs(v));
    };
    scan(eps_u_s);
    scan(phi_u_s);
    scan(psi_u_s);
    for (auto v : kappa_u) w = std::max(w, std::abs(v));
    for (auto v : theta_u) w = std::max(w, std::abs(v));
    for (auto v : pi_u) w = std::max(w, std::abs(v));
    for (const auto& mat : sigma_u_st)
      for (const auto& row : mat)
        for (auto v : row) w = std::max(w, std::abs(v));
    return w;
  }
};

// Coefficient dictionary, reading the normalized graph jets in the
// (z1, z1bar, x) basis:
//   beta_s   = H_s at z1 z1bar          mu_s    = H_s at z1^2 z1bar
//   lambda_s^t = H_s at z1 z1bar x_t
//   beta_u   = h_u at z1 z1bar          gamma_u = h_u at z1bar^2
//   eps_u^s  = h_u at z1bar x_s         kappa_u = h_u at z1^2 z1bar
//   theta_u  = h_u at z1 z1bar^2        pi_u    = h_u at z1bar^3
//   phi_u^s  = h_u at z1 z1bar x_s      psi_u^s = h_u at z1bar^2 x_s
//   sigma_u^{s,t} = h_u at z1bar x_s x_t, halved off-diagonal so that
//                   h_u contains sum_{s,t} sigma^{s,t} z1bar x_s x_t.
inline PreNormalForm extract_coefficients(const GraphForm& g) {
  const int m = g.m, n = g.n;
  if (detail::quadratic_offender_mass(g) > kForbiddenTol || detail::cubic_offender_mass(g) > kForbiddenTol)
    throw NormalFormError("extract_coefficients: residual forbidden terms above tolerance");

  PreNormalForm r = PreNormalForm::zero(m, n);
  using detail::zb_index;
  for (int s = 2; s <= m - 1; ++s) {
    const Jet zb = to_zbar_basis(g.H_s(s));
    const Complex beta = zb.coeff(zb_index(m, 1, 1));
    if (std::abs(beta.imag()) > kForbiddenTol) throw NormalFormError("extract_coefficients: complex |z1|^2 term in a real component");
    r.beta_s[s - 2] = beta.real();
    r.mu_s[s - 2] = zb.coeff(zb_index(m, 2, 1));
    for (int t = 2; t <= m - 1; ++t) {
      const Complex l = zb.coeff(zb_index(m, 1, 1, {{t, 1}}));
      if (std::abs(l.imag()) > kForbiddenTol) throw NormalFormError("extract_coefficients: complex |z1|^2 x_t term in a real component");
      r.lambda_s_t[s - 2][t - 2] = l.real();
    }
  }
  for (int u = m; u <= n; ++u) {
    const Jet zb = to_zbar_basis(g.h_u(u));
    const int i = u - m;
    const Complex beta = zb.coeff(zb_index(m, 1, 1));
    if (std::abs(beta.imag()) > kForbiddenTol)
      throw NormalFormError("extract_coefficients: |z1|^2 coefficient not rotated to the real axis");
    r.beta_u[i] = beta.real();
    r.gamma_u[i] = zb.coeff(zb_index(m, 0, 2));
    r.kappa_u[i] = zb.coeff(zb_index(m, 2, 1));
    r.theta_u[i] = zb.coeff(zb_index(m, 1, 2));
    r.pi_u[i] = zb.coeff(zb_index(m, 0, 3));
    for (int s = 2; s <= m - 1; ++s) {
      r.eps_u_s[i][s - 2] = zb.coeff(zb_index(m, 0, 1, {{s, 1}}));
      r.phi_u_s[i][s - 2] = zb.coeff(zb_index(m, 1, 1, {{s, 1}}));
      r.psi_u_s[i][s - 2] = zb.coeff(zb_index(m, 0, 2, {{s, 1}}));
      for (int t = s; t <= m - 1; ++t) {
        const Complex c = zb.coeff(zb_index(m, 0, 1, {{s, 1}, {t, 1}}));
        const Complex val = (s == t) ? c : c * 0.5;
        r.sigma_u_st[i][s - 2][t - 2] = val;
        r.sigma_u_st[i][t - 2][s - 2] = val;
      }
    }
  }
  return r;
}

// --- synthesis (record -> chart map) -----------------------------------------

// The graph jets of a record, in the zbar basis, as exact polynomials.
inline std::pair<std::vector<Jet>, std::vector<Jet>> graph_jets_of_record(const PreNormalForm& r, int order = 3) {
  using detail::zb_index;
  const int m = r.m, n = r.n;
  std::vector<Jet> H(std::max(0, m - 2), Jet(m, order));
  std::vector<Jet> h(n - m + 1, Jet(m, order));
  for (int s = 2; s <= m - 1; ++s) {
    Jet& zb = H[s - 2];
    zb.at(zb_index(m, 1, 1)) = r.beta_s[s - 2];
    zb.at(zb_index(m, 2, 1)) = r.mu_s[s - 2];
    zb.at(zb_index(m, 1, 2)) = std::conj(r.mu_s[s - 2]);
    for (int t = 2; t <= m - 1; ++t) zb.at(zb_index(m, 1, 1, {{t, 1}})) = r.lambda_s_t[s - 2][t - 2];
  }
  for (int u = m; u <= n; ++u) {
    Jet& zb = h[u - m];
    const int i = u - m;
    zb.at(zb_index(m, 1, 1)) = r.beta_u[i];
    zb.at(zb_index(m, 0, 2)) = r.gamma_u[i];
    zb.at(zb_index(m, 2, 1)) = r.kappa_u[i];
    zb.at(zb_index(m, 1, 2)) = r.theta_u[i];
    zb.at(zb_index(m, 0, 3)) = r.pi_u[i];
    for (int s = 2; s <= m - 1; ++s) {
      zb.at(zb_index(m, 0, 1, {{s, 1}})) = r.eps_u_s[i][s - 2];
      zb.at(zb_index(m, 1, 1, {{s, 1}})) = r.phi_u_s[i][s - 2];
      zb.at(zb_index(m, 0, 2, {{s, 1}})) = r.psi_u_s[i][s - 2];
      for (int t = s; t <= m - 1; ++t) {
        const Complex c = (s == t) ? r.sigma_u_st[i][s - 2][t - 2] : 2.0 * r.sigma_u_st[i][s - 2][t - 2];
        zb.at(zb_index(m, 0, 1, {{s, 1}, {t, 1}})) = c;
      }
    }
  }
  return {std::move(H), std::move(h)};
}

// Build the graph embedding
//   x -> (z1, x_2 + i H_2, ..., x_{m-1} + i H_{m-1}, h_m, ..., h_n)
// from a coefficient record. The result is an exact polynomial chart map in
// pre-normal position with the singular point at 0.
inline EmbeddingMap synthesize_embedding(const PreNormalForm& r, int order = 3) {
  const auto [H, h] = graph_jets_of_record(r, order);
  const int m = r.m, n = r.n;
  EmbeddingMap f(m, n);
  f.label = "synthesized";
  const Complex i_unit(0.0, 1.0);
  f.comp[0] = Polynomial::variable(m, 0) + Polynomial::variable(m, 1, i_unit);
  for (int s = 2; s <= m - 1; ++s)
    f.comp[s - 1] = Polynomial::variable(m, s) + i_unit * polynomial_from_jet(from_zbar_basis(H[s - 2]));
  for (int u = m; u <= n; ++u) f.comp[u - 1] = polynomial_from_jet(from_zbar_basis(h[u - m]));
  f.check();
  return f;
}

// --- the full extraction pipeline ---------------------------------------------

struct NormalFormResult {
  AdaptedEmbedding adapted;
  GraphForm graph;
  PreNormalForm nf;
};

inline NormalFormResult extract_at(const EmbeddingMap& f, const SingularPoint& p, int order = 3) {
  NormalFormResult r;
  r.adapted = adapt_frame(f, p);
  r.graph = normalize_cubic(normalize_quadratic(graph_form(r.adapted, order)));
  r.nf = extract_coefficients(r.graph);
  return r;
}

}  // namespace crsing
