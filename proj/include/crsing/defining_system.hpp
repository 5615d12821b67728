// The order->=1 locus as an explicit zero set near an adapted point.
//
// In pre-normal position the locus is cut out by n-m+1 complex functions
// B_m..B_n, the entries of the Schur complement of the row-reduced
// complexified differential. Through degree 2 they read
//   B_u = beta_u z1 + 2 gamma_u z1b + sum_s eps_u^s x_s
//         - i sum_s eps_u^s beta_s |z1|^2 + kappa_u z1^2 + 2 theta_u |z1|^2
//         + 3 pi_u z1b^2
//         + sum_s (phi_u^s z1 x_s + 2 psi_u^s z1b x_s + sum_t sigma_u^{s,t} x_s x_t)
//         + O(3),
// and the real linearization dS(0) stacks (Re B_u, Im B_u) row pairs.
#pragma once

#include <crsing/normal_form.hpp>

namespace crsing {

struct DefiningSystem {
  int m = 0, n = 0;
  std::vector<Jet> B;                 // u = m..n at index u-m; order-2 jets in the chart variables
  Eigen::MatrixXd jacobian_at_base;   // 2(n-m+1) x m
  bool degenerate = false;            // all B_u vanish through degree 1

  Complex eval(int u, std::span<const double> x) const { return B[u - m].eval(x); }
};

// Linearization rows at 0: for each u the pair
//   Re: (beta_u + 2 Re gamma_u, 2 Im gamma_u, Re eps_u^2, ..., Re eps_u^{m-1})
//   Im: (2 Im gamma_u, beta_u - 2 Re gamma_u, Im eps_u^2, ..., Im eps_u^{m-1}).
inline Eigen::MatrixXd singular_set_jacobian(const PreNormalForm& nf) {
  const int m = nf.m, ell = nf.normal_count();
  Eigen::MatrixXd dS = Eigen::MatrixXd::Zero(2 * ell, m);
  for (int i = 0; i < ell; ++i) {
    const double beta = nf.beta_u[i];
    const Complex gamma = nf.gamma_u[i];
    dS(2 * i, 0) = beta + 2.0 * gamma.real();
    dS(2 * i, 1) = 2.0 * gamma.imag();
    dS(2 * i + 1, 0) = 2.0 * gamma.imag();
    dS(2 * i + 1, 1) = beta - 2.0 * gamma.real();
    for (int s = 2; s <= m - 1; ++s) {
      dS(2 * i, s) = nf.eps_u_s[i][s - 2].real();
      dS(2 * i + 1, s) = nf.eps_u_s[i][s - 2].imag();
    }
  }
  return dS;
}

inline DefiningSystem defining_system(const PreNormalForm& nf) {
  using detail::zb_index;
  const int m = nf.m, n = nf.n;
  DefiningSystem d;
  d.m = m;
  d.n = n;
  d.B.reserve(n - m + 1);
  for (int u = m; u <= n; ++u) {
    const int i = u - m;
    Jet zb(m, 2);
    zb.at(zb_index(m, 1, 0)) = nf.beta_u[i];
    zb.at(zb_index(m, 0, 1)) = 2.0 * nf.gamma_u[i];
    Complex cross(0.0);
    for (int s = 2; s <= m - 1; ++s) cross += nf.eps_u_s[i][s - 2] * nf.beta_s[s - 2];
    zb.at(zb_index(m, 1, 1)) = Complex(0.0, -1.0) * cross + 2.0 * nf.theta_u[i];
    zb.at(zb_index(m, 2, 0)) = nf.kappa_u[i];
    zb.at(zb_index(m, 0, 2)) = 3.0 * nf.pi_u[i];
    for (int s = 2; s <= m - 1; ++s) {
      zb.at(zb_index(m, 0, 0, {{s, 1}})) = nf.eps_u_s[i][s - 2];
      zb.at(zb_index(m, 1, 0, {{s, 1}})) = nf.phi_u_s[i][s - 2];
      zb.at(zb_index(m, 0, 1, {{s, 1}})) = 2.0 * nf.psi_u_s[i][s - 2];
      for (int t = s; t <= m - 1; ++t) {
        const Complex sig = nf.sigma_u_st[i][s - 2][t - 2];
        zb.at(zb_index(m, 0, 0, {{s, 1}, {t, 1}})) = (s == t) ? sig : 2.0 * sig;
      }
    }
    d.B.push_back(from_zbar_basis(zb));
  }
  d.jacobian_at_base = singular_set_jacobian(nf);
  double linear_mass = 0.0;
  for (const auto& b : d.B) {
    linear_mass = std::max(linear_mass, b.max_abs_degree(1));
    linear_mass = std::max(linear_mass, std::abs(b.coeff_id(0)));
  }
  d.degenerate = linear_mass <= kForbiddenTol;
  return d;
}

// Section of the complex tangent line field along the locus, as a vector
// field with order-1 jet coefficients in the chart variables:
//   V = d/dz1 + i sum_s beta_s z1bar d/dx_s + O(2).
// The corrections are forced by the middle rows of the differential; with
// them, df_C applied to the conjugate coefficients vanishes to second order
// along the locus.
struct KernelField {
  int m = 0;
  std::vector<Jet> component;  // coefficient of d/dx_k at index k, order-1 jets

  // Apply to an order->=1 jet: (V f)(x) = sum_k V_k(x) d f/d x_k, truncated
  // one order below f.
  Jet apply(const Jet& f) const {
    Jet r(f.num_vars(), f.order());
    for (int k = 0; k < m; ++k) {
      Jet vk(f.num_vars(), f.order());
      const auto& tab = component[k].table();
      for (int id = 0; id < component[k].size(); ++id) {
        const Complex c = component[k].coeff_id(id);
        if (c == Complex(0.0)) continue;
        vk.at(std::span<const int>(tab.expo[id].data(), tab.expo[id].size())) = c;
      }
      r += vk * f.derivative(k);
    }
    return r.truncated(f.order() - 1);
  }
  KernelField conjugated() const {
    KernelField r = *this;
    for (auto& c : r.component) c = c.conjugated();
    return r;
  }
};

inline KernelField kernel_field(const PreNormalForm& nf) {
  const int m = nf.m;
  KernelField V;
  V.m = m;
  V.component.assign(m, Jet(m, 1));
  V.component[0] = Jet::constant(m, 1, Complex(0.5, 0.0));
  V.component[1] = Jet::constant(m, 1, Complex(0.0, -0.5));
  // z1bar = x1 - i y1 as an order-1 jet
  for (int s = 2; s <= m - 1; ++s) {
    const Complex c = Complex(0.0, 1.0) * nf.beta_s[s - 2];
    if (c == Complex(0.0)) continue;
    V.component[s] = Jet::variable(m, 1, 0, c) + Jet::variable(m, 1, 1, c * Complex(0.0, -1.0));
  }
  return V;
}

// m - rank_R dS(0); transversal order-1 points get the expected stratum
// dimension 3m - 2n - 2. Returns nullopt when the rank decision is within
// 10x of the tolerance (indeterminate).
inline std::optional<int> local_dimension_estimate(const PreNormalForm& nf, double tol_rel = kDefaultRankTol) {
  const RankResult rr = numerical_rank(singular_set_jacobian(nf), tol_rel);
  if (rr.indeterminate()) return std::nullopt;
  return nf.m - rr.rank;
}

}  // namespace crsing
