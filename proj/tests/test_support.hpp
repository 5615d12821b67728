// Seeded fixture generators shared across the suites. Everything here is a
// pure function of the RNG state, so frozen seeds give frozen fixtures.
#pragma once

#include <crsing/classify.hpp>
#include <crsing/perturb.hpp>

#include <random>

namespace crsing::testing {

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Complex(u(rng), u(rng));
}
inline double random_real(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return u(rng);
}

struct RecordOptions {
  double quad_scale = 0.6;
  double cubic_scale = 0.4;
  bool zero_beta_gamma = false;   // totally degenerate second-order data
  int force_coffman_rank = -1;    // 1 or 2 to condition the (beta, gamma) rows
  bool require_transversal = false;
};

inline PreNormalForm random_record(int m, int n, std::mt19937_64& rng, const RecordOptions& opt = {}) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    PreNormalForm r = PreNormalForm::zero(m, n);
    for (int s = 2; s <= m - 1; ++s) {
      r.beta_s[s - 2] = random_real(rng, opt.quad_scale);
      r.mu_s[s - 2] = random_complex(rng, opt.cubic_scale);
      for (int t = 2; t <= m - 1; ++t) r.lambda_s_t[s - 2][t - 2] = random_real(rng, opt.cubic_scale);
    }
    for (int u = m; u <= n; ++u) {
      const int i = u - m;
      r.beta_u[i] = random_real(rng, opt.quad_scale);
      r.gamma_u[i] = random_complex(rng, opt.quad_scale);
      r.kappa_u[i] = random_complex(rng, opt.cubic_scale);
      r.theta_u[i] = random_complex(rng, opt.cubic_scale);
      r.pi_u[i] = random_complex(rng, opt.cubic_scale);
      for (int s = 2; s <= m - 1; ++s) {
        r.eps_u_s[i][s - 2] = random_complex(rng, opt.quad_scale);
        r.phi_u_s[i][s - 2] = random_complex(rng, opt.cubic_scale);
        r.psi_u_s[i][s - 2] = random_complex(rng, opt.cubic_scale);
        for (int t = s; t <= m - 1; ++t) {
          const Complex c = random_complex(rng, opt.cubic_scale);
          r.sigma_u_st[i][s - 2][t - 2] = c;
          r.sigma_u_st[i][t - 2][s - 2] = c;
        }
      }
    }
    if (opt.zero_beta_gamma) {
      std::fill(r.beta_u.begin(), r.beta_u.end(), 0.0);
      std::fill(r.gamma_u.begin(), r.gamma_u.end(), Complex(0.0));
    }
    if (opt.force_coffman_rank == 1) {
      // rows real-proportional to (1, gamma0): keeps beta real
      const Complex gamma0 = random_complex(rng, 1.0);
      for (int i = 0; i < r.normal_count(); ++i) {
        double lam = random_real(rng, 1.0);
        if (i == 0 && std::abs(lam) < 0.3) lam = lam < 0 ? -0.5 : 0.5;
        r.beta_u[i] = lam;
        r.gamma_u[i] = lam * gamma0;
      }
    }
    if (opt.force_coffman_rank == 2) {
      const RankResult rr = numerical_rank(coffman_matrix(r));
      if (rr.rank != 2 || rr.margin < 1e-3) continue;
    }
    if (opt.require_transversal) {
      const TransversalityResult tr = transversality_test(r);
      if (!tr.transversal || tr.rank.margin < 1e-3) continue;
    }
    return r;
  }
  throw std::runtime_error("random_record: rejection sampling failed");
}

// Full extraction pipeline at the origin of a chart map singular there.
inline NormalFormResult extract_origin(const EmbeddingMap& f) {
  SingularPoint p = detail::singular_point_at_origin(f);
  return extract_at(f, p);
}

inline double record_distance(const PreNormalForm& a, const PreNormalForm& b) {
  double w = 0.0;
  auto upd = [&](double d) { w = std::max(w, d); };
  for (std::size_t i = 0; i < a.beta_s.size(); ++i) upd(std::abs(a.beta_s[i] - b.beta_s[i]));
  for (std::size_t i = 0; i < a.mu_s.size(); ++i) upd(std::abs(a.mu_s[i] - b.mu_s[i]));
  for (std::size_t i = 0; i < a.lambda_s_t.size(); ++i)
    for (std::size_t j = 0; j < a.lambda_s_t[i].size(); ++j) upd(std::abs(a.lambda_s_t[i][j] - b.lambda_s_t[i][j]));
  for (std::size_t i = 0; i < a.beta_u.size(); ++i) upd(std::abs(a.beta_u[i] - b.beta_u[i]));
  for (std::size_t i = 0; i < a.gamma_u.size(); ++i) upd(std::abs(a.gamma_u[i] - b.gamma_u[i]));
  for (std::size_t i = 0; i < a.kappa_u.size(); ++i) upd(std::abs(a.kappa_u[i] - b.kappa_u[i]));
  for (std::size_t i = 0; i < a.theta_u.size(); ++i) upd(std::abs(a.theta_u[i] - b.theta_u[i]));
  for (std::size_t i = 0; i < a.pi_u.size(); ++i) upd(std::abs(a.pi_u[i] - b.pi_u[i]));
  for (std::size_t i = 0; i < a.eps_u_s.size(); ++i)
    for (std::size_t j = 0; j < a.eps_u_s[i].size(); ++j) {
      upd(std::abs(a.eps_u_s[i][j] - b.eps_u_s[i][j]));
      upd(std::abs(a.phi_u_s[i][j] - b.phi_u_s[i][j]));
      upd(std::abs(a.psi_u_s[i][j] - b.psi_u_s[i][j]));
    }
  for (std::size_t i = 0; i < a.sigma_u_st.size(); ++i)
    for (std::size_t j = 0; j < a.sigma_u_st[i].size(); ++j)
      for (std::size_t k = 0; k < a.sigma_u_st[i][j].size(); ++k)
        upd(std::abs(a.sigma_u_st[i][j][k] - b.sigma_u_st[i][j][k]));
  return w;
}

}  // namespace crsing::testing
