// Built-in chart fixtures: the nondegenerate model manifold, Bishop-type
// surfaces, and seeded random embeddings. The test corpus is generated from
// these, never shipped as data.
#pragma once

#include <crsing/embedding.hpp>

#include <random>

namespace crsing {

// Graph model with components
//   (z1, x2, ..., x_{m-1}, conj(z1)^2, |z1|^2 + conj(z1)(x2+ix3),
//    conj(z1)(x_{2(l-m)} + i x_{2(l-m)+1}) for m+2 <= l <= n)
// in chart variables (x1, y1, x2, ..., x_{m-1}). Valid for
// ceil(2(n+1)/3) <= m < n.
inline EmbeddingMap coffman_model(int m, int n) {
  if (!(m < n && 3 * m >= 2 * (n + 1)))
    throw EmbeddingError("coffman_model: need 2(n+1)/3 <= m < n");
  EmbeddingMap f(m, n);
  f.label = "coffman(" + std::to_string(m) + "," + std::to_string(n) + ")";

  const Complex i_unit(0.0, 1.0);
  Polynomial z1 = Polynomial::variable(m, 0) + Polynomial::variable(m, 1, i_unit);
  Polynomial z1b = z1.conjugated();

  f.comp[0] = z1;
  for (int s = 2; s <= m - 1; ++s) f.comp[s - 1] = Polynomial::variable(m, s);
  f.comp[m - 1] = z1b * z1b;
  f.comp[m] = z1 * z1b + z1b * (Polynomial::variable(m, 2) + Polynomial::variable(m, 3, i_unit));
  for (int l = m + 2; l <= n; ++l) {
    const int a = 2 * (l - m);
    f.comp[l - 1] = z1b * (Polynomial::variable(m, a) + Polynomial::variable(m, a + 1, i_unit));
  }
  f.check();
  return f;
}

// Bishop-type surface z2 = |z1|^2 + gamma (z1^2 + conj(z1)^2) in C^2.
inline EmbeddingMap bishop_surface(double gamma) {
  EmbeddingMap f(2, 2);
  f.label = "bishop(" + std::to_string(gamma) + ")";
  const Complex i_unit(0.0, 1.0);
  Polynomial z1 = Polynomial::variable(2, 0) + Polynomial::variable(2, 1, i_unit);
  Polynomial z1b = z1.conjugated();
  f.comp[0] = z1;
  f.comp[1] = z1 * z1b + Complex(gamma) * (z1 * z1 + z1b * z1b);
  f.check();
  return f;
}

inline EmbeddingMap totally_real_inclusion(int m, int n) {
  EmbeddingMap f(m, n);
  f.label = "inclusion(" + std::to_string(m) + "," + std::to_string(n) + ")";
  for (int k = 0; k < m; ++k) f.comp[k] = Polynomial::variable(m, k);
  f.check();
  return f;
}

// Seeded random perturbation: adds affine plus homogeneous-quadratic terms of
// magnitude <= scale to every component. Pure function of (f, scale, seed).
inline EmbeddingMap random_general_position(const EmbeddingMap& f, double scale, std::uint64_t seed) {
  if (scale < 0.0) throw EmbeddingError("random_general_position: scale must be >= 0");
  EmbeddingMap g = f;
  g.label = f.label + "+rgp(seed=" + std::to_string(seed) + ")";
  if (scale == 0.0) return g;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] { return Complex(u(rng), u(rng)) * scale; };
  for (int j = 0; j < g.n; ++j) {
    Polynomial extra(g.m);
    std::vector<int> mi(g.m, 0);
    extra.add_term(mi, draw());
    for (int k = 0; k < g.m; ++k) {
      std::fill(mi.begin(), mi.end(), 0);
      mi[k] = 1;
      extra.add_term(mi, draw());
    }
    for (int a = 0; a < g.m; ++a)
      for (int b = a; b < g.m; ++b) {
        std::fill(mi.begin(), mi.end(), 0);
        mi[a] += 1;
        mi[b] += 1;
        extra.add_term(mi, draw());
        mi[a] = 0;
        mi[b] = 0;
      }
    g.comp[j] += extra;
  }
  return g;
}

}  // namespace crsing
