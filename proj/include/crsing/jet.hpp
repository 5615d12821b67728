// Truncated multivariate Taylor arithmetic over C in real variables.
//
// A Jet stores every coefficient of a power series in m real variables up
// to a fixed total degree N (default 3). Addition and scaling are exact;
// multiplication discards only terms of degree > N, so coordinate changes
// act exactly on N-jets.
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crsing {

using Complex = std::complex<double>;

struct JetError : std::runtime_error {
  explicit JetError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Exponents packed 4 bits per variable; supports up to 15 variables and
// individual exponents up to 15.
inline std::uint64_t pack_exponents(std::span<const int> mi) {
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < mi.size(); ++k) {
    key |= static_cast<std::uint64_t>(mi[k] & 0xF) << (4 * k);
  }
  return key;
}

struct IndexTable {
  int num_vars = 0;
  int order = 0;
  std::vector<std::uint64_t> keys;        // graded lex, position = flat id
  std::vector<int> degree;                // total degree per id
  std::vector<std::vector<int>> expo;     // unpacked exponents per id
  std::map<std::uint64_t, int> id_of_key;

  int find(std::uint64_t key) const {
    auto it = id_of_key.find(key);
    return it == id_of_key.end() ? -1 : it->second;
  }
};

inline const IndexTable& index_table(int num_vars, int order) {
  static std::map<std::pair<int, int>, IndexTable> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(num_vars, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  if (num_vars < 1 || num_vars > 15) throw JetError("jet: 1..15 variables supported");
  if (order < 0 || order > 15) throw JetError("jet: order 0..15 supported");

  IndexTable tab;
  tab.num_vars = num_vars;
  tab.order = order;
  std::vector<int> mi(num_vars, 0);
  // Enumerate degree by degree; within a degree, lexicographic on exponents.
  for (int deg = 0; deg <= order; ++deg) {
    std::fill(mi.begin(), mi.end(), 0);
    mi[0] = deg;
    while (true) {
      tab.keys.push_back(pack_exponents(mi));
      tab.degree.push_back(deg);
      tab.expo.push_back(mi);
      // next composition of deg into num_vars parts
      int k = num_vars - 2;
      while (k >= 0 && mi[k] == 0) --k;
      if (k < 0) break;
      const int tail = mi[num_vars - 1];
      mi[num_vars - 1] = 0;
      mi[k] -= 1;
      mi[k + 1] = tail + 1;
    }
  }
  for (std::size_t i = 0; i < tab.keys.size(); ++i) tab.id_of_key[tab.keys[i]] = static_cast<int>(i);
  auto [pos, inserted] = cache.emplace(key, std::move(tab));
  return pos->second;
}

}  // namespace detail

class Jet {
 public:
  Jet() = default;
  Jet(int num_vars, int order)
      : num_vars_(num_vars), order_(order), c_(detail::index_table(num_vars, order).keys.size(), Complex(0.0)) {}

  static Jet constant(int num_vars, int order, Complex value) {
    Jet j(num_vars, order);
    j.c_[0] = value;
    return j;
  }
  // The affine jet value + scale * x_k.
  static Jet variable(int num_vars, int order, int k, Complex scale = Complex(1.0), Complex value = Complex(0.0)) {
    Jet j(num_vars, order);
    j.c_[0] = value;
    if (order >= 1) {
      std::vector<int> mi(num_vars, 0);
      mi[k] = 1;
      j.at(mi) = scale;
    }
    return j;
  }

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }

  const detail::IndexTable& table() const { return detail::index_table(num_vars_, order_); }

  Complex coeff(std::span<const int> mi) const {
    int id = table().find(detail::pack_exponents(mi));
    return id < 0 ? Complex(0.0) : c_[id];
  }
  Complex coeff(std::initializer_list<int> mi) const { return coeff(std::span<const int>(mi.begin(), mi.size())); }
  Complex& at(std::span<const int> mi) {
    int id = table().find(detail::pack_exponents(mi));
    if (id < 0) throw JetError("jet: multi-index exceeds truncation order");
    return c_[id];
  }
  Complex& at(std::initializer_list<int> mi) { return at(std::span<const int>(mi.begin(), mi.size())); }
  Complex coeff_id(int id) const { return c_[id]; }
  Complex& coeff_id(int id) { return c_[id]; }

  Jet& operator+=(const Jet& o) {
    check_match(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_match(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(Complex s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, Complex s) { return a *= s; }
  friend Jet operator*(Complex s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= Complex(-1.0); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_match(b);
    const auto& tab = a.table();
    Jet r(a.num_vars_, a.order_);
    const int n = a.size();
    std::vector<int> sum(a.num_vars_);
    for (int i = 0; i < n; ++i) {
      if (a.c_[i] == Complex(0.0)) continue;
      const int di = tab.degree[i];
      for (int j = 0; j < n; ++j) {
        if (b.c_[j] == Complex(0.0)) continue;
        if (di + tab.degree[j] > a.order_) continue;
        for (int k = 0; k < a.num_vars_; ++k) sum[k] = tab.expo[i][k] + tab.expo[j][k];
        int id = tab.find(detail::pack_exponents(sum));
        r.c_[id] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }

  // d/dx_k; result keeps the same storage order (top-degree slots stay zero).
  Jet derivative(int k) const {
    const auto& tab = table();
    Jet r(num_vars_, order_);
    std::vector<int> mi(num_vars_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == Complex(0.0) || tab.expo[i][k] == 0) continue;
      mi = tab.expo[i];
      const int e = mi[k];
      mi[k] -= 1;
      int id = tab.find(detail::pack_exponents(mi));
      r.c_[id] += static_cast<double>(e) * c_[i];
    }
    return r;
  }

  Jet conjugated() const {
    Jet r = *this;
    for (auto& v : r.c_) v = std::conj(v);
    return r;
  }

  Jet truncated(int new_order) const {
    if (new_order >= order_) return *this;
    const auto& tab = table();
    Jet r = *this;
    for (int i = 0; i < size(); ++i)
      if (tab.degree[i] > new_order) r.c_[i] = Complex(0.0);
    return r;
  }

  Complex eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars_) throw JetError("jet eval: dimension mismatch");
    const auto& tab = table();
    Complex acc(0.0);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == Complex(0.0)) continue;
      double mono = 1.0;
      for (int k = 0; k < num_vars_; ++k)
        for (int e = 0; e < tab.expo[i][k]; ++e) mono *= x[k];
      acc += c_[i] * mono;
    }
    return acc;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
  }
  double max_abs_degree(int deg) const {
    const auto& tab = table();
    double m = 0.0;
    for (int i = 0; i < size(); ++i)
      if (tab.degree[i] == deg) m = std::max(m, std::abs(c_[i]));
    return m;
  }
  double max_abs_above(int deg) const {
    const auto& tab = table();
    double m = 0.0;
    for (int i = 0; i < size(); ++i)
      if (tab.degree[i] > deg) m = std::max(m, std::abs(c_[i]));
    return m;
  }

 private:
  void check_match(const Jet& o) const {
    if (num_vars_ != o.num_vars_ || order_ != o.order_) throw JetError("jet: dimension/order mismatch");
  }

  int num_vars_ = 0;
  int order_ = 0;
  std::vector<Complex> c_;
};

// A tuple of jets over a common variable set: a map germ R^m -> C^k.
struct JetMap {
  int domain_vars = 0;
  std::vector<Jet> comp;

  JetMap() = default;
  JetMap(int vars, int order, int count) : domain_vars(vars), comp(count, Jet(vars, order)) {}

  int order() const { return comp.empty() ? 0 : comp.front().order(); }
  int count() const { return static_cast<int>(comp.size()); }

  static JetMap identity(int vars, int order) {
    JetMap m(vars, order, vars);
    for (int k = 0; k < vars; ++k) m.comp[k] = Jet::variable(vars, order, k);
    return m;
  }

  void check() const {
    for (const auto& j : comp)
      if (j.num_vars() != domain_vars || j.order() != order()) throw JetError("jet map: inconsistent components");
  }
};

// Composition outer(inner_1, ..., inner_k). Every inner component must have
// zero constant term: composition is taken at a fixed basepoint and the
// result is the N-jet of the composite there.
inline Jet compose(const Jet& outer, const JetMap& inner) {
  if (outer.num_vars() != inner.count()) throw JetError("compose: outer arity != inner component count");
  if (inner.comp.empty()) throw JetError("compose: empty inner map");
  const int order = inner.order();
  for (const auto& g : inner.comp) {
    if (std::abs(g.coeff_id(0)) != 0.0) throw JetError("compose: inner component has nonzero constant term");
  }
  const int vars = inner.domain_vars;
  const auto& tab = outer.table();

  // Cache powers of each inner component up to the outer truncation order.
  std::vector<std::vector<Jet>> pow(inner.count());
  for (int k = 0; k < inner.count(); ++k) {
    pow[k].push_back(Jet::constant(vars, order, 1.0));
    for (int e = 1; e <= outer.order(); ++e) pow[k].push_back(pow[k].back() * inner.comp[k]);
  }

  Jet r(vars, order);
  for (int i = 0; i < outer.size(); ++i) {
    const Complex c = outer.coeff_id(i);
    if (c == Complex(0.0)) continue;
    Jet term = Jet::constant(vars, order, c);
    for (int k = 0; k < outer.num_vars(); ++k) {
      const int e = tab.expo[i][k];
      if (e > 0) term = term * pow[k][e];
    }
    r += term;
  }
  return r;
}

inline JetMap compose(const JetMap& outer, const JetMap& inner) {
  JetMap r;
  r.domain_vars = inner.domain_vars;
  r.comp.reserve(outer.comp.size());
  for (const auto& f : outer.comp) r.comp.push_back(compose(f, inner));
  return r;
}

namespace detail {

// Linear part of a square jet map as a dense row-major matrix.
inline std::vector<Complex> linear_part(const JetMap& m) {
  const int n = m.count();
  std::vector<Complex> L(static_cast<std::size_t>(n) * n);
  std::vector<int> mi(m.domain_vars, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m.domain_vars; ++k) {
      std::fill(mi.begin(), mi.end(), 0);
      mi[k] = 1;
      L[static_cast<std::size_t>(i) * n + k] = m.comp[i].coeff(mi);
    }
  return L;
}

// Solve L X = B for dense complex L (Gaussian elimination, partial pivoting).
inline std::vector<Complex> solve_linear(std::vector<Complex> L, std::vector<Complex> B, int n, int ncols) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(L[static_cast<std::size_t>(r) * n + col]) > std::abs(L[static_cast<std::size_t>(piv) * n + col])) piv = r;
    if (std::abs(L[static_cast<std::size_t>(piv) * n + col]) < 1e-14) throw JetError("graph inversion: singular linearization");
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(L[static_cast<std::size_t>(piv) * n + k], L[static_cast<std::size_t>(col) * n + k]);
      for (int k = 0; k < ncols; ++k) std::swap(B[static_cast<std::size_t>(piv) * ncols + k], B[static_cast<std::size_t>(col) * ncols + k]);
    }
    const Complex d = L[static_cast<std::size_t>(col) * n + col];
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = L[static_cast<std::size_t>(r) * n + col] / d;
      if (f == Complex(0.0)) continue;
      for (int k = col; k < n; ++k) L[static_cast<std::size_t>(r) * n + k] -= f * L[static_cast<std::size_t>(col) * n + k];
      for (int k = 0; k < ncols; ++k) B[static_cast<std::size_t>(r) * ncols + k] -= f * B[static_cast<std::size_t>(col) * ncols + k];
    }
  }
  for (int r = 0; r < n; ++r) {
    const Complex d = L[static_cast<std::size_t>(r) * n + r];
    for (int k = 0; k < ncols; ++k) B[static_cast<std::size_t>(r) * ncols + k] /= d;
  }
  return B;
}

}  // namespace detail

// Inverse of a square jet map with zero constant term and invertible linear
// part: F o R = identity through the truncation order. Writing F = L + P with
// P the higher-order part, the inverse solves R = L^{-1} o (id - P o R) by
// fixed-point iteration, which is exact at order N after N iterations.
inline JetMap graph_invert(const JetMap& map) {
  map.check();
  const int n = map.count();
  if (n != map.domain_vars) throw JetError("graph inversion: map must be square");
  const int order = map.order();
  for (const auto& f : map.comp)
    if (std::abs(f.coeff_id(0)) != 0.0) throw JetError("graph inversion: nonzero value at basepoint");

  auto L = detail::linear_part(map);
  std::vector<Complex> I(static_cast<std::size_t>(n) * n, Complex(0.0));
  for (int i = 0; i < n; ++i) I[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto Linv = detail::solve_linear(L, I, n, n);

  auto apply_linv = [&](const JetMap& v) {
    JetMap r(map.domain_vars, order, n);
    for (int i = 0; i < n; ++i) {
      Jet acc(map.domain_vars, order);
      for (int k = 0; k < n; ++k) {
        const Complex c = Linv[static_cast<std::size_t>(i) * n + k];
        if (c != Complex(0.0)) acc += c * v.comp[k];
      }
      r.comp[i] = acc;
    }
    return r;
  };

  // Higher-order part P = F - L.
  JetMap P = map;
  {
    auto lin = detail::linear_part(map);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        std::vector<int> mi(n, 0);
        mi[k] = 1;
        P.comp[i].at(mi) -= lin[static_cast<std::size_t>(i) * n + k];
      }
  }

  JetMap id = JetMap::identity(n, order);
  JetMap R = apply_linv(id);
  for (int it = 0; it < order; ++it) {
    JetMap PR = compose(P, R);
    JetMap rhs(n, order, n);
    for (int i = 0; i < n; ++i) rhs.comp[i] = id.comp[i] - PR.comp[i];
    R = apply_linv(rhs);
  }
  return R;
}

// Basis changes between the real chart variables (x1, y1, x2, ..., x_{m-1})
// and the formal pair (z1, z1bar) in the first two slots. Both directions are
// exact linear substitutions; x-variable slots are untouched.
//
// In the zbar basis, the coefficient at multi-index (a, b, gamma) is the
// coefficient of z1^a z1bar^b x^gamma.
inline Jet to_zbar_basis(const Jet& j) {
  const int m = j.num_vars();
  if (m < 2) throw JetError("zbar basis needs at least 2 variables");
  JetMap sub(m, j.order(), m);
  const Complex half(0.5, 0.0), half_i(0.0, 0.5), neg_half_i(0.0, -0.5);
  sub.comp[0] = Jet::variable(m, j.order(), 0, half) + Jet::variable(m, j.order(), 1, half);          // x1 = (z+zb)/2
  sub.comp[1] = Jet::variable(m, j.order(), 0, neg_half_i) + Jet::variable(m, j.order(), 1, half_i);  // y1 = (z-zb)/(2i)
  for (int k = 2; k < m; ++k) sub.comp[k] = Jet::variable(m, j.order(), k);
  return compose(j, sub);
}

inline Jet from_zbar_basis(const Jet& j) {
  const int m = j.num_vars();
  if (m < 2) throw JetError("zbar basis needs at least 2 variables");
  JetMap sub(m, j.order(), m);
  const Complex i_unit(0.0, 1.0);
  sub.comp[0] = Jet::variable(m, j.order(), 0) + Jet::variable(m, j.order(), 1, i_unit);                // z1 = x1 + i y1
  sub.comp[1] = Jet::variable(m, j.order(), 0) + Jet::variable(m, j.order(), 1, Complex(0.0) - i_unit); // zb = x1 - i y1
  for (int k = 2; k < m; ++k) sub.comp[k] = Jet::variable(m, j.order(), k);
  return compose(j, sub);
}

// Wirtinger operators on jets in the real chart variables.
inline Jet wirtinger_z(const Jet& j) {
  return 0.5 * (j.derivative(0) - Complex(0.0, 1.0) * j.derivative(1));
}
inline Jet wirtinger_zbar(const Jet& j) {
  return 0.5 * (j.derivative(0) + Complex(0.0, 1.0) * j.derivative(1));
}

inline Jet real_part(const Jet& j) { return 0.5 * (j + j.conjugated()); }
inline Jet imag_part(const Jet& j) { return Complex(0.0, -0.5) * (j - j.conjugated()); }

}  // namespace crsing
