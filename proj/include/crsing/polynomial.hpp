// Sparse polynomials in m real variables with complex coefficients.
// Exact evaluation and differentiation; Taylor jets at arbitrary centers.
#pragma once

#include <crsing/jet.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace crsing {

struct PolyError : std::runtime_error {
  explicit PolyError(const std::string& msg) : std::runtime_error(msg) {}
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, Complex c) {
    Polynomial p(num_vars);
    if (c != Complex(0.0)) p.terms_[0] = c;
    return p;
  }
  static Polynomial variable(int num_vars, int k, Complex scale = Complex(1.0)) {
    Polynomial p(num_vars);
    std::vector<int> mi(num_vars, 0);
    mi[k] = 1;
    p.add_term(mi, scale);
    return p;
  }

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    int d = 0;
    for (const auto& [key, c] : terms_) d = std::max(d, key_degree(key));
    return d;
  }
  std::size_t term_count() const { return terms_.size(); }

  void add_term(std::span<const int> powers, Complex c) {
    if (static_cast<int>(powers.size()) != num_vars_) throw PolyError("polynomial term: powers length mismatch");
    for (int e : powers)
      if (e < 0 || e > 15) throw PolyError("polynomial term: exponent out of range");
    if (c == Complex(0.0)) return;
    auto key = detail::pack_exponents(powers);
    auto it = terms_.find(key);
    if (it == terms_.end()) {
      terms_[key] = c;
    } else {
      it->second += c;
      if (it->second == Complex(0.0)) terms_.erase(it);
    }
  }
  void add_term(std::initializer_list<int> powers, Complex c) {
    add_term(std::span<const int>(powers.begin(), powers.size()), c);
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_match(o);
    for (const auto& [key, c] : o.terms_) accumulate(key, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_match(o);
    for (const auto& [key, c] : o.terms_) accumulate(key, -c);
    return *this;
  }
  Polynomial& operator*=(Complex s) {
    if (s == Complex(0.0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [key, c] : terms_) c *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }
  friend Polynomial operator*(Complex s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_match(b);
    Polynomial r(a.num_vars_);
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) {
        // 4-bit lanes add without carry as long as the total degree stays <= 15
        if (key_degree(ka) + key_degree(kb) > 15) throw PolyError("polynomial product: degree exceeds representable range");
        r.accumulate(ka + kb, ca * cb);
      }
    return r;
  }

  Complex eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars_) throw PolyError("polynomial eval: dimension mismatch");
    Complex acc(0.0);
    for (const auto& [key, c] : terms_) {
      double mono = 1.0;
      for (int k = 0; k < num_vars_; ++k) {
        const int e = static_cast<int>((key >> (4 * k)) & 0xF);
        for (int t = 0; t < e; ++t) mono *= x[k];
      }
      acc += c * mono;
    }
    return acc;
  }

  Polynomial derivative(int k) const {
    Polynomial r(num_vars_);
    for (const auto& [key, c] : terms_) {
      const int e = static_cast<int>((key >> (4 * k)) & 0xF);
      if (e == 0) continue;
      r.accumulate(key - (std::uint64_t(1) << (4 * k)), static_cast<double>(e) * c);
    }
    return r;
  }

  Polynomial conjugated() const {
    Polynomial r(num_vars_);
    for (const auto& [key, c] : terms_) r.terms_[key] = std::conj(c);
    return r;
  }

  // Recenter: q(x) = p(x + center), expanded exactly.
  Polynomial shifted(std::span<const double> center) const {
    if (static_cast<int>(center.size()) != num_vars_) throw PolyError("polynomial shift: dimension mismatch");
    Polynomial r = *this;
    for (int k = 0; k < num_vars_; ++k) {
      if (center[k] == 0.0) continue;
      Polynomial next(num_vars_);
      for (const auto& [key, c] : r.terms_) {
        const int e = static_cast<int>((key >> (4 * k)) & 0xF);
        const std::uint64_t base = key - (std::uint64_t(e) << (4 * k));
        // binomial expansion of (x_k + center_k)^e
        double binom = 1.0;
        double shift_pow = 1.0;
        for (int j = e; j >= 0; --j) {
          next.accumulate(base + (std::uint64_t(j) << (4 * k)), c * binom * shift_pow);
          binom *= static_cast<double>(j) / static_cast<double>(e - j + 1);
          shift_pow *= center[k];
        }
      }
      r = std::move(next);
    }
    return r;
  }

  // N-jet of the polynomial at the given center.
  Jet jet_at(std::span<const double> center, int order) const {
    Polynomial s = shifted(center);
    Jet j(num_vars_, order);
    for (const auto& [key, c] : s.terms_) {
      if (key_degree(key) > order) continue;
      std::vector<int> mi(num_vars_);
      for (int k = 0; k < num_vars_; ++k) mi[k] = static_cast<int>((key >> (4 * k)) & 0xF);
      j.at(mi) += c;
    }
    return j;
  }

  // Substitute polynomials for the variables (used by source reparametrizations).
  Polynomial substituted(const std::vector<Polynomial>& args) const {
    if (static_cast<int>(args.size()) != num_vars_) throw PolyError("polynomial substitution: arity mismatch");
    const int out_vars = args.empty() ? 0 : args.front().num_vars();
    Polynomial r(out_vars);
    for (const auto& [key, c] : terms_) {
      Polynomial term = Polynomial::constant(out_vars, c);
      for (int k = 0; k < num_vars_; ++k) {
        const int e = static_cast<int>((key >> (4 * k)) & 0xF);
        for (int t = 0; t < e; ++t) term = term * args[k];
      }
      r += term;
    }
    return r;
  }

  // Coefficient-sum bound for sup |d p / d x_k| over the box |x_i| <= radius_i.
  double derivative_bound(int k, std::span<const double> radius) const {
    Polynomial d = derivative(k);
    double bound = 0.0;
    for (const auto& [key, c] : d.terms_) {
      double mono = 1.0;
      for (int i = 0; i < num_vars_; ++i) {
        const int e = static_cast<int>((key >> (4 * i)) & 0xF);
        for (int t = 0; t < e; ++t) mono *= radius[i];
      }
      bound += std::abs(c) * mono;
    }
    return bound;
  }

  double max_coeff_abs() const {
    double m = 0.0;
    for (const auto& [key, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  template <typename F>
  void for_each_term(F&& f) const {
    std::vector<int> mi(num_vars_);
    for (const auto& [key, c] : terms_) {
      for (int k = 0; k < num_vars_; ++k) mi[k] = static_cast<int>((key >> (4 * k)) & 0xF);
      f(std::span<const int>(mi.data(), mi.size()), c);
    }
  }

 private:
  static int key_degree(std::uint64_t key) {
    int d = 0;
    while (key) {
      d += static_cast<int>(key & 0xF);
      key >>= 4;
    }
    return d;
  }
  void accumulate(std::uint64_t key, Complex c) {
    if (c == Complex(0.0)) return;
    auto it = terms_.find(key);
    if (it == terms_.end()) {
      terms_[key] = c;
    } else {
      it->second += c;
      if (it->second == Complex(0.0)) terms_.erase(it);
    }
  }
  void check_match(const Polynomial& o) const {
    if (num_vars_ != o.num_vars_) throw PolyError("polynomial: dimension mismatch");
  }

  int num_vars_ = 0;
  std::map<std::uint64_t, Complex> terms_;
};

// A degree-<=order jet is itself a polynomial; used to turn synthesized
// normal-form jets back into exact chart maps.
inline Polynomial polynomial_from_jet(const Jet& j) {
  Polynomial p(j.num_vars());
  const auto& tab = j.table();
  for (int i = 0; i < j.size(); ++i) {
    const Complex c = j.coeff_id(i);
    if (c == Complex(0.0)) continue;
    p.add_term(std::span<const int>(tab.expo[i].data(), tab.expo[i].size()), c);
  }
  return p;
}

}  // namespace crsing
