#include <doctest.h>

#include <crsing/jet.hpp>

#include <random>

using namespace crsing;

namespace {

Jet random_jet(int vars, int order, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Jet j(vars, order);
  for (int i = 0; i < j.size(); ++i) j.coeff_id(i) = Complex(u(rng), u(rng));
  return j;
}

double max_diff(const Jet& a, const Jet& b) {
  Jet d = a - b;
  return d.max_abs();
}

}  // namespace

TEST_CASE("multi-index table counts") {
  Jet j3(3, 3);
  CHECK(j3.size() == 20);  // C(6,3)
  Jet j1(1, 5);
  CHECK(j1.size() == 6);
  Jet j7(7, 3);
  CHECK(j7.size() == 120);  // C(10,3)
}

TEST_CASE("product identities") {
  // (1 + x1)(1 - x1) = 1 - x1^2
  Jet a = Jet::constant(2, 3, 1.0) + Jet::variable(2, 3, 0);
  Jet b = Jet::constant(2, 3, 1.0) - Jet::variable(2, 3, 0);
  Jet p = a * b;
  CHECK(std::abs(p.coeff({0, 0}) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(p.coeff({2, 0}) + Complex(1.0)) < 1e-15);
  CHECK(std::abs(p.coeff({1, 0})) < 1e-15);

  // x1*x2*x3*x1 truncates to zero at order 3
  Jet x1 = Jet::variable(3, 3, 0), x2 = Jet::variable(3, 3, 1), x3 = Jet::variable(3, 3, 2);
  Jet q = x1 * x2 * x3 * x1;
  CHECK(q.max_abs() == 0.0);

  // z1 * conj(z1) = x1^2 + y1^2 for z1 = x1 + i y1
  Jet z1 = Jet::variable(2, 3, 0) + Jet::variable(2, 3, 1, Complex(0, 1));
  Jet zz = z1 * z1.conjugated();
  CHECK(std::abs(zz.coeff({2, 0}) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(zz.coeff({0, 2}) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(zz.coeff({1, 1})) < 1e-15);
}

TEST_CASE("dimension mismatch raises") {
  Jet a(2, 3), b(3, 3);
  CHECK_THROWS_AS(a + b, JetError);
  CHECK_THROWS_AS(a * b, JetError);
}

TEST_CASE("composition basics") {
  // outer(u) = u^2, inner = x1 + x2
  Jet outer = Jet::variable(1, 3, 0) * Jet::variable(1, 3, 0);
  JetMap inner(2, 3, 1);
  inner.comp[0] = Jet::variable(2, 3, 0) + Jet::variable(2, 3, 1);
  Jet r = compose(outer, inner);
  CHECK(std::abs(r.coeff({2, 0}) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(r.coeff({1, 1}) - Complex(2.0)) < 1e-15);
  CHECK(std::abs(r.coeff({0, 2}) - Complex(1.0)) < 1e-15);

  // identity outer leaves inner unchanged
  std::mt19937_64 rng(7);
  JetMap f(3, 3, 3);
  for (auto& c : f.comp) {
    c = random_jet(3, 3, rng);
    c.coeff_id(0) = 0.0;
  }
  JetMap id = JetMap::identity(3, 3);
  JetMap g = compose(id, f);
  for (int i = 0; i < 3; ++i) CHECK(max_diff(g.comp[i], f.comp[i]) < 1e-14);
}

TEST_CASE("composition rejects nonzero constant term") {
  Jet outer = Jet::variable(1, 3, 0);
  JetMap inner(2, 3, 1);
  inner.comp[0] = Jet::constant(2, 3, 1.0);
  CHECK_THROWS_AS(compose(outer, inner), JetError);
}

TEST_CASE("graph inversion: linear shear") {
  JetMap m(2, 3, 2);
  m.comp[0] = Jet::variable(2, 3, 0) + Complex(2.0) * Jet::variable(2, 3, 1);
  m.comp[1] = Jet::variable(2, 3, 1);
  JetMap inv = graph_invert(m);
  CHECK(std::abs(inv.comp[0].coeff({1, 0}) - Complex(1.0)) < 1e-14);
  CHECK(std::abs(inv.comp[0].coeff({0, 1}) + Complex(2.0)) < 1e-14);
  CHECK(std::abs(inv.comp[1].coeff({0, 1}) - Complex(1.0)) < 1e-14);
}

TEST_CASE("graph inversion round trip on random quadratic maps") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int vars = 2 + static_cast<int>(rng() % 4);
    JetMap m = JetMap::identity(vars, 3);
    for (int i = 0; i < vars; ++i) {
      Jet noise = random_jet(vars, 3, rng, 0.3);
      noise.coeff_id(0) = 0.0;
      // keep the linear part a small perturbation of the identity
      for (int k = 0; k < vars; ++k) {
        std::vector<int> mi(vars, 0);
        mi[k] = 1;
        noise.at(mi) *= 0.2;
      }
      m.comp[i] += noise;
    }
    JetMap inv = graph_invert(m);
    JetMap round = compose(m, inv);
    JetMap id = JetMap::identity(vars, 3);
    for (int i = 0; i < vars; ++i) CHECK(max_diff(round.comp[i], id.comp[i]) < 1e-10);
  }
}

TEST_CASE("singular linearization rejected") {
  JetMap m(2, 3, 2);
  m.comp[0] = Jet::variable(2, 3, 0);
  m.comp[1] = Jet::variable(2, 3, 0);  // rank 1
  CHECK_THROWS_AS(graph_invert(m), JetError);
}

TEST_CASE("zbar basis round trip and readout") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Jet j = random_jet(4, 3, rng);
    Jet rt = from_zbar_basis(to_zbar_basis(j));
    CHECK(max_diff(rt, j) < 1e-13);
  }

  // |z1|^2 = x1^2 + y1^2 has zbar coefficient 1 at z1*z1bar
  Jet h(3, 3);
  h.at({2, 0, 0}) = 1.0;
  h.at({0, 2, 0}) = 1.0;
  Jet zb = to_zbar_basis(h);
  CHECK(std::abs(zb.coeff({1, 1, 0}) - Complex(1.0)) < 1e-14);
  CHECK(std::abs(zb.coeff({2, 0, 0})) < 1e-14);
  CHECK(std::abs(zb.coeff({0, 2, 0})) < 1e-14);

  // z1bar^2 expands to (x1^2 - y1^2) - i 2 x1 y1
  Jet g(3, 3);
  g.at({0, 2, 0}) = 1.0;  // zbar-basis slot
  Jet real = from_zbar_basis(g);
  CHECK(std::abs(real.coeff({2, 0, 0}) - Complex(1.0)) < 1e-14);
  CHECK(std::abs(real.coeff({0, 2, 0}) + Complex(1.0)) < 1e-14);
  CHECK(std::abs(real.coeff({1, 1, 0}) - Complex(0.0, -2.0)) < 1e-14);
}

TEST_CASE("wirtinger operators") {
  // d/dzbar of z1^2 = 0, d/dzbar of |z1|^2 = z1
  Jet z1 = Jet::variable(2, 3, 0) + Jet::variable(2, 3, 1, Complex(0, 1));
  Jet zsq = z1 * z1;
  CHECK(wirtinger_zbar(zsq).max_abs() < 1e-15);
  Jet zz = z1 * z1.conjugated();
  Jet d = wirtinger_zbar(zz);
  CHECK(max_diff(d, z1) < 1e-14);
}

TEST_CASE("associativity and composition associativity properties") {
  std::mt19937_64 rng(11);
  double worst_mul = 0.0, worst_comp = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int vars = 2 + static_cast<int>(rng() % 3);
    Jet a = random_jet(vars, 3, rng), b = random_jet(vars, 3, rng), c = random_jet(vars, 3, rng);
    worst_mul = std::max(worst_mul, max_diff((a * b) * c, a * (b * c)));

    auto rand_map = [&](int n) {
      JetMap m(n, 3, n);
      for (auto& comp : m.comp) {
        comp = random_jet(n, 3, rng, 0.5);
        comp.coeff_id(0) = 0.0;
      }
      return m;
    };
    JetMap f = rand_map(vars), g = rand_map(vars), h = rand_map(vars);
    JetMap lhs = compose(compose(f, g), h);
    JetMap rhs = compose(f, compose(g, h));
    for (int i = 0; i < vars; ++i) worst_comp = std::max(worst_comp, max_diff(lhs.comp[i], rhs.comp[i]));
  }
  CHECK(worst_mul < 1e-12);
  CHECK(worst_comp < 1e-12);
}

TEST_CASE("derivative and evaluation agree with finite differences") {
  std::mt19937_64 rng(3);
  Jet j = random_jet(3, 3, rng);
  std::vector<double> x = {0.11, -0.07, 0.03};
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Complex fd = (j.eval(xp) - j.eval(xm)) / (2 * h);
    Complex an = j.derivative(k).eval(x);
    CHECK(std::abs(fd - an) < 1e-8);
  }
}
