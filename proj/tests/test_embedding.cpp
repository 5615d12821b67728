#include <doctest.h>

#include "test_support.hpp"

#include <crsing/fixtures.hpp>

using namespace crsing;
using namespace crsing::testing;

TEST_CASE("complexify pairs interleaved rows") {
  Eigen::MatrixXd J(4, 2);
  J << 1, 0, 0, 1, 0, 0, 0, 0;
  Eigen::MatrixXcd M = complexify(J);
  CHECK(std::abs(M(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(M(0, 1) - Complex(0, 1)) < 1e-15);
  CHECK(M.row(1).norm() < 1e-15);

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(6, 3);
  CHECK(complexify(Z).norm() == 0.0);

  Eigen::MatrixXd odd(3, 2);
  CHECK_THROWS_AS(complexify(odd), EmbeddingError);
}

TEST_CASE("model evaluation matches the display") {
  EmbeddingMap f = coffman_model(4, 5);
  std::vector<double> x = {1.0, 0.0, 0.0, 0.0};
  Eigen::VectorXcd v = f.eval(x);
  CHECK(std::abs(v(0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(v(1)) < 1e-15);
  CHECK(std::abs(v(2)) < 1e-15);
  CHECK(std::abs(v(3) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(v(4) - Complex(1, 0)) < 1e-15);

  // brute-force monomial summation oracle at a random point
  std::mt19937_64 rng(17);
  std::vector<double> y(4);
  for (auto& c : y) c = random_real(rng);
  for (int j = 0; j < 5; ++j) {
    Complex direct(0.0);
    f.comp[j].for_each_term([&](std::span<const int> pw, Complex c) {
      double mono = 1.0;
      for (int k = 0; k < 4; ++k)
        for (int e = 0; e < pw[k]; ++e) mono *= y[k];
      direct += c * mono;
    });
    CHECK(std::abs(direct - f.comp[j].eval(y)) < 1e-13);
  }
}

TEST_CASE("gauss map agrees with central differences") {
  std::mt19937_64 rng(23);
  EmbeddingMap f = random_general_position(coffman_model(4, 5), 0.1, 99);
  std::vector<double> x(4);
  for (auto& c : x) c = 0.3 * random_real(rng);
  const Eigen::MatrixXcd A = gauss_map(f, x).matrix;
  const double h = 1e-5;
  for (int k = 0; k < 4; ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Eigen::VectorXcd col = (f.eval(xp) - f.eval(xm)) / (2 * h);
    CHECK((A.col(k) - col).norm() < 1e-6);
  }
}

TEST_CASE("numerical rank margins") {
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(3, 3);
  RankResult r = numerical_rank(I, 1e-8);
  CHECK(r.rank == 3);
  CHECK(r.margin == doctest::Approx(1.0));

  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 1e-12;
  r = numerical_rank(D, 1e-8);
  CHECK(r.rank == 1);
  CHECK(r.gap == doctest::Approx(1e-12));

  CHECK_THROWS_AS(numerical_rank(Eigen::MatrixXcd(), 1e-8), LinalgError);
  CHECK_THROWS_AS(numerical_rank(I, 2.0), LinalgError);

  // the model differential at the singular point drops complex rank to m-1
  EmbeddingMap f = coffman_model(4, 5);
  std::vector<double> zero(4, 0.0);
  const Eigen::MatrixXcd A = gauss_map(f, zero).matrix;
  CHECK(numerical_rank(A, 1e-8).rank == 3);
}

TEST_CASE("cr order basics") {
  std::vector<double> zero4(4, 0.0);
  CHECK(cr_order(totally_real_inclusion(4, 6), zero4) == 0);
  CHECK(cr_order(coffman_model(4, 5), zero4) == 1);

  // (z1, conj(z1)^2) in C^2 has an order-1 point at 0
  EmbeddingMap g(2, 2);
  Polynomial z1 = Polynomial::variable(2, 0) + Polynomial::variable(2, 1, Complex(0, 1));
  g.comp[0] = z1;
  g.comp[1] = z1.conjugated() * z1.conjugated();
  std::vector<double> zero2(2, 0.0);
  CHECK(cr_order(g, zero2) == 1);

  // a rank-deficient chart map is reported as a non-immersion, not order m
  EmbeddingMap bad(2, 2);
  bad.comp[0] = Polynomial::variable(2, 0);
  bad.comp[1] = Polynomial::variable(2, 0);
  CHECK_THROWS_AS(cr_order(bad, zero2), NotImmersionError);
}

TEST_CASE("cr order bounds and invariance") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 12; ++trial) {
    EmbeddingMap f = random_general_position(coffman_model(4, 5), 0.05, 1000 + trial);
    std::vector<double> x(4);
    for (auto& c : x) c = 0.4 * random_real(rng);
    const int nu = cr_order(f, x);
    CHECK(nu >= 0);
    CHECK(nu <= 2);

    // postcompose with a random complex-linear map of the target
    Eigen::MatrixXcd U(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) U(i, j) = random_complex(rng, 1.0);
    U += 3.0 * Eigen::MatrixXcd::Identity(5, 5);
    AmbientOp op;
    op.kind = AmbientOp::Kind::Linear;
    op.linear = U;
    EmbeddingMap g = apply_ambient(op, f);
    CHECK(cr_order(g, x) == nu);

    // precompose with a random affine source diffeomorphism fixing x
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) S(i, j) += 0.2 * random_real(rng);
    std::vector<Polynomial> args;
    for (int k = 0; k < 4; ++k) {
      Polynomial a = Polynomial::constant(4, x[k]);
      for (int j = 0; j < 4; ++j) a += Polynomial::variable(4, j, S(k, j));
      args.push_back(a);
    }
    EmbeddingMap h(4, 5);
    for (int j = 0; j < 5; ++j) h.comp[j] = f.comp[j].substituted(args);
    std::vector<double> zero(4, 0.0);
    CHECK(cr_order(h, zero) == nu);
  }
}
