#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "psvrg/error.hpp"
#include "psvrg/losses.hpp"
#include "psvrg/prox.hpp"

using namespace psvrg;

TEST_CASE("logistic Lipschitz bound is ||a||^2/4 (+ l2 in the smooth part)") {
  const Example unit{SparseVector::from_dense(std::vector<double>{0.6, 0.0, 0.8}), 1.0};
  CHECK(logistic_component(unit, 0.0, SplittingMode::L2InSmooth)->lipschitz_bound() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(logistic_component(unit, 0.5, SplittingMode::L2InSmooth)->lipschitz_bound() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(logistic_component(unit, 0.5, SplittingMode::L2InReg)->lipschitz_bound() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("logistic value and gradient at the origin") {
  std::mt19937_64 gen(2);
  for (double b : {1.0, -1.0}) {
    const auto a = oracle::random_vec(gen, 5);
    const Example ex{SparseVector::from_dense(a), b};
    const auto c = logistic_component(ex, 0.0, SplittingMode::L2InReg);
    const DenseVector zero(5, 0.0);
    CHECK(c->value(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const auto g = c->gradient(zero);
    for (int j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(-b * a[j] / 2.0).epsilon(1e-15));
  }
}

TEST_CASE("logistic gradients match finite differences and stay finite for huge margins") {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto ex = oracle::random_examples(gen, 1, 6)[0];
    for (auto mode : {SplittingMode::L2InSmooth, SplittingMode::L2InReg}) {
      const auto c = logistic_component(ex, 0.3, mode);
      const auto x = oracle::random_vec(gen, 6);
      const auto fd = oracle::fd_gradient([&](const oracle::Vec& z) { return c->value(z); }, x);
      CHECK(oracle::rel_err(c->gradient(x), fd) <= 1e-5);
    }
  }
  const Example big{SparseVector::from_dense(std::vector<double>{1000.0}), 1.0};
  const auto c = logistic_component(big, 0.0, SplittingMode::L2InReg);
  for (double x : {-5.0, 5.0}) {
    CHECK(std::isfinite(c->value(DenseVector{x})));
    CHECK(std::isfinite(c->gradient(DenseVector{x})[0]));
  }
  CHECK(c->value(DenseVector{-5.0}) == doctest::Approx(5000.0));
}

TEST_CASE("invalid logistic label") {
  const Example ex{SparseVector::from_dense(std::vector<double>{1.0}), 0.0};
  CHECK_THROWS_AS(logistic_component(ex, 0.0, SplittingMode::L2InReg), ArgumentError);
  CHECK_THROWS_AS(least_squares_component(ex, -1.0, SplittingMode::L2InReg), ArgumentError);
}

TEST_CASE("least-squares hand values") {
  const Example ex{SparseVector::from_dense(std::vector<double>{1.0, 0.0}), 0.0};
  const auto c = least_squares_component(ex, 0.0, SplittingMode::L2InReg);
  const DenseVector x{2.0, 3.0};
  CHECK(c->value(x) == 2.0);
  CHECK(c->gradient(x) == DenseVector{2.0, 0.0});
  // Exact fit leaves only the ridge term under L2InSmooth.
  const Example fit{SparseVector::from_dense(std::vector<double>{1.0, 2.0}), 8.0};
  const auto r = least_squares_component(fit, 0.4, SplittingMode::L2InSmooth);
  CHECK(r->value(x) == doctest::Approx(0.5 * 0.4 * 13.0).epsilon(1e-15));
}

TEST_CASE("least-squares Lipschitz bound dominates the Hessian spectrum (power iteration)") {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = oracle::random_vec(gen, 7);
    const double l2 = 0.25 * rep;
    const Example ex{SparseVector::from_dense(a), 1.0};
    const auto c = least_squares_component(ex, l2, SplittingMode::L2InSmooth);
    std::vector<oracle::Vec> h(7, oracle::Vec(7));
    for (int r = 0; r < 7; ++r)
      for (int s = 0; s < 7; ++s) h[r][s] = a[r] * a[s] + (r == s ? l2 : 0.0);
    CHECK(oracle::power_iteration(h) <= c->lipschitz_bound() * (1 + 1e-12));
    CHECK(oracle::power_iteration(h) >= c->lipschitz_bound() * (1 - 1e-9));
  }
}

TEST_CASE("both splittings give the same objective and declared moduli") {
  std::mt19937_64 gen(8);
  const auto ex = oracle::random_examples(gen, 30, 5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = oracle::random_vec(gen, 5);
    for (auto loss : {LossKind::Logistic, LossKind::LeastSquares}) {
      const auto a = make_erm_problem(ex, 5, loss, 0.1, 0.3, SplittingMode::L2InSmooth);
      const auto b = make_erm_problem(ex, 5, loss, 0.1, 0.3, SplittingMode::L2InReg);
      CHECK(a.objective(x) == doctest::Approx(b.objective(x)).epsilon(1e-13));
    }
  }
  const auto a = make_erm_problem(ex, 5, LossKind::Logistic, 0.1, 0.3, SplittingMode::L2InSmooth);
  const auto b = make_erm_problem(ex, 5, LossKind::Logistic, 0.1, 0.3, SplittingMode::L2InReg);
  CHECK(a.mu_f() == 0.3);
  CHECK(a.mu_r() == 0.0);
  CHECK(b.mu_f() == 0.0);
  CHECK(b.mu_r() == 0.3);
}

TEST_CASE("gradient difference cancels exactly at equal points") {
  std::mt19937_64 gen(10);
  const auto ex = oracle::random_examples(gen, 1, 9)[0];
  const auto c = logistic_component(ex, 0.7, SplittingMode::L2InSmooth);
  const auto x = oracle::random_vec(gen, 9), y = oracle::random_vec(gen, 9);
  DenseVector base = oracle::random_vec(gen, 9), out = base;
  c->add_gradient_difference(x, x, 3.0, out);
  CHECK(out == base);
  c->add_gradient_difference(x, y, 1.0, out);
  const auto gx = c->gradient(x), gy = c->gradient(y);
  for (int j = 0; j < 9; ++j) CHECK(out[j] - base[j] == doctest::Approx(gx[j] - gy[j]).epsilon(1e-12));
}

TEST_CASE("zero feature rows get the documented Lipschitz floor") {
  const Example zero{SparseVector(4), -1.0};
  CHECK(logistic_component(zero, 0.0, SplittingMode::L2InReg)->lipschitz_bound() == kZeroRowLipschitzFloor);
  CHECK(least_squares_component(zero, 0.0, SplittingMode::L2InSmooth)->lipschitz_bound() == kZeroRowLipschitzFloor);
}
