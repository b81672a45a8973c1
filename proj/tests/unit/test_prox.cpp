#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "psvrg/error.hpp"
#include "psvrg/prox.hpp"

using namespace psvrg;

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) s += (long double)(a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(static_cast<double>(s));
}

}  // namespace

TEST_CASE("soft-threshold hand values") {
  CHECK(prox_l1(std::vector<double>{2.0, -0.5}, 1.0, 1.0) == DenseVector{1.0, 0.0});
  const DenseVector y{3.0, -1.0, 0.25, -7.0};
  CHECK(prox_l1(y, 2.0, 0.0) == y);
  // A tie maps to +0, not -0.
  const auto tie = prox_l1(std::vector<double>{-1.0, 1.0}, 1.0, 1.0);
  CHECK_FALSE(std::signbit(tie[0]));
  CHECK_FALSE(std::signbit(tie[1]));
}

TEST_CASE("ridge shrink hand values") {
  const DenseVector z{1.5, -2.0, 0.0};
  CHECK(prox_sq_l2(z, 3.0, 0.0) == z);
  const double t = 0.5, l2 = 3.0;
  DenseVector y(3);
  for (int j = 0; j < 3; ++j) y[j] = (1 + t * l2) * z[j];
  const auto out = prox_sq_l2(y, t, l2);
  for (int j = 0; j < 3; ++j) CHECK(out[j] == doctest::Approx(z[j]).epsilon(1e-15));
}

TEST_CASE("elastic net reduces to its parts") {
  std::mt19937_64 gen(1);
  const auto y = oracle::random_vec(gen, 20, 2.0);
  CHECK(prox_elastic_net(y, 0.7, 0.4, 0.0) == prox_l1(y, 0.7, 0.4));
  CHECK(prox_elastic_net(y, 0.7, 0.0, 1.3) == prox_sq_l2(y, 0.7, 1.3));
}

TEST_CASE("box projection") {
  const DenseVector lo{0.0}, hi{1.0};
  CHECK(prox_box(std::vector<double>{5.0}, 1.0, lo, hi) == DenseVector{1.0});
  CHECK(prox_box(std::vector<double>{0.3}, 9.0, lo, hi) == DenseVector{0.3});
  CHECK(prox_box(std::vector<double>{-2.0}, 0.1, lo, hi) == DenseVector{0.0});
  CHECK_THROWS_AS(BoxIndicator(DenseVector{1.0}, DenseVector{0.0}), ArgumentError);
  const BoxIndicator box(2, -1.0, 1.0);
  CHECK(box.value(std::vector<double>{0.0, 1.0}) == 0.0);
  CHECK(box.value(std::vector<double>{0.0, 2.0}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("argument validation") {
  const DenseVector y{1.0};
  CHECK_THROWS_AS(prox_l1(y, -1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(prox_l1(y, 1.0, -1.0), ArgumentError);
  CHECK_THROWS_AS(prox_sq_l2(y, 1.0, -1.0), ArgumentError);
  CHECK_THROWS_AS(prox_elastic_net(y, -0.1, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(ElasticNet(-1.0, 0.0), ArgumentError);
  ZeroRegularizer zero;
  CHECK_THROWS_AS(prox_eps_shifted(zero, 0.0, y, 1.0), ArgumentError);
  CHECK_THROWS_AS(prox_eps_shifted(zero, 1.0, y, 0.0), ArgumentError);
}

TEST_CASE("eps-shifted prox") {
  std::mt19937_64 gen(2);
  const auto y = oracle::random_vec(gen, 10);
  ZeroRegularizer zero;
  const auto shrunk = prox_eps_shifted(zero, 0.5, y, 2.0);
  for (int j = 0; j < 10; ++j) CHECK(shrunk[j] == doctest::Approx(y[j] / 2.0).epsilon(1e-15));
  const ElasticNet en(0.3, 0.1);
  const auto limit = prox_eps_shifted(en, 1e-12, y, 0.8);
  const auto base = en.prox(y, 0.8);
  CHECK(dist(limit, base) <= 1e-9);
  const EpsShifted shifted(std::make_shared<ElasticNet>(0.3, 0.1), 0.2);
  CHECK(shifted.mu() == doctest::Approx(0.3));
  CHECK(shifted.prox(y, 0.8) == prox_eps_shifted(en, 0.2, y, 0.8));
}

TEST_CASE("prox output may alias its input") {
  std::mt19937_64 gen(3);
  auto y = oracle::random_vec(gen, 37);
  const ElasticNet en(0.2, 0.5);
  const auto expected = en.prox(y, 1.1);
  en.prox_into(y, 1.1, y);
  CHECK(y == expected);
}

TEST_CASE("all proxes are nonexpansive") {
  std::mt19937_64 gen(4);
  const std::vector<std::shared_ptr<const Regularizer>> regs{
      std::make_shared<ElasticNet>(0.5, 0.0), std::make_shared<ElasticNet>(0.0, 2.0),
      std::make_shared<ElasticNet>(0.5, 2.0), std::make_shared<BoxIndicator>(6, -0.5, 0.75),
      std::make_shared<EpsShifted>(std::make_shared<ElasticNet>(0.1, 0.0), 0.3)};
  std::uniform_real_distribution<double> tdist(0.0, 3.0);
  for (const auto& reg : regs) {
    for (int trial = 0; trial < 2000; ++trial) {
      const auto a = oracle::random_vec(gen, 6, 2.0), b = oracle::random_vec(gen, 6, 2.0);
      const double t = tdist(gen);
      CHECK(dist(reg->prox(a, t), reg->prox(b, t)) <= dist(a, b) * (1 + 1e-15) + 1e-15);
      CHECK(std::isfinite(reg->value(reg->prox(a, t))));
    }
  }
}

TEST_CASE("elastic net prox matches per-coordinate numeric minimization") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double y = oracle::random_vec(gen, 1, 3.0)[0];
    const double t = u(gen), l1 = u(gen), l2 = u(gen);
    const double ref = oracle::minimize_1d(
        [&](double x) { return 0.5 * (x - y) * (x - y) + t * (l1 * std::fabs(x) + 0.5 * l2 * x * x); },
        -10.0, 10.0);
    CHECK(std::fabs(prox_elastic_net(std::vector<double>{y}, t, l1, l2)[0] - ref) <= 1e-6);
  }
}
