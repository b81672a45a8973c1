#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "psvrg/data_io.hpp"
#include "psvrg/error.hpp"
#include "psvrg/losses.hpp"
#include "psvrg/prox.hpp"
#include "psvrg/solvers.hpp"
#include "psvrg/theory.hpp"

using namespace psvrg;

namespace {

Dataset small_logistic(std::size_t n = 60, std::size_t d = 8, std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  return generate_synthetic(spec).dataset;
}

Dataset small_ridge(std::size_t n = 50, std::size_t d = 6, double corr = 0.0) {
  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.correlation = corr;
  spec.label_model = LabelModel::LinearNoise;
  spec.seed = 7;
  return generate_synthetic(spec).dataset;
}

SvrgConfig svrg_config(const CompositeProblem& p, double theta, std::size_t m, std::size_t stages,
                       std::uint64_t seed = 1) {
  const auto q = uniform_sampling(p.size());
  return SvrgConfig{theta / l_q(q, p.lipschitz()), m, stages, q, seed};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Objective of the last trace point at or before `passes`.
double objective_at(const SolverResult& r, double passes) {
  double obj = r.trace.front().objective;
  for (const auto& p : r.trace)
    if (p.effective_passes <= passes + 1e-9) obj = p.objective;
  return obj;
}

}  // namespace

TEST_CASE("cost accounting is S(n + 2m) and stage snapshots land on full passes") {
  const auto ds = small_logistic(40);
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 1e-2,
                                  SplittingMode::L2InReg);
  for (std::size_t m : {1u, 13u, 40u, 80u}) {
    const auto cfg = svrg_config(p, 0.1, m, 5);
    const auto r = prox_svrg(p, cfg, DenseVector(ds.dimension, 0.0));
    CHECK(r.gradient_evaluations == 5 * (40 + 2 * m));
    CHECK(r.snapshots.size() == 5);
    REQUIRE(r.snapshot_trace.size() == 6);
    for (std::size_t s = 0; s <= 5; ++s)
      CHECK(r.snapshot_trace[s].effective_passes == doctest::Approx(s * (40.0 + 2.0 * m) / 40.0));
    for (std::size_t k = 1; k < r.trace.size(); ++k)
      CHECK(r.trace[k].effective_passes >= r.trace[k - 1].effective_passes);
    // Each full-gradient evaluation appears as its own pass on the trace.
    const double first_full = 1.0;
    CHECK(std::any_of(r.trace.begin(), r.trace.end(),
                      [&](const TracePoint& t) { return t.effective_passes == first_full; }));
  }
}

TEST_CASE("first inner step of every stage uses exactly the snapshot gradient") {
  const auto ds = small_logistic();
  for (auto mode : {SplittingMode::L2InSmooth, SplittingMode::L2InReg}) {
    const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 0.05, mode);
    auto cfg = svrg_config(p, 0.1, 30, 6);
    cfg.sampling = lipschitz_weighted_sampling(p.lipschitz());
    std::size_t checked = 0;
    cfg.observer = [&](const InnerStep& st) {
      if (st.k != 1) return;
      CHECK(std::equal(st.v.begin(), st.v.end(), st.snapshot_gradient.begin()));
      CHECK(std::equal(st.x_prev.begin(), st.x_prev.end(), st.snapshot.begin()));
      ++checked;
    };
    std::mt19937_64 gen(1);
    prox_svrg(p, cfg, oracle::random_vec(gen, ds.dimension));
    CHECK(checked == 6);
  }
}

TEST_CASE("one-component SVRG follows the Prox-FG trajectory") {
  const auto ds = small_logistic(1, 5);
  const auto p = make_erm_problem(ds.examples, 5, LossKind::Logistic, 0.01, 0.1, SplittingMode::L2InSmooth);
  const double eta = 1.0 / p.lipschitz_mean();
  auto cfg = SvrgConfig{eta, 7, 4, uniform_sampling(1), 9, SnapshotRule::LastIterate};
  const DenseVector x0{0.3, -0.2, 0.5, 1.0, -1.0};
  const auto svrg = prox_svrg(p, cfg, x0);
  const auto fg = prox_fg(p, FullGradientOptions{eta, 28}, x0);
  CHECK(oracle::rel_err(svrg.x, fg.x) <= 1e-12);

  const auto sg = prox_sg(p, StepSchedule::constant(eta), 28, x0, uniform_sampling(1), 4);
  CHECK(oracle::rel_err(sg.x, fg.x) <= 1e-14);
}

TEST_CASE("all-zero data with R = 0 keeps every method at the start") {
  std::vector<Example> ex(5, Example{SparseVector(3), 1.0});
  const auto p = make_erm_problem(ex, 3, LossKind::LeastSquares, 0.0, 0.0, SplittingMode::L2InReg);
  const DenseVector x0{1.0, -2.0, 3.0};
  CHECK(prox_sg(p, StepSchedule::constant(0.5), 50, x0, uniform_sampling(5), 1).x == x0);
  CHECK(prox_svrg(p, SvrgConfig{0.5, 10, 3, uniform_sampling(5), 1}, x0).x == x0);
}

TEST_CASE("Prox-FG: fixed point and one-step quadratic") {
  const auto ds = small_ridge();
  const double l2 = 0.1;
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::LeastSquares, 0.0, l2,
                                  SplittingMode::L2InSmooth);
  const auto x_star = ridge_optimum(ds.examples, ds.dimension, l2);
  const double eta = 1.0 / p.lipschitz_mean();
  CHECK(oracle::rel_err(prox_fg(p, FullGradientOptions{eta, 1}, x_star).x, x_star) <= 1e-12);
  CHECK(oracle::rel_err(prox_afg(p, FullGradientOptions{eta, 20}, x_star).x, x_star) <= 1e-12);

  std::vector<Example> one{{SparseVector::from_dense(std::vector<double>{1.0}), 0.0}};
  const auto q = make_erm_problem(one, 1, LossKind::LeastSquares, 0.0, 0.0, SplittingMode::L2InReg);
  CHECK(prox_fg(q, FullGradientOptions{1.0, 1}, DenseVector{5.0}).x == DenseVector{0.0});
}

TEST_CASE("Prox-AFG reaches gap 1e-10 in fewer passes than Prox-FG on ridge") {
  const auto ds = small_ridge(100, 20, 0.9);
  const double l2 = 1e-3;
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::LeastSquares, 0.0, l2,
                                  SplittingMode::L2InSmooth);
  const double p_star = p.objective(ridge_optimum(ds.examples, ds.dimension, l2));
  FullGradientOptions opt{1.0 / p.lipschitz_mean(), 20000};
  opt.trace.p_star = p_star;
  auto passes_to = [](const SolverResult& r) {
    for (const auto& t : r.trace)
      if (*t.gap <= 1e-10) return t.effective_passes;
    return 1e300;
  };
  const double afg = passes_to(prox_afg(p, opt, DenseVector(ds.dimension, 0.0)));
  const double fg = passes_to(prox_fg(p, opt, DenseVector(ds.dimension, 0.0)));
  CHECK(afg < 1e300);
  CHECK(afg < fg);
}

TEST_CASE("restarted Prox-AFG iteration counts scale like sqrt(condition number)") {
  // Diagonal quadratic with Hessian eigenvalues spread over [mu, 1].
  const std::size_t d = 20;
  std::vector<double> log_kappa, log_iters;
  for (double kappa : {1e2, 4e2, 1.6e3, 6.4e3, 2.56e4}) {
    std::vector<Example> ex;
    for (std::size_t j = 0; j < d; ++j) {
      const double lam = std::pow(kappa, -static_cast<double>(j) / (d - 1));
      std::vector<double> a(d, 0.0);
      a[j] = std::sqrt(lam * d);
      // Optimum x*_j = 1/sqrt(lam), so every mode starts with the same share of the gap.
      ex.push_back({SparseVector::from_dense(a), std::sqrt(static_cast<double>(d))});
    }
    const auto p = make_erm_problem(ex, d, LossKind::LeastSquares, 0.0, 0.0, SplittingMode::L2InReg);
    FullGradientOptions opt{1.0, 200000};
    opt.restart = true;
    opt.trace.p_star = 0.0;
    const auto r = prox_afg(p, opt, DenseVector(d, 0.0));
    const double g0 = *r.trace.front().gap;
    double iters = 0;
    for (const auto& t : r.trace)
      if (*t.gap <= 1e-6 * g0) {
        iters = t.effective_passes;
        break;
      }
    REQUIRE(iters > 0);
    log_kappa.push_back(std::log(kappa));
    log_iters.push_back(std::log(iters));
  }
  const double mx = std::accumulate(log_kappa.begin(), log_kappa.end(), 0.0) / log_kappa.size();
  const double my = std::accumulate(log_iters.begin(), log_iters.end(), 0.0) / log_iters.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < log_kappa.size(); ++k) {
    sxy += (log_kappa[k] - mx) * (log_iters[k] - my);
    sxx += (log_kappa[k] - mx) * (log_kappa[k] - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope >= 0.4);
  CHECK(slope <= 0.6);
}

TEST_CASE("determinism: same seed gives identical results, different seeds differ") {
  const auto ds = small_logistic();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 1e-2,
                                  SplittingMode::L2InReg);
  auto cfg = svrg_config(p, 0.1, 120, 4, 77);
  cfg.trace.variance = VarianceTracking::On;
  const DenseVector x0(ds.dimension, 0.0);
  const auto a = prox_svrg(p, cfg, x0), b = prox_svrg(p, cfg, x0);
  CHECK(a.x == b.x);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].objective == b.trace[k].objective);
    CHECK(a.trace[k].variance_estimate == b.trace[k].variance_estimate);
  }
  cfg.seed = 78;
  CHECK(prox_svrg(p, cfg, x0).x != a.x);
}

TEST_CASE("variance estimate is zero whenever the iterate equals the snapshot") {
  const auto ds = small_logistic();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 1e-2,
                                  SplittingMode::L2InSmooth);
  auto cfg = svrg_config(p, 0.1, 60, 3);
  cfg.trace.variance = VarianceTracking::On;
  const auto r = prox_svrg(p, cfg, DenseVector(ds.dimension, 0.0));
  int zeros = 0;
  for (const auto& t : r.trace) {
    REQUIRE(t.variance_estimate.has_value());
    CHECK(*t.variance_estimate >= 0.0);
    zeros += *t.variance_estimate == 0.0;
  }
  CHECK(zeros >= 3);
}

TEST_CASE("iterates stay inside a box domain") {
  const auto ds = small_logistic();
  const auto base = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 0.0, 0.0,
                                     SplittingMode::L2InReg);
  const auto p = base.with_regularizer(std::make_shared<BoxIndicator>(ds.dimension, -0.05, 0.05), 0.0);
  auto cfg = svrg_config(p, 0.2, 30, 5);
  cfg.observer = [&](const InnerStep& st) {
    for (double v : st.x_prev) CHECK((v >= -0.05 && v <= 0.05));
  };
  const auto r = prox_svrg(p, cfg, DenseVector(ds.dimension, 0.0));
  for (const auto& t : r.trace) CHECK(std::isfinite(t.objective));
  CHECK_THROWS_AS(prox_svrg(p, cfg, DenseVector(ds.dimension, 1.0)), ArgumentError);
}

TEST_CASE("validation, warnings and divergence") {
  const auto ds = small_ridge();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::LeastSquares, 0.0, 0.1,
                                  SplittingMode::L2InSmooth);
  const DenseVector x0(ds.dimension, 0.0);
  auto cfg = svrg_config(p, 0.1, 10, 2);
  CHECK_THROWS_AS(prox_svrg(p, cfg, DenseVector(ds.dimension + 1, 0.0)), ArgumentError);
  auto bad = cfg;
  bad.stage_length = 0;
  CHECK_THROWS_AS(prox_svrg(p, bad, x0), ArgumentError);
  bad = cfg;
  bad.step = -1.0;
  CHECK_THROWS_AS(prox_svrg(p, bad, x0), ArgumentError);
  bad = cfg;
  bad.sampling = uniform_sampling(3);
  CHECK_THROWS_AS(prox_svrg(p, bad, x0), ArgumentError);
  CHECK_THROWS_AS(prox_sg(p, StepSchedule::inverse_mu_k(0.0), 10, x0, cfg.sampling, 1), ArgumentError);

  CHECK(prox_svrg(p, cfg, x0).warnings.empty() == false);  // m = 10 is far too short for rho < 1
  auto long_cfg = svrg_config(p, 0.1, 5000, 1);
  CHECK(prox_svrg(p, long_cfg, x0).warnings.empty());
  auto big = svrg_config(p, 0.3, 5000, 1);
  CHECK_FALSE(prox_svrg(p, big, x0).warnings.empty());

  auto wild = svrg_config(p, 500.0, 50, 20);
  try {
    prox_svrg(p, wild, x0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() >= 1);
  }
  CHECK_THROWS_AS(prox_fg(p, FullGradientOptions{1e4, 1000}, x0), DivergenceError);
}

TEST_CASE("backtracking shrinks an oversized step and then converges") {
  const auto ds = small_ridge();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::LeastSquares, 0.0, 0.1,
                                  SplittingMode::L2InSmooth);
  FullGradientOptions opt{100.0 / p.lipschitz_mean(), 300};
  opt.backtracking = true;
  const auto r = prox_fg(p, opt, DenseVector(ds.dimension, 0.0));
  CHECK(r.final_step < opt.step);
  const auto x_star = ridge_optimum(ds.examples, ds.dimension, 0.1);
  CHECK(r.trace.back().objective - p.objective(x_star) <= 1e-10);
}

TEST_CASE("Prox-SVRG2 accounting and zero-pass degeneracy") {
  const auto ds = small_logistic();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 1e-2,
                                  SplittingMode::L2InReg);
  const auto cfg = svrg_config(p, 0.1, 120, 3, 5);
  const DenseVector x0(ds.dimension, 0.0);
  const auto plain = prox_svrg(p, cfg, x0);
  const auto zero = prox_svrg2(p, cfg, x0, 0);
  CHECK(zero.x == plain.x);
  CHECK(zero.gradient_evaluations == plain.gradient_evaluations);
  const auto hybrid = prox_svrg2(p, cfg, x0, 1);
  CHECK(hybrid.snapshot_trace.front().effective_passes == 1.0);
  CHECK(hybrid.gradient_evaluations == 60 + 3 * (60 + 240));
}

TEST_CASE("Prox-SVRG2 is ahead of Prox-SVRG after two passes on a poorly conditioned instance") {
  SyntheticSpec spec;
  spec.n = 400;
  spec.d = 40;
  spec.correlation = 0.5;
  spec.seed = 12;
  const auto ds = generate_synthetic(spec).dataset;
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 0.0, 1e-5,
                                  SplittingMode::L2InReg);
  std::vector<double> plain, hybrid;
  const DenseVector x0(ds.dimension, 0.0);
  for (std::uint64_t seed = 1; seed <= 11; ++seed) {
    const auto cfg = svrg_config(p, 0.1, 2 * ds.size(), 1, seed);
    plain.push_back(objective_at(prox_svrg(p, cfg, x0), 2.0));
    hybrid.push_back(objective_at(prox_svrg2(p, cfg, x0, 1), 2.0));
  }
  CHECK(median(hybrid) < median(plain));
}

TEST_CASE("Prox-SG with a 1/(mu k) schedule stays under a fitted C/k envelope") {
  const auto ds = small_logistic(200, 10);
  const double l2 = 0.1;
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 0.0, l2,
                                  SplittingMode::L2InSmooth);
  const double p_star = reference_solve(p).p_star;
  TraceOptions tr;
  tr.p_star = p_star;
  std::vector<std::vector<double>> gaps;
  for (std::uint64_t seed = 1; seed <= 11; ++seed) {
    const auto r = prox_sg(p, StepSchedule::inverse_mu_k(l2), 60 * ds.size(),
                           DenseVector(ds.dimension, 0.0), uniform_sampling(ds.size()), seed, tr);
    std::vector<double> g;
    for (const auto& t : r.trace) g.push_back(*t.gap);
    gaps.push_back(g);
  }
  std::vector<double> med(gaps[0].size());
  for (std::size_t k = 0; k < med.size(); ++k) {
    std::vector<double> col;
    for (const auto& g : gaps) col.push_back(g[k]);
    med[k] = median(col);
  }
  double c = 0.0;
  for (std::size_t k = 5; k <= 10; ++k) c = std::max(c, k * med[k]);
  for (std::size_t k = 11; k < med.size(); ++k) CHECK(med[k] <= 2.0 * c / k);
  CHECK(med.back() < med[5]);
}

TEST_CASE("eps-augmented solver reports the original objective and collapses for huge eps") {
  const auto ds = small_logistic();
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 1e-3, 0.0,
                                  SplittingMode::L2InReg);
  const auto q = uniform_sampling(p.size());
  const double eps = 1e6;
  const double lq = l_q(q, p.lipschitz());
  SvrgConfig cfg{0.1 / lq, 100, 3, q, 2};
  const DenseVector x0(ds.dimension, 1.0);
  const auto r = solve_nonstrongly_convex(p, eps, cfg, x0);
  CHECK(oracle::norm(r.x) <= 1e-3);
  CHECK(r.snapshot_trace.back().objective == p.objective(r.snapshots.back()));
  CHECK(r.trace.back().objective != r.trace.front().objective);
  CHECK_THROWS_AS(solve_nonstrongly_convex(p, 0.0, cfg, x0), ArgumentError);
}

TEST_CASE("adding eps to a strongly convex base lowers rho and does not slow convergence") {
  const auto ds = small_logistic(100, 10);
  const auto p = make_erm_problem(ds.examples, ds.dimension, LossKind::Logistic, 0.0, 0.01,
                                  SplittingMode::L2InReg);
  const double eps = 0.01;
  const auto q = uniform_sampling(p.size());
  const double lq = l_q(q, p.lipschitz());
  const double eta = 0.1 / lq;
  const std::size_t m = 2 * ds.size();
  CHECK(convergence_factor(p.mu() + eps, lq, eta, m).rho < convergence_factor(p.mu(), lq, eta, m).rho);

  const auto aug = p.with_regularizer(std::make_shared<EpsShifted>(p.regularizer_ptr(), eps), p.mu_r() + eps);
  const double base_star = reference_solve(p).p_star;
  const double aug_star = reference_solve(aug).p_star;
  const DenseVector x0(ds.dimension, 0.0);
  std::vector<double> base_ratio, aug_ratio;
  for (std::uint64_t seed = 1; seed <= 11; ++seed) {
    SvrgConfig cfg{eta, m, 4, q, seed};
    const auto rb = prox_svrg(p, cfg, x0);
    const auto ra = prox_svrg(aug, cfg, x0);
    base_ratio.push_back((p.objective(rb.x) - base_star) / (p.objective(x0) - base_star));
    aug_ratio.push_back((aug.objective(ra.x) - aug_star) / (aug.objective(x0) - aug_star));
  }
  CHECK(median(aug_ratio) <= median(base_ratio));
}
