#include "psvrg/theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psvrg/error.hpp"
#include "psvrg/kernels.hpp"

namespace psvrg {
namespace {

std::optional<std::uint64_t> stages_for_ratio(double ratio, double rho) {
  if (ratio <= 1.0) return 0;
  const double s = std::ceil(std::log(ratio) / std::log(1.0 / rho));
  if (!std::isfinite(s)) return std::nullopt;
  return static_cast<std::uint64_t>(s);
}

long double dot_ld(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) s += static_cast<long double>(a[j]) * b[j];
  return s;
}

long double dist_sq_ld(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const long double t = static_cast<long double>(a[j]) - b[j];
    s += t * t;
  }
  return s;
}

void require_len(std::span<const double> x, std::size_t d, const char* what) {
  if (x.size() != d)
    throw ArgumentError(std::string(what) + " has length " + std::to_string(x.size()) +
                        ", expected " + std::to_string(d));
}

}  // namespace

std::optional<std::uint64_t> RateReport::stages_for_gap(double gap0, double eps) const {
  if (!(eps > 0.0) || !(gap0 >= 0.0)) throw ArgumentError("need eps > 0 and gap0 >= 0");
  if (!feasible) return std::nullopt;
  return stages_for_ratio(gap0 / eps, rho);
}

std::optional<std::uint64_t> RateReport::stages_high_prob(double gap0, double eps,
                                                          double delta) const {
  if (!(eps > 0.0) || !(gap0 >= 0.0)) throw ArgumentError("need eps > 0 and gap0 >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (!feasible) return std::nullopt;
  return stages_for_ratio(gap0 / (delta * eps), rho);
}

RateReport convergence_factor(double mu, double l_q, double eta, std::uint64_t m) {
  if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
  if (!(l_q > 0.0)) throw ArgumentError("L_Q must be positive");
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  if (m < 1) throw ArgumentError("m must be at least 1");
  RateReport r{std::numeric_limits<double>::infinity(), mu, l_q, eta, m, false};
  const double contraction = 1.0 - 4.0 * l_q * eta;
  if (contraction <= 0.0) return r;
  const double md = static_cast<double>(m);
  r.rho = 1.0 / (mu * eta * contraction * md) + 4.0 * l_q * eta * (md + 1.0) / (contraction * md);
  r.feasible = r.rho < 1.0;
  return r;
}

std::optional<std::uint64_t> min_stage_length(double mu, double l_q, double eta) {
  if (!(mu > 0.0) || !(l_q > 0.0) || !(eta > 0.0))
    throw ArgumentError("mu, L_Q and eta must be positive");
  const double contraction = 1.0 - 4.0 * l_q * eta;
  if (contraction <= 0.0) return std::nullopt;
  // rho(m) = (A + B) / m + B; below 1 iff B < 1 and m > (A + B) / (1 - B).
  const double a = 1.0 / (mu * eta * contraction);
  const double b = 4.0 * l_q * eta / contraction;
  if (b >= 1.0) return std::nullopt;
  const double bound = (a + b) / (1.0 - b);
  if (bound >= 1e18) return std::nullopt;
  auto m = static_cast<std::uint64_t>(std::floor(bound)) + 1;
  while (m > 1 && convergence_factor(mu, l_q, eta, m - 1).feasible) --m;
  while (!convergence_factor(mu, l_q, eta, m).feasible) ++m;
  return m;
}

double prox_fg_rate_bound(double lipschitz, double mu_f, double mu_r, std::uint64_t k,
                          double dist0_sq) {
  if (!(lipschitz > 0.0)) throw ArgumentError("L must be positive");
  if (!(mu_f >= 0.0) || !(mu_r >= 0.0)) throw ArgumentError("moduli must be nonnegative");
  if (mu_f > lipschitz) throw ArgumentError("mu_F cannot exceed L");
  if (!(dist0_sq >= 0.0)) throw ArgumentError("squared distance must be nonnegative");
  const double eta = 1.0 / lipschitz;
  const double ratio = (1.0 - eta * mu_f) / (1.0 + eta * mu_r);
  return (1.0 + eta * mu_r) / (2.0 * eta) * std::pow(ratio, static_cast<double>(k)) * dist0_sq;
}

VarianceReport variance_report(const CompositeProblem& problem, const SamplingDistribution& q,
                               std::span<const double> x, std::span<const double> snapshot,
                               std::span<const double> x_star, double p_star,
                               std::size_t enumeration_limit) {
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  if (n > enumeration_limit)
    throw EnumerationLimitError("exact enumeration over " + std::to_string(n) +
                                " components exceeds the limit of " +
                                std::to_string(enumeration_limit) +
                                "; use a sampled variance estimate instead");
  if (q.size() != n) throw ArgumentError("sampling distribution size mismatch");
  require_len(x, d, "x");
  require_len(snapshot, d, "snapshot");
  require_len(x_star, d, "x_star");

  const double lq = l_q(q, problem.lipschitz());
  const DenseVector grad_x = problem.full_gradient(x);
  const DenseVector grad_snap = problem.full_gradient(snapshot);
  std::vector<long double> mean(d, 0.0L);
  long double variance = 0.0L;
  long double lemma1 = 0.0L;
  const double nd = static_cast<double>(n);

  DenseVector gx(d), gs(d), gstar(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = problem.component(i);
    std::fill(gx.begin(), gx.end(), 0.0);
    std::fill(gs.begin(), gs.end(), 0.0);
    std::fill(gstar.begin(), gstar.end(), 0.0);
    c.add_gradient(x, 1.0, gx);
    c.add_gradient(snapshot, 1.0, gs);
    c.add_gradient(x_star, 1.0, gstar);
    const long double qi = q.probability(i);
    const long double w = 1.0L / (nd * qi);
    long double dev = 0.0L;
    for (std::size_t j = 0; j < d; ++j) {
      const long double vij = (static_cast<long double>(gx[j]) - gs[j]) * w + grad_snap[j];
      mean[j] += qi * vij;
      const long double e = vij - grad_x[j];
      dev += e * e;
    }
    variance += qi * dev;
    lemma1 += w * dist_sq_ld(gx, gstar);
  }

  VarianceReport r;
  r.l_q = lq;
  r.mean_v.assign(mean.begin(), mean.end());
  r.variance = static_cast<double>(variance);
  r.lemma1_lhs = static_cast<double>(lemma1 / nd);
  const double px = problem.objective(x) - p_star;
  const double ps = problem.objective(snapshot) - p_star;
  r.variance_bound = 4.0 * lq * (px + ps);
  r.lemma1_bound = 2.0 * lq * px;
  return r;
}

DenseVector gradient_mapping(std::span<const double> x, std::span<const double> v, double eta,
                             const Regularizer& regularizer) {
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  if (x.size() != v.size()) throw ArgumentError("x and v differ in length");
  DenseVector g(x.size());
  kernels::waxpy(-eta, v, x, g);
  regularizer.prox_into(g, eta, g);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = (x[j] - g[j]) / eta;
  return g;
}

Lemma3Result lemma3_check(const CompositeProblem& problem, std::span<const double> x,
                          std::span<const double> v, std::span<const double> y, double eta) {
  const std::size_t d = problem.dimension();
  require_len(x, d, "x");
  require_len(v, d, "v");
  require_len(y, d, "y");
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  if (eta > 1.0 / problem.lipschitz_mean()) throw ArgumentError("the lower bound requires eta <= 1/L");
  if (!std::isfinite(problem.regularizer().value(x))) throw ArgumentError("x must lie in dom(R)");

  DenseVector x_plus(d);
  kernels::waxpy(-eta, v, x, x_plus);
  problem.regularizer().prox_into(x_plus, eta, x_plus);
  DenseVector g(d), delta = problem.full_gradient(x), y_minus_x(d), xp_minus_y(d);
  for (std::size_t j = 0; j < d; ++j) {
    g[j] = (x[j] - x_plus[j]) / eta;
    delta[j] = v[j] - delta[j];
    y_minus_x[j] = y[j] - x[j];
    xp_minus_y[j] = x_plus[j] - y[j];
  }
  const long double rhs = static_cast<long double>(problem.objective(x_plus)) + dot_ld(g, y_minus_x) +
                          0.5L * eta * dot_ld(g, g) +
                          0.5L * problem.mu_f() * dot_ld(y_minus_x, y_minus_x) +
                          0.5L * problem.mu_r() * dot_ld(xp_minus_y, xp_minus_y) +
                          dot_ld(delta, xp_minus_y);
  const double lhs = problem.objective(y);
  Lemma3Result r;
  r.lhs = lhs;
  r.rhs = static_cast<double>(rhs);
  r.residual = static_cast<double>(static_cast<long double>(lhs) - rhs);
  r.holds = within_bound(r.rhs, r.lhs);
  return r;
}

ReferenceSolution reference_solve(const CompositeProblem& problem, double tolerance,
                                  std::uint64_t max_iterations) {
  const std::size_t d = problem.dimension();
  const double eta = 1.0 / problem.lipschitz_mean();
  const auto& reg = problem.regularizer();
  DenseVector x(d, 0.0);
  reg.prox_into(DenseVector(x), eta, x);  // a feasible start for indicator regularizers
  DenseVector y = x, next(d), g(d), tmp(d), step(d);
  double t = 1.0;
  std::uint64_t it = 0;
  for (; it < max_iterations; ++it) {
    problem.full_gradient_into(y, g);
    kernels::waxpy(-eta, g, y, tmp);
    reg.prox_into(tmp, eta, next);
    // Gradient mapping at y.
    kernels::waxpy(-1.0, next, y, tmp);
    const double mapping = std::sqrt(kernels::squared_norm(tmp)) / eta;
    if (!kernels::all_finite(next)) throw DivergenceError("reference_solve", it + 1);
    // Gradient-based adaptive restart: drop momentum once it opposes the mapping.
    kernels::waxpy(-1.0, x, next, step);
    const bool restart = kernels::dot(tmp, step) > 0.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (restart) {
      t = 1.0;
      y = next;
    } else {
      kernels::waxpy((t - 1.0) / t_next, step, next, y);
      t = t_next;
    }
    x.swap(next);
    if (mapping <= tolerance) {
      ++it;
      break;
    }
  }
  problem.full_gradient_into(x, g);
  kernels::waxpy(-eta, g, x, tmp);
  reg.prox_into(tmp, eta, next);
  kernels::waxpy(-1.0, next, x, tmp);
  ReferenceSolution out;
  out.mapping_norm = std::sqrt(kernels::squared_norm(tmp)) / eta;
  out.p_star = problem.objective(x);
  out.x = std::move(x);
  out.iterations = it;
  return out;
}

DenseVector ridge_optimum(std::span<const Example> examples, std::size_t dimension, double l2) {
  if (examples.empty()) throw ArgumentError("no examples");
  if (!(l2 >= 0.0)) throw ArgumentError("l2 must be nonnegative");
  const auto d = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (const auto& ex : examples) {
    const auto idx = ex.features.indices();
    const auto val = ex.features.values();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      rhs(idx[a]) += val[a] * ex.label;
      for (std::size_t b = 0; b < idx.size(); ++b) gram(idx[a], idx[b]) += val[a] * val[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  gram *= inv_n;
  rhs *= inv_n;
  gram.diagonal().array() += l2;
  const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
  return DenseVector(sol.data(), sol.data() + sol.size());
}

}  // namespace psvrg
