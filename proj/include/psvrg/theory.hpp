#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "psvrg/losses.hpp"
#include "psvrg/problem.hpp"
#include "psvrg/sampling.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

/// Convergence factor of Prox-SVRG for given (mu, L_Q, eta, m):
///   rho = 1/(mu eta (1 - 4 L_Q eta) m) + 4 L_Q eta (m + 1) / ((1 - 4 L_Q eta) m).
struct RateReport {
  double rho;  // +inf when eta >= 1/(4 L_Q)
  double mu;
  double l_q;
  double eta;
  std::uint64_t m;
  bool feasible;  // eta < 1/(4 L_Q) and rho < 1

  /// Stages s with rho^s * gap0 <= eps; nullopt when infeasible.
  std::optional<std::uint64_t> stages_for_gap(double gap0, double eps) const;
  /// Stages s >= log(gap0 / (delta eps)) / log(1/rho) that give
  /// P(x~_s) - P* <= eps with probability at least 1 - delta.
  std::optional<std::uint64_t> stages_high_prob(double gap0, double eps, double delta) const;
};

RateReport convergence_factor(double mu, double l_q, double eta, std::uint64_t m);

/// Smallest m with rho < 1 for this (mu, L_Q, eta); nullopt when no m works
/// (that happens for eta >= 1/(8 L_Q)).
std::optional<std::uint64_t> min_stage_length(double mu, double l_q, double eta);

/// Prox-FG gap bound at step 1/L:
///   ((1 + eta mu_R) / (2 eta)) * ((1 - eta mu_F) / (1 + eta mu_R))^k * dist0_sq.
double prox_fg_rate_bound(double lipschitz, double mu_f, double mu_r, std::uint64_t k,
                          double dist0_sq);

struct VarianceReport {
  DenseVector mean_v;          // sum_i q_i v_i
  double variance;             // sum_i q_i ||v_i - grad F(x)||^2
  double variance_bound;       // 4 L_Q [P(x) - P* + P(x~) - P*]
  double lemma1_lhs;           // (1/n) sum_i (1/(n q_i)) ||grad f_i(x) - grad f_i(x*)||^2
  double lemma1_bound;         // 2 L_Q [P(x) - P*]
  double l_q;
};

inline constexpr std::size_t kDefaultEnumerationLimit = 2000;

/// Exact expectations over the sampling distribution at (x, x~).
VarianceReport variance_report(const CompositeProblem& problem, const SamplingDistribution& q,
                               std::span<const double> x, std::span<const double> snapshot,
                               std::span<const double> x_star, double p_star,
                               std::size_t enumeration_limit = kDefaultEnumerationLimit);

/// g = (x - prox_{eta R}(x - eta v)) / eta.
DenseVector gradient_mapping(std::span<const double> x, std::span<const double> v, double eta,
                             const Regularizer& regularizer);

struct Lemma3Result {
  bool holds;
  double residual;  // LHS - RHS of P(y) >= P(x+) + ...
  double lhs;
  double rhs;
};

/// Checks the composite lower bound
///   P(y) >= P(x+) + g'(y - x) + (eta/2)||g||^2 + (mu_F/2)||y - x||^2
///           + (mu_R/2)||y - x+||^2 + Delta'(x+ - y)
/// with x+ = prox_{eta R}(x - eta v), g the gradient mapping and
/// Delta = v - grad F(x). Requires 0 < eta <= 1/L with L the mean
/// component bound. `holds` allows absolute and relative slack of 1e-9.
Lemma3Result lemma3_check(const CompositeProblem& problem, std::span<const double> x,
                          std::span<const double> v, std::span<const double> y, double eta);

/// Inequality slack shared by all bound checks.
inline constexpr double kBoundAtol = 1e-9;
inline constexpr double kBoundRtol = 1e-9;
inline bool within_bound(double lhs, double bound) {
  return lhs <= bound + kBoundAtol + kBoundRtol * std::abs(bound);
}

struct ReferenceSolution {
  DenseVector x;
  double p_star;
  double mapping_norm;  // ||(x - prox(x - grad F(x)/L)) * L|| at the returned point
  std::uint64_t iterations;
};

/// High-accuracy optimum by restarted Prox-AFG at step 1/L, stopped when the
/// gradient mapping norm drops below `tolerance` or `max_iterations` is hit.
ReferenceSolution reference_solve(const CompositeProblem& problem, double tolerance = 1e-11,
                                  std::uint64_t max_iterations = 200000);

/// Minimizer of (1/2n) sum (a_i'x - b_i)^2 + (l2/2)||x||^2 via the normal equations.
DenseVector ridge_optimum(std::span<const Example> examples, std::size_t dimension, double l2);

}  // namespace psvrg
