#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psvrg/problem.hpp"
#include "psvrg/sampling.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

/// How the next snapshot is formed at the end of a stage.
enum class SnapshotRule { StageAverage, LastIterate };

enum class VarianceTracking { Off, On };

struct TraceOptions {
  /// Known optimum; fills TracePoint::gap when present.
  std::optional<double> p_star;
  VarianceTracking variance = VarianceTracking::Off;
  /// Up to this many components the variance is enumerated exactly;
  /// above it, `variance_samples` draws from Q are averaged.
  std::size_t enumeration_limit = 2000;
  std::size_t variance_samples = 256;
};

struct TracePoint {
  double effective_passes = 0.0;
  double objective = 0.0;
  std::optional<double> gap;
  std::size_t nnz = 0;
  std::optional<double> variance_estimate;
};

struct SolverResult {
  DenseVector x;
  /// Current iterate, recorded once per effective pass (and at each
  /// full-gradient evaluation for the SVRG family).
  std::vector<TracePoint> trace;
  /// SVRG family only: the snapshots x~_0, x~_1, ..., x~_S.
  std::vector<TracePoint> snapshot_trace;
  std::vector<DenseVector> snapshots;
  std::uint64_t gradient_evaluations = 0;
  /// Step in force at the end (differs from the input only with backtracking).
  double final_step = 0.0;
  std::vector<std::string> warnings;
};

/// Observer hook for each inner SVRG step, called after v_k is formed and
/// before the proximal update.
struct InnerStep {
  std::size_t stage;  // 1-based
  std::size_t k;      // 1-based within the stage
  std::size_t index;  // sampled component
  std::span<const double> x_prev;
  std::span<const double> snapshot;
  std::span<const double> snapshot_gradient;
  std::span<const double> v;
};

struct SvrgConfig {
  double step;
  std::size_t stage_length;
  std::size_t stages;
  SamplingDistribution sampling;
  std::uint64_t seed = 0;
  SnapshotRule snapshot = SnapshotRule::StageAverage;
  TraceOptions trace{};
  std::function<void(const InnerStep&)> observer{};
};

/// Step-size rule for the plain proximal stochastic gradient method.
struct StepSchedule {
  enum class Kind { Constant, InverseMuK };
  Kind kind;
  double value;  // eta for Constant, mu for InverseMuK (eta_k = 1/(mu k))

  static StepSchedule constant(double eta) { return {Kind::Constant, eta}; }
  static StepSchedule inverse_mu_k(double mu) { return {Kind::InverseMuK, mu}; }
  double at(std::uint64_t k) const {
    return kind == Kind::Constant ? value : 1.0 / (value * static_cast<double>(k));
  }
};

struct FullGradientOptions {
  double step;
  std::size_t iterations;
  /// Halve the step until the sufficient-decrease test passes.
  bool backtracking = false;
  /// Prox-AFG only: reset momentum whenever the objective increases.
  bool restart = false;
  TraceOptions trace{};
};

/// Proximal SVRG with sampling distribution Q. Each stage costs n + 2m
/// component-gradient evaluations.
SolverResult prox_svrg(const CompositeProblem& problem, const SvrgConfig& config,
                       std::span<const double> x0);

SolverResult prox_sg(const CompositeProblem& problem, StepSchedule schedule,
                     std::uint64_t iterations, std::span<const double> x0,
                     const SamplingDistribution& sampling, std::uint64_t seed,
                     const TraceOptions& trace = {});

SolverResult prox_fg(const CompositeProblem& problem, const FullGradientOptions& options,
                     std::span<const double> x0);

/// FISTA-style accelerated proximal gradient with t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
SolverResult prox_afg(const CompositeProblem& problem, const FullGradientOptions& options,
                      std::span<const double> x0);

/// `warmup_passes` passes of constant-step Prox-SG, then Prox-SVRG from the
/// resulting point. One random stream drives both phases.
SolverResult prox_svrg2(const CompositeProblem& problem, const SvrgConfig& config,
                        std::span<const double> x0, std::size_t warmup_passes = 1);

/// Prox-SVRG on P_eps = F + (eps/2)||x||^2 + R. Traces report the original P.
SolverResult solve_nonstrongly_convex(const CompositeProblem& problem, double eps,
                                      const SvrgConfig& config, std::span<const double> x0);

}  // namespace psvrg
