#include "psvrg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "psvrg/error.hpp"
#include "psvrg/kernels.hpp"
#include "psvrg/prox.hpp"
#include "psvrg/theory.hpp"

namespace psvrg {
namespace {

constexpr std::uint64_t kVarianceStreamSalt = 0x7a3c5e1f9b2d4c68ULL;

void check_start(const CompositeProblem& problem, std::span<const double> x0) {
  if (x0.size() != problem.dimension())
    throw ArgumentError("starting point has length " + std::to_string(x0.size()) +
                        ", expected " + std::to_string(problem.dimension()));
  if (!kernels::all_finite(x0)) throw ArgumentError("starting point is not finite");
  if (!std::isfinite(problem.regularizer().value(x0)))
    throw ArgumentError("starting point is outside dom(R)");
}

void check_sampling(const CompositeProblem& problem, const SamplingDistribution& q) {
  if (q.size() != problem.size())
    throw ArgumentError("sampling distribution size does not match the number of components");
}

// Reference point for the variance of an SVRG direction at x. Absent for Prox-SG.
struct SnapshotRef {
  std::span<const double> point;
  std::span<const double> gradient;
};

/// Builds trace points against `problem` (the objective reported, which for
/// the eps-augmented solver differs from the one being optimized).
class Tracer {
 public:
  Tracer(const CompositeProblem& problem, const TraceOptions& options,
         const SamplingDistribution& sampling, std::uint64_t seed)
      : problem_(problem), options_(options), sampling_(sampling), seed_(seed) {}

  TracePoint point(std::span<const double> x, double passes,
                   std::optional<SnapshotRef> snapshot = std::nullopt) {
    TracePoint p;
    p.effective_passes = passes;
    p.objective = problem_.objective(x);
    if (options_.p_star) p.gap = p.objective - *options_.p_star;
    p.nnz = kernels::count_nonzero(x);
    if (options_.variance == VarianceTracking::On) p.variance_estimate = variance(x, snapshot);
    return p;
  }

 private:
  // E||v - grad F(x)||^2 for v = (g_i(x) - g_i(x~)) / (n q_i) + grad F(x~), or
  // v = g_i(x) / (n q_i) without a snapshot.
  double variance(std::span<const double> x, std::optional<SnapshotRef> snapshot) {
    const std::size_t n = problem_.size();
    const std::size_t d = problem_.dimension();
    const DenseVector full = problem_.full_gradient(x);
    DenseVector v(d);
    auto term = [&](std::size_t i) {
      const double w = 1.0 / (static_cast<double>(n) * sampling_.probability(i));
      std::fill(v.begin(), v.end(), 0.0);
      const auto& c = problem_.component(i);
      if (snapshot) {
        c.add_gradient_difference(x, snapshot->point, w, v);
        kernels::axpy(1.0, snapshot->gradient, v);
      } else {
        c.add_gradient(x, w, v);
      }
      kernels::axpy(-1.0, full, v);
      return kernels::squared_norm(v);
    };
    if (n <= options_.enumeration_limit) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += sampling_.probability(i) * term(i);
      return s;
    }
    SeededRng rng(seed_ ^ (kVarianceStreamSalt + calls_++));
    const std::size_t draws = std::max<std::size_t>(1, options_.variance_samples);
    double s = 0.0;
    for (std::size_t r = 0; r < draws; ++r) s += term(sampling_.sample(rng));
    return s / static_cast<double>(draws);
  }

  const CompositeProblem& problem_;
  const TraceOptions& options_;
  const SamplingDistribution& sampling_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

double passes_of(std::uint64_t evals, std::size_t n) {
  return static_cast<double>(evals) / static_cast<double>(n);
}

void add_rate_warnings(const CompositeProblem& problem, const SvrgConfig& config, double mu,
                       std::vector<std::string>& warnings) {
  const double lq = l_q(config.sampling, problem.lipschitz());
  if (!(config.step < 1.0 / (4.0 * lq))) {
    std::ostringstream os;
    os << "step " << config.step << " is not below 1/(4 L_Q) = " << 1.0 / (4.0 * lq)
       << "; the geometric rate guarantee does not apply";
    warnings.push_back(os.str());
    return;
  }
  if (mu > 0.0) {
    const RateReport r = convergence_factor(mu, lq, config.step, config.stage_length);
    if (!r.feasible) {
      std::ostringstream os;
      os << "convergence factor rho = " << r.rho << " is not below 1 for m = " << config.stage_length;
      warnings.push_back(os.str());
    }
  }
}

// Shared state of one run: the iterate, evaluation count and result under construction.
struct RunState {
  explicit RunState(std::span<const double> x0) : x(x0.begin(), x0.end()) {}
  DenseVector x;
  std::uint64_t evals = 0;
  std::uint64_t last_recorded = 0;
  SolverResult result;
};

void run_sg_phase(const CompositeProblem& problem, StepSchedule schedule, std::uint64_t iterations,
                  const SamplingDistribution& sampling, SeededRng& rng, Tracer& tracer,
                  RunState& st, const char* name) {
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  const auto& reg = problem.regularizer();
  DenseVector g(d), tmp(d);
  for (std::uint64_t k = 1; k <= iterations; ++k) {
    const std::size_t i = sampling.sample(rng);
    const double eta = schedule.at(k);
    const double w = 1.0 / (static_cast<double>(n) * sampling.probability(i));
    std::fill(g.begin(), g.end(), 0.0);
    problem.component(i).add_gradient(st.x, w, g);
    kernels::waxpy(-eta, g, st.x, tmp);
    reg.prox_into(tmp, eta, st.x);
    if (!kernels::all_finite(st.x)) throw DivergenceError(name, k);
    ++st.evals;
    if (st.evals - st.last_recorded >= n) {
      st.result.trace.push_back(tracer.point(st.x, passes_of(st.evals, n)));
      st.last_recorded = st.evals;
    }
  }
  if (st.evals != st.last_recorded) {
    st.result.trace.push_back(tracer.point(st.x, passes_of(st.evals, n)));
    st.last_recorded = st.evals;
  }
}

void run_svrg_phase(const CompositeProblem& problem, const SvrgConfig& config, SeededRng& rng,
                    Tracer& tracer, RunState& st, const char* name) {
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  const std::size_t m = config.stage_length;
  const double eta = config.step;
  const auto& reg = problem.regularizer();

  DenseVector snapshot = st.x;
  DenseVector snapshot_grad(d), v(d), tmp(d), running_sum(d);

  st.result.snapshot_trace.push_back(tracer.point(snapshot, passes_of(st.evals, n)));

  for (std::size_t s = 1; s <= config.stages; ++s) {
    problem.full_gradient_into(snapshot, snapshot_grad);
    st.evals += n;
    st.x = snapshot;
    st.result.trace.push_back(
        tracer.point(st.x, passes_of(st.evals, n), SnapshotRef{snapshot, snapshot_grad}));
    st.last_recorded = st.evals;
    std::fill(running_sum.begin(), running_sum.end(), 0.0);

    for (std::size_t k = 1; k <= m; ++k) {
      const std::size_t i = config.sampling.sample(rng);
      const double w = 1.0 / (static_cast<double>(n) * config.sampling.probability(i));
      // v = grad F(x~) + w (g_i(x) - g_i(x~)); the difference is exactly zero when x == x~.
      std::copy(snapshot_grad.begin(), snapshot_grad.end(), v.begin());
      problem.component(i).add_gradient_difference(st.x, snapshot, w, v);
      st.evals += 2;
      if (config.observer) config.observer(InnerStep{s, k, i, st.x, snapshot, snapshot_grad, v});

      kernels::waxpy(-eta, v, st.x, tmp);
      reg.prox_into(tmp, eta, st.x);
      if (!kernels::all_finite(st.x)) throw DivergenceError(name, (s - 1) * m + k);
      if (config.snapshot == SnapshotRule::StageAverage) kernels::axpy(1.0, st.x, running_sum);

      if (st.evals - st.last_recorded >= n || k == m) {
        st.result.trace.push_back(
            tracer.point(st.x, passes_of(st.evals, n), SnapshotRef{snapshot, snapshot_grad}));
        st.last_recorded = st.evals;
      }
    }

    if (config.snapshot == SnapshotRule::StageAverage) {
      kernels::scale(1.0 / static_cast<double>(m), running_sum);
      snapshot = running_sum;
      // The average of feasible points can leave dom(R) by rounding; a zero-step
      // prox projects it back.
      if (!std::isfinite(reg.value(snapshot))) reg.prox_into(snapshot, 0.0, snapshot);
    } else {
      snapshot = st.x;
    }
    st.result.snapshots.push_back(snapshot);
    st.result.snapshot_trace.push_back(tracer.point(snapshot, passes_of(st.evals, n)));
  }
  st.x = snapshot;
}

void validate_svrg(const CompositeProblem& problem, const SvrgConfig& config) {
  if (!(config.step > 0.0) || !std::isfinite(config.step)) throw ArgumentError("step must be positive");
  if (config.stage_length < 1) throw ArgumentError("stage length m must be at least 1");
  if (config.stages < 1) throw ArgumentError("stage count must be at least 1");
  check_sampling(problem, config.sampling);
}

SolverResult finish(RunState& st, double step) {
  st.result.x = std::move(st.x);
  st.result.gradient_evaluations = st.evals;
  st.result.final_step = step;
  return std::move(st.result);
}

// One proximal gradient step from `base` with gradient `g`; with backtracking
// the step is halved until F(x+) <= F(base) + g'(x+ - base) + ||x+ - base||^2 / (2 eta).
void prox_gradient_step(const CompositeProblem& problem, std::span<const double> base,
                        std::span<const double> g, double& eta, bool backtracking,
                        std::span<double> out, std::span<double> tmp) {
  const auto& reg = problem.regularizer();
  const double f_base = backtracking ? problem.smooth_value(base) : 0.0;
  for (int attempt = 0;; ++attempt) {
    kernels::waxpy(-eta, g, base, tmp);
    reg.prox_into(tmp, eta, out);
    if (!backtracking) return;
    kernels::waxpy(-1.0, base, out, tmp);  // tmp = x+ - base
    const double model = f_base + kernels::dot(g, tmp) + kernels::squared_norm(tmp) / (2.0 * eta);
    const double f_new = problem.smooth_value(out);
    if (f_new <= model + 1e-12 * std::fabs(model) || attempt >= 60) return;
    eta *= 0.5;
  }
}

void validate_fg(const FullGradientOptions& options) {
  if (!(options.step > 0.0) || !std::isfinite(options.step)) throw ArgumentError("step must be positive");
}

}  // namespace

SolverResult prox_svrg(const CompositeProblem& problem, const SvrgConfig& config,
                       std::span<const double> x0) {
  check_start(problem, x0);
  validate_svrg(problem, config);
  RunState st(x0);
  add_rate_warnings(problem, config, problem.mu(), st.result.warnings);
  SeededRng rng(config.seed);
  Tracer tracer(problem, config.trace, config.sampling, config.seed);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  run_svrg_phase(problem, config, rng, tracer, st, "prox_svrg");
  return finish(st, config.step);
}

SolverResult prox_sg(const CompositeProblem& problem, StepSchedule schedule,
                     std::uint64_t iterations, std::span<const double> x0,
                     const SamplingDistribution& sampling, std::uint64_t seed,
                     const TraceOptions& trace) {
  check_start(problem, x0);
  check_sampling(problem, sampling);
  if (!(schedule.value > 0.0) || !std::isfinite(schedule.value))
    throw ArgumentError(schedule.kind == StepSchedule::Kind::Constant ? "step must be positive"
                                                                       : "mu must be positive");
  RunState st(x0);
  SeededRng rng(seed);
  Tracer tracer(problem, trace, sampling, seed);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  run_sg_phase(problem, schedule, iterations, sampling, rng, tracer, st, "prox_sg");
  return finish(st, schedule.at(std::max<std::uint64_t>(iterations, 1)));
}

SolverResult prox_fg(const CompositeProblem& problem, const FullGradientOptions& options,
                     std::span<const double> x0) {
  check_start(problem, x0);
  validate_fg(options);
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  RunState st(x0);
  const auto uniform = uniform_sampling(n);
  Tracer tracer(problem, options.trace, uniform, 0);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  double eta = options.step;
  DenseVector g(d), next(d), tmp(d);
  for (std::size_t k = 1; k <= options.iterations; ++k) {
    problem.full_gradient_into(st.x, g);
    st.evals += n;
    prox_gradient_step(problem, st.x, g, eta, options.backtracking, next, tmp);
    st.x.swap(next);
    if (!kernels::all_finite(st.x)) throw DivergenceError("prox_fg", k);
    st.result.trace.push_back(tracer.point(st.x, passes_of(st.evals, n)));
  }
  return finish(st, eta);
}

SolverResult prox_afg(const CompositeProblem& problem, const FullGradientOptions& options,
                      std::span<const double> x0) {
  check_start(problem, x0);
  validate_fg(options);
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  RunState st(x0);
  const auto uniform = uniform_sampling(n);
  Tracer tracer(problem, options.trace, uniform, 0);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  double eta = options.step;
  double t = 1.0;
  double prev_objective = st.result.trace.back().objective;
  DenseVector y = st.x, g(d), next(d), tmp(d);
  for (std::size_t k = 1; k <= options.iterations; ++k) {
    problem.full_gradient_into(y, g);
    st.evals += n;
    prox_gradient_step(problem, y, g, eta, options.backtracking, next, tmp);
    if (!kernels::all_finite(next)) throw DivergenceError("prox_afg", k);
    TracePoint p = tracer.point(next, passes_of(st.evals, n));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (options.restart && p.objective > prev_objective) {
      t = 1.0;
      y = next;
    } else {
      // y = next + ((t - 1) / t_next) (next - x)
      kernels::waxpy(-1.0, st.x, next, tmp);
      kernels::waxpy((t - 1.0) / t_next, tmp, next, y);
      t = t_next;
    }
    prev_objective = p.objective;
    st.x.swap(next);
    st.result.trace.push_back(p);
  }
  return finish(st, eta);
}

SolverResult prox_svrg2(const CompositeProblem& problem, const SvrgConfig& config,
                        std::span<const double> x0, std::size_t warmup_passes) {
  check_start(problem, x0);
  validate_svrg(problem, config);
  RunState st(x0);
  add_rate_warnings(problem, config, problem.mu(), st.result.warnings);
  SeededRng rng(config.seed);
  Tracer tracer(problem, config.trace, config.sampling, config.seed);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  const std::uint64_t warmup = static_cast<std::uint64_t>(warmup_passes) * problem.size();
  run_sg_phase(problem, StepSchedule::constant(config.step), warmup, config.sampling, rng, tracer,
               st, "prox_svrg2");
  run_svrg_phase(problem, config, rng, tracer, st, "prox_svrg2");
  return finish(st, config.step);
}

SolverResult solve_nonstrongly_convex(const CompositeProblem& problem, double eps,
                                      const SvrgConfig& config, std::span<const double> x0) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("eps must be positive");
  check_start(problem, x0);
  validate_svrg(problem, config);
  const CompositeProblem augmented = problem.with_regularizer(
      std::make_shared<EpsShifted>(problem.regularizer_ptr(), eps), problem.mu_r() + eps);
  RunState st(x0);
  add_rate_warnings(augmented, config, augmented.mu(), st.result.warnings);
  SeededRng rng(config.seed);
  Tracer tracer(problem, config.trace, config.sampling, config.seed);
  st.result.trace.push_back(tracer.point(st.x, 0.0));
  run_svrg_phase(augmented, config, rng, tracer, st, "prox_svrg_eps");
  return finish(st, config.step);
}

}  // namespace psvrg
