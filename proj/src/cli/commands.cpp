#include "psvrg/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "psvrg/error.hpp"
#include "psvrg/theory.hpp"

namespace psvrg::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed while writing '" + path.string() + "'");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string sweep_suffix(int exponent) {
  return "_eta1e" + std::to_string(exponent);
}

struct RunRecord {
  std::string solver;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string message;
  std::vector<TracePoint> trace;
  std::vector<TracePoint> snapshot_trace;
};

struct Batch {
  std::vector<std::string> solver_ids;
  std::vector<RunRecord> runs;
  std::optional<double> p_star;
  bool any_diverged = false;
};

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

// Runs every (solver, seed) pair, writes traces and the summary files.
Batch run_batch(const RunConfig& config, const std::vector<SolverConfig>& solvers,
                const fs::path& dir, std::ostream& out) {
  const BuiltProblem built = build_problem(config.problem);
  const CompositeProblem& problem = built.problem;
  Batch batch;
  batch.p_star = reference_value(config.reference, config.problem, built);
  TraceOptions trace;
  trace.p_star = batch.p_star;
  trace.variance = config.variance ? VarianceTracking::On : VarianceTracking::Off;

  std::vector<ResolvedSolver> resolved;
  for (const auto& s : solvers) resolved.push_back(resolve_solver(problem, s));

  fs::create_directories(dir);
  const std::string hash = config_hash(config);
  for (const auto& rs : resolved) {
    batch.solver_ids.push_back(rs.config.id);
    for (const auto seed : config.seeds) {
      RunRecord rec;
      rec.solver = rs.config.id;
      rec.seed = seed;
      try {
        const SolverResult r = run_solver(problem, rs, seed, trace);
        rec.trace = r.trace;
        rec.snapshot_trace = r.snapshot_trace;
        for (const auto& w : r.warnings) out << "warning: " << rs.config.id << ": " << w << "\n";
        write_file(dir / trace_file_name(rs.config.id, seed, false),
                   trace_csv({hash, rs.config.id, seed, "iterates"}, r.trace));
        if (!r.snapshot_trace.empty())
          write_file(dir / trace_file_name(rs.config.id, seed, true),
                     trace_csv({hash, rs.config.id, seed, "snapshots"}, r.snapshot_trace));
      } catch (const DivergenceError& e) {
        rec.diverged = true;
        rec.message = e.what();
        batch.any_diverged = true;
        out << "error: " << e.what() << " (solver " << rs.config.id << ", seed " << seed << ")\n";
      }
      batch.runs.push_back(std::move(rec));
    }
  }

  std::ostringstream csv, md;
  csv << "solver,seed,status,passes,objective,gap,nnz,snapshot_objective,snapshot_gap\n";
  md << "| solver | seed | status | passes | objective | gap | nnz | snapshot gap |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : batch.runs) {
    if (r.diverged) {
      csv << r.solver << ',' << r.seed << ",diverged,,,,,,\n";
      md << "| " << r.solver << " | " << r.seed << " | diverged | | | | | |\n";
      continue;
    }
    const TracePoint& last = r.trace.back();
    const TracePoint* snap = r.snapshot_trace.empty() ? nullptr : &r.snapshot_trace.back();
    csv << r.solver << ',' << r.seed << ",ok," << format_number(last.effective_passes) << ','
        << format_number(last.objective) << ',' << optional_cell(last.gap) << ',' << last.nnz << ','
        << (snap ? format_number(snap->objective) : "") << ',' << (snap ? optional_cell(snap->gap) : "")
        << '\n';
    md << "| " << r.solver << " | " << r.seed << " | ok | " << format_number(last.effective_passes)
       << " | " << format_number(last.objective) << " | " << optional_cell(last.gap) << " | "
       << last.nnz << " | " << (snap ? optional_cell(snap->gap) : "") << " |\n";
  }
  write_file(dir / "summary.csv", csv.str());
  write_file(dir / "summary.md", md.str());
  out << "wrote " << batch.runs.size() << " run(s) to " << dir.string() << "\n";
  return batch;
}

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << " (line " << e.line() << ", column " << e.column() << ")\n";
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

BuiltProblem build_problem(const ProblemConfig& config) {
  Dataset ds;
  if (config.dataset) {
    try {
      ds = load_libsvm(*config.dataset, config.min_dimension);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  } else {
    ds = generate_synthetic(*config.synthetic).dataset;
  }
  try {
    if (!config.label_map.empty())
      ds = binarize_labels(std::move(ds), std::map<double, double>(config.label_map.begin(),
                                                                    config.label_map.end()));
    if (config.normalize) ds = normalize_rows(std::move(ds));
    CompositeProblem p = make_erm_problem(ds.examples, ds.dimension, config.loss, config.lambda1,
                                          config.lambda2, config.splitting);
    return BuiltProblem{std::move(ds), std::move(p)};
  } catch (const ArgumentError& e) {
    throw DataError(e.what());
  }
}

ResolvedSolver resolve_solver(const CompositeProblem& problem, const SolverConfig& c) {
  const std::size_t n = problem.size();
  SamplingDistribution q = c.sampling == SamplingKind::Lipschitz
                               ? lipschitz_weighted_sampling(problem.lipschitz())
                               : uniform_sampling(n);
  const bool full = c.kind == SolverKind::ProxFg || c.kind == SolverKind::ProxAfg;
  const double lip = full ? problem.lipschitz_mean() : l_q(q, problem.lipschitz());
  const double step = c.eta ? *c.eta : c.eta_scale / lip;
  std::size_t m = 0, budget = 0;
  if (is_svrg_family(c.kind)) {
    m = c.m ? *c.m : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.m_factor * n)));
    if (c.stages) {
      budget = *c.stages;
    } else {
      double passes = c.passes;
      if (c.kind == SolverKind::ProxSvrg2) passes -= static_cast<double>(c.warmup_passes);
      const double per_stage = 1.0 + 2.0 * static_cast<double>(m) / static_cast<double>(n);
      budget = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(passes / per_stage + 1e-9)));
    }
  } else if (c.kind == SolverKind::ProxSg) {
    const double passes = c.stages ? static_cast<double>(*c.stages) : c.passes;
    budget = static_cast<std::size_t>(std::llround(passes * static_cast<double>(n)));
    if (c.inverse_mu_k && !(problem.mu() > 0.0))
      throw ConfigError("solver '" + c.id + "': schedule inverse_mu_k needs lambda2 > 0");
  } else {
    budget = c.stages ? *c.stages : static_cast<std::size_t>(std::ceil(c.passes - 1e-9));
  }
  return ResolvedSolver{c, step, m, budget, std::move(q)};
}

std::vector<SolverConfig> expand_sweeps(const std::vector<SolverConfig>& solvers) {
  std::vector<SolverConfig> out;
  for (const auto& s : solvers) {
    if (!s.sweep) {
      out.push_back(s);
      continue;
    }
    for (int k = s.sweep_min; k <= s.sweep_max; ++k) {
      SolverConfig v = s;
      v.sweep = false;
      v.eta.reset();
      v.eta_scale = std::pow(10.0, k);
      v.id = s.id + sweep_suffix(k);
      out.push_back(v);
    }
  }
  return out;
}

SolverResult run_solver(const CompositeProblem& problem, const ResolvedSolver& rs,
                        std::uint64_t seed, const TraceOptions& trace) {
  const auto& c = rs.config;
  const DenseVector x0(problem.dimension(), 0.0);
  auto svrg = [&] {
    SvrgConfig cfg{rs.step, rs.m, rs.budget, rs.sampling, seed, c.snapshot};
    cfg.trace = trace;
    return cfg;
  };
  switch (c.kind) {
    case SolverKind::ProxSvrg:
      return prox_svrg(problem, svrg(), x0);
    case SolverKind::ProxSvrg2:
      return prox_svrg2(problem, svrg(), x0, c.warmup_passes);
    case SolverKind::ProxSvrgEps:
      return solve_nonstrongly_convex(problem, c.epsilon, svrg(), x0);
    case SolverKind::ProxSg: {
      const auto schedule = c.inverse_mu_k ? StepSchedule::inverse_mu_k(problem.mu())
                                           : StepSchedule::constant(rs.step);
      return prox_sg(problem, schedule, rs.budget, x0, rs.sampling, seed, trace);
    }
    case SolverKind::ProxFg:
    case SolverKind::ProxAfg: {
      FullGradientOptions opt{rs.step, rs.budget, c.backtracking, c.restart, trace};
      return c.kind == SolverKind::ProxFg ? prox_fg(problem, opt, x0) : prox_afg(problem, opt, x0);
    }
  }
  throw std::logic_error("unhandled solver kind");
}

std::optional<double> reference_value(const ReferenceConfig& reference, const ProblemConfig& config,
                                      const BuiltProblem& built) {
  switch (reference.policy) {
    case ReferencePolicy::None:
      return std::nullopt;
    case ReferencePolicy::Value:
      return reference.value;
    case ReferencePolicy::Analytic: {
      if (config.loss != LossKind::LeastSquares || config.lambda1 != 0.0)
        throw ConfigError("reference policy 'analytic' needs least_squares with lambda1 = 0");
      const auto x = ridge_optimum(built.dataset.examples, built.dataset.dimension, config.lambda2);
      return built.problem.objective(x);
    }
    case ReferencePolicy::Solve:
      return reference_solve(built.problem, reference.tolerance, reference.max_iterations).p_star;
  }
  return std::nullopt;
}

fs::path output_directory(const RunConfig& config) {
  if (!config.output.empty()) return config.output;
  if (const char* env = std::getenv("PSVRG_OUTPUT_DIR"); env && *env) return env;
  return "psvrg_out";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string trace_csv(const TraceHeader& h, const std::vector<TracePoint>& trace) {
  std::ostringstream os;
  os << "# config_hash=" << h.config_hash << "\n"
     << "# solver=" << h.solver << "\n"
     << "# seed=" << h.seed << "\n"
     << "# points=" << h.kind << "\n"
     << "effective_passes,objective,gap,nnz,variance_estimate\n";
  for (const auto& p : trace)
    os << format_number(p.effective_passes) << ',' << format_number(p.objective) << ','
       << optional_cell(p.gap) << ',' << p.nnz << ',' << optional_cell(p.variance_estimate) << '\n';
  return os.str();
}

std::string trace_file_name(const std::string& solver_id, std::uint64_t seed, bool snapshots) {
  return solver_id + "_seed" + std::to_string(seed) + (snapshots ? "_snapshots.csv" : ".csv");
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
  const Batch b = run_batch(config, config.solvers, output_directory(config), out);
  return b.any_diverged ? kExitDivergence : kExitOk;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
  const auto solvers = expand_sweeps(config.solvers);
  if (solvers.size() < 2) throw ConfigError("compare needs at least two solver blocks");
  const fs::path dir = output_directory(config);
  const Batch b = run_batch(config, solvers, dir, out);
  const bool use_gap = b.p_star.has_value();
  const char* metric = use_gap ? "gap" : "objective";

  double max_passes = 0.0;
  for (const auto& r : b.runs)
    if (!r.diverged) max_passes = std::max(max_passes, r.trace.back().effective_passes);
  const auto budgets = static_cast<std::size_t>(std::floor(max_passes + 1e-9));

  // Median over seeds of the metric at the last trace point within each budget.
  std::map<std::string, std::vector<std::optional<double>>> table;
  for (const auto& id : b.solver_ids) {
    auto& row = table[id];
    row.assign(budgets + 1, std::nullopt);
    for (std::size_t k = 1; k <= budgets; ++k) {
      std::vector<double> vals;
      bool diverged = false;
      for (const auto& r : b.runs) {
        if (r.solver != id) continue;
        if (r.diverged) {
          diverged = true;
          break;
        }
        double v = use_gap ? *r.trace.front().gap : r.trace.front().objective;
        for (const auto& p : r.trace) {
          if (p.effective_passes > static_cast<double>(k) + 1e-9) break;
          v = use_gap ? *p.gap : p.objective;
        }
        vals.push_back(v);
      }
      if (!diverged && !vals.empty()) row[k] = median(vals);
    }
  }

  std::ostringstream csv, md;
  csv << "passes";
  md << "| passes";
  for (const auto& id : b.solver_ids) {
    csv << ',' << id;
    md << " | " << id;
  }
  csv << ",winner\n";
  md << " | winner |\n|---";
  for (std::size_t j = 0; j <= b.solver_ids.size(); ++j) md << "|---";
  md << "|\n";
  for (std::size_t k = 1; k <= budgets; ++k) {
    std::string winner;
    double best = std::numeric_limits<double>::infinity();
    csv << k;
    md << "| " << k;
    for (const auto& id : b.solver_ids) {
      const auto& v = table[id][k];
      csv << ',' << optional_cell(v);
      md << " | " << optional_cell(v);
      if (v && *v < best) {
        best = *v;
        winner = id;
      }
    }
    csv << ',' << winner << '\n';
    md << " | " << winner << " |\n";
  }
  std::ostringstream header;
  header << "Median " << metric << " over " << config.seeds.size()
         << " seed(s) at each pass budget.\n\n";
  write_file(dir / "compare.csv", csv.str());
  write_file(dir / "compare.md", header.str() + md.str());
  if (budgets > 0) {
    for (const auto& id : b.solver_ids)
      if (const auto& v = table[id][budgets]; v)
        out << id << ": median " << metric << " at " << budgets << " passes = " << format_number(*v)
            << "\n";
  }
  return b.any_diverged ? kExitDivergence : kExitOk;
}

RatesRequest rates_from_config(const RunConfig& config) {
  const BuiltProblem built = build_problem(config.problem);
  const auto it = std::find_if(config.solvers.begin(), config.solvers.end(),
                               [](const SolverConfig& s) { return is_svrg_family(s.kind); });
  if (it == config.solvers.end()) throw ConfigError("rates needs a prox_svrg-family solver block");
  const ResolvedSolver rs = resolve_solver(built.problem, *it);
  RatesRequest r;
  r.mu = built.problem.mu() + (it->kind == SolverKind::ProxSvrgEps ? it->epsilon : 0.0);
  if (!(r.mu > 0.0)) throw ConfigError("rates needs mu > 0 (set lambda2 > 0 or use prox_svrg_eps)");
  r.l_q = l_q(rs.sampling, built.problem.lipschitz());
  r.eta = rs.step;
  r.m = rs.m;
  return r;
}

json rates_report(const RatesRequest& q) {
  if (!(q.mu > 0.0) || !(q.l_q > 0.0) || !(q.eta > 0.0) || q.m < 1)
    throw ConfigError("rates needs mu > 0, L_Q > 0, eta > 0 and m >= 1");
  const RateReport r = convergence_factor(q.mu, q.l_q, q.eta, q.m);
  json out{{"rho", std::isfinite(r.rho) ? json(r.rho) : json(nullptr)},
           {"feasible", r.feasible},
           {"mu", r.mu},
           {"l_q", r.l_q},
           {"eta", r.eta},
           {"theta", r.eta * r.l_q},
           {"m", r.m},
           {"step_limit", 1.0 / (4.0 * r.l_q)}};
  const auto mmin = min_stage_length(q.mu, q.l_q, q.eta);
  out["min_stage_length"] = mmin ? json(*mmin) : json(nullptr);
  if (q.gap0 && q.eps) {
    const auto s = r.stages_for_gap(*q.gap0, *q.eps);
    out["stages_for_gap"] = s ? json(*s) : json(nullptr);
    if (q.delta) {
      const auto h = r.stages_high_prob(*q.gap0, *q.eps, *q.delta);
      out["stages_high_prob"] = h ? json(*h) : json(nullptr);
    }
  }
  return out;
}

int cmd_rates(const RatesRequest& request, std::ostream& out) {
  out << rates_report(request).dump(2) << "\n";
  return kExitOk;
}

int cmd_gen_data(const SyntheticSpec& spec, const std::string& path, std::ostream& out) {
  const SyntheticData data = generate_synthetic(spec);
  std::ostringstream text;
  write_libsvm(text, data.dataset);
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_file(target, text.str());
  json sidecar{{"spec", synthetic_to_json(spec)},
               {"seed", spec.seed},
               {"n", data.dataset.size()},
               {"d", data.dataset.dimension},
               {"planted", data.planted}};
  write_file(path + ".json", sidecar.dump(2) + "\n");
  out << "wrote " << data.dataset.size() << " examples to " << path << "\n";
  return kExitOk;
}

}  // namespace psvrg::cli
