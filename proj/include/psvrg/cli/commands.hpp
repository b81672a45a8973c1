#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "psvrg/cli/config.hpp"
#include "psvrg/problem.hpp"
#include "psvrg/solvers.hpp"

namespace psvrg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
};

/// Dataset could not be read or does not fit the requested loss.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs `body`, mapping exceptions onto exit codes and printing them to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

struct BuiltProblem {
  Dataset dataset;
  CompositeProblem problem;
};

BuiltProblem build_problem(const ProblemConfig& config);

/// A solver block with its step, stage length and budget fixed against a problem.
struct ResolvedSolver {
  SolverConfig config;
  double step = 0.0;
  std::size_t m = 0;       // SVRG family only
  std::size_t budget = 0;  // stages (SVRG family) or iterations
  SamplingDistribution sampling;
};

ResolvedSolver resolve_solver(const CompositeProblem& problem, const SolverConfig& config);
/// Expands sweep blocks into one block per power of ten.
std::vector<SolverConfig> expand_sweeps(const std::vector<SolverConfig>& solvers);
SolverResult run_solver(const CompositeProblem& problem, const ResolvedSolver& solver,
                        std::uint64_t seed, const TraceOptions& trace);

/// P* under the configured policy; nullopt for policy 'none'.
std::optional<double> reference_value(const ReferenceConfig& reference, const ProblemConfig& config,
                                      const BuiltProblem& built);

/// Output directory: the config value, else $PSVRG_OUTPUT_DIR, else "psvrg_out".
std::filesystem::path output_directory(const RunConfig& config);

struct TraceHeader {
  std::string config_hash;
  std::string solver;
  std::uint64_t seed = 0;
  std::string kind;  // "iterates" or "snapshots"
};

/// CSV with '#' header lines and the columns
/// effective_passes,objective,gap,nnz,variance_estimate. Empty cells for absent values.
std::string trace_csv(const TraceHeader& header, const std::vector<TracePoint>& trace);
std::string format_number(double v);

std::string trace_file_name(const std::string& solver_id, std::uint64_t seed, bool snapshots);

int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out);

struct RatesRequest {
  double mu = 0.0;
  double l_q = 0.0;
  double eta = 0.0;
  std::uint64_t m = 0;
  std::optional<double> gap0;
  std::optional<double> eps;
  std::optional<double> delta;
};

/// mu, L_Q, eta and m from the problem and its first SVRG-family solver block.
RatesRequest rates_from_config(const RunConfig& config);
nlohmann::json rates_report(const RatesRequest& request);
int cmd_rates(const RatesRequest& request, std::ostream& out);

/// Writes `path` in LIBSVM format and `path`.json with the spec and planted weights.
int cmd_gen_data(const SyntheticSpec& spec, const std::string& path, std::ostream& out);

}  // namespace psvrg::cli
