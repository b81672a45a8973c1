#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "psvrg/data_io.hpp"
#include "psvrg/losses.hpp"
#include "psvrg/solvers.hpp"

namespace psvrg::cli {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::optional<std::string> dataset;  // LIBSVM path
  std::optional<std::size_t> min_dimension;
  std::optional<SyntheticSpec> synthetic;
  LossKind loss = LossKind::Logistic;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  SplittingMode splitting = SplittingMode::L2InReg;
  bool normalize = false;
  /// Optional label rewrite applied after loading, e.g. {0: -1, 1: 1}.
  std::vector<std::pair<double, double>> label_map;
};

enum class SolverKind { ProxSvrg, ProxSvrg2, ProxSvrgEps, ProxSg, ProxFg, ProxAfg };
enum class SamplingKind { Uniform, Lipschitz };

struct SolverConfig {
  SolverKind kind = SolverKind::ProxSvrg;
  std::string id;  // unique within a run; defaults to the solver name
  /// Absolute step; when unset, eta_scale / L with L = L_Q for the
  /// stochastic methods and the mean L_i for Prox-FG/AFG.
  std::optional<double> eta;
  double eta_scale = 0.1;
  /// Stage length; when unset, m_factor * n.
  std::optional<std::size_t> m;
  double m_factor = 2.0;
  /// Budget: stages for the SVRG family, iterations for FG/AFG, passes for SG.
  /// When `stages` is unset the budget is derived from `passes`.
  std::optional<std::size_t> stages;
  double passes = 30.0;
  SnapshotRule snapshot = SnapshotRule::StageAverage;
  SamplingKind sampling = SamplingKind::Uniform;
  /// Prox-SG only: constant step or eta_k = 1/(mu k).
  bool inverse_mu_k = false;
  double epsilon = 1e-3;  // eps-augmented solver only
  std::size_t warmup_passes = 1;  // Prox-SVRG2 only
  bool backtracking = false;
  bool restart = false;
  /// Expand into eta_scale = 10^k for k in [sweep_min, sweep_max] (compare only).
  bool sweep = false;
  int sweep_min = -3;
  int sweep_max = 0;
};

enum class ReferencePolicy { None, Analytic, Solve, Value };

struct ReferenceConfig {
  ReferencePolicy policy = ReferencePolicy::Solve;
  double value = 0.0;
  double tolerance = 1e-11;
  std::uint64_t max_iterations = 200000;
};

struct RunConfig {
  ProblemConfig problem;
  std::vector<SolverConfig> solvers;
  std::vector<std::uint64_t> seeds{1};
  std::string output;
  ReferenceConfig reference;
  bool variance = false;
};

std::string solver_name(SolverKind kind);
bool is_svrg_family(SolverKind kind);

/// Parses a configuration document. Unknown keys are rejected so that typos
/// do not silently fall back to defaults.
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json load_config_json(const std::string& path);

/// Applies "a.b.c=value" overrides; the value is read as JSON when it parses,
/// as a string otherwise. Array elements are addressed by index ("solvers.0.eta").
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Parsed synthetic spec from its JSON block (shared with gen-data).
SyntheticSpec parse_synthetic(const nlohmann::json& block);
nlohmann::json synthetic_to_json(const SyntheticSpec& spec);

/// Canonical JSON of everything that affects results: defaults are filled in,
/// and seeds and the output directory are left out.
nlohmann::json canonical_json(const RunConfig& config);
/// FNV-1a 64 of canonical_json(config).dump(), as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace psvrg::cli
