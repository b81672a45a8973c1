#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psvrg/cli/commands.hpp"
#include "psvrg/cli/config.hpp"
#include "psvrg/kernels.hpp"

using namespace psvrg::cli;
using nlohmann::json;

namespace {

struct RunFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  std::vector<std::uint64_t> seeds;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration")->required();
  cmd->add_option("--set", f.overrides,
                  "Override a config key, e.g. --set problem.lambda2=1e-4 or --set solvers.0.eta_scale=0.1")
      ->take_all();
  cmd->add_option("-o,--output", f.output, "Output directory (overrides config 'output')");
  cmd->add_option("--seeds", f.seeds, "Seeds (overrides config 'seeds')")->delimiter(',');
}

RunConfig load_run_config(const RunFlags& f) {
  json doc = load_config_json(f.config);
  for (const auto& o : f.overrides) apply_override(doc, o);
  if (!f.output.empty()) doc["output"] = f.output;
  if (!f.seeds.empty()) doc["seeds"] = f.seeds;
  return parse_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "psvrg: proximal stochastic variance-reduced gradient solvers and benchmarks.\n"
      "Exit codes: 0 ok, 1 other failure, 2 config error, 3 data error, 4 divergence.\n"
      "PSVRG_OUTPUT_DIR sets the output directory when neither the config nor --output does.\n"
      "PSVRG_KERNELS=scalar disables the SIMD kernels."};
  app.require_subcommand(1);
  bool show_isa = false;
  app.add_flag("--show-isa", show_isa, "Print the selected kernel instruction set to stderr");

  RunFlags solve_flags, compare_flags;
  auto* solve = app.add_subcommand("solve", "Run each solver block for each seed; write traces and a summary");
  add_run_flags(solve, solve_flags);
  auto* compare = app.add_subcommand("compare", "Run two or more solvers and tabulate median gaps per pass budget");
  add_run_flags(compare, compare_flags);

  auto* rates = app.add_subcommand("rates", "Report the convergence factor rho and stage counts as JSON");
  std::string rates_config;
  std::vector<std::string> rates_overrides;
  std::optional<double> mu, lq, eta, theta, gap0, eps, delta;
  std::optional<std::uint64_t> m;
  rates->add_option("-c,--config", rates_config, "Derive mu, L_Q, eta and m from a run configuration");
  rates->add_option("--set", rates_overrides, "Override a config key")->take_all();
  rates->add_option("--mu", mu, "Strong convexity parameter");
  rates->add_option("--lq", lq, "L_Q = max_i L_i / (q_i n)");
  auto* eta_opt = rates->add_option("--eta", eta, "Step size");
  rates->add_option("--theta", theta, "Step size as a fraction of 1/L_Q")->excludes(eta_opt);
  rates->add_option("--m", m, "Stage length");
  rates->add_option("--gap0", gap0, "Initial optimality gap for stage counts");
  rates->add_option("--eps", eps, "Target gap for stage counts");
  rates->add_option("--delta", delta, "Failure probability for the high-probability stage count");

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset in LIBSVM format plus a JSON sidecar");
  std::string gen_config, gen_out;
  std::vector<std::string> gen_overrides;
  gen->add_option("-c,--config", gen_config, "JSON file holding a synthetic spec object");
  gen->add_option("--set", gen_overrides, "Override a spec key, e.g. --set kappa_l=100")->take_all();
  gen->add_option("--out", gen_out, "Output LIBSVM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (show_isa) std::cerr << "kernels: " << psvrg::kernels::isa_name(psvrg::kernels::active_isa()) << "\n";

  return run_guarded(
      [&]() -> int {
        if (*solve) return cmd_solve(load_run_config(solve_flags), std::cout);
        if (*compare) return cmd_compare(load_run_config(compare_flags), std::cout);
        if (*rates) {
          RatesRequest req;
          if (!rates_config.empty()) {
            json doc = load_config_json(rates_config);
            for (const auto& o : rates_overrides) apply_override(doc, o);
            req = rates_from_config(parse_config(doc));
          }
          if (mu) req.mu = *mu;
          if (lq) req.l_q = *lq;
          if (eta) req.eta = *eta;
          if (theta) {
            if (!(req.l_q > 0.0)) throw ConfigError("--theta needs --lq or a config");
            req.eta = *theta / req.l_q;
          }
          if (m) req.m = *m;
          req.gap0 = gap0;
          req.eps = eps;
          req.delta = delta;
          return cmd_rates(req, std::cout);
        }
        json spec = json::object();
        if (!gen_config.empty()) {
          spec = load_config_json(gen_config);
          if (spec.contains("problem")) spec = spec["problem"].value("synthetic", json::object());
        }
        for (const auto& o : gen_overrides) apply_override(spec, o);
        return cmd_gen_data(parse_synthetic(spec), gen_out, std::cout);
      },
      std::cerr);
}
