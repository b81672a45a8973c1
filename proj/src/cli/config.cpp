#include "psvrg/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace psvrg::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const json& obj, const char* key, T fallback, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

double nonneg(const json& obj, const char* key, double fallback, const char* where) {
  const double v = get<double>(obj, key, fallback, where);
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(where) + "." + key + " must be a finite nonnegative number");
  return v;
}

double positive(const json& obj, const char* key, double fallback, const char* where) {
  const double v = get<double>(obj, key, fallback, where);
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(where) + "." + key + " must be a finite positive number");
  return v;
}

std::size_t count(const json& obj, const char* key, std::size_t fallback, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0)
    throw ConfigError(std::string(where) + "." + key + " must be a nonnegative integer");
  return it->get<std::size_t>();
}

template <typename E>
E choice(const json& obj, const char* key, E fallback, const char* where,
         std::initializer_list<std::pair<const char*, E>> options) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ConfigError(std::string(where) + "." + key + " must be a string");
  const auto s = it->get<std::string>();
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(std::string(where) + "." + key + ": '" + s + "' is not one of " + names);
}

constexpr std::initializer_list<std::pair<const char*, SolverKind>> kSolverNames = {
    {"prox_svrg", SolverKind::ProxSvrg}, {"prox_svrg2", SolverKind::ProxSvrg2},
    {"prox_svrg_eps", SolverKind::ProxSvrgEps}, {"prox_sg", SolverKind::ProxSg},
    {"prox_fg", SolverKind::ProxFg}, {"prox_afg", SolverKind::ProxAfg}};

const char* loss_name(LossKind k) { return k == LossKind::Logistic ? "logistic" : "least_squares"; }
const char* split_name(SplittingMode s) {
  return s == SplittingMode::L2InSmooth ? "l2_in_smooth" : "l2_in_reg";
}

SolverConfig parse_solver(const json& b, std::size_t index) {
  const std::string where = "solvers[" + std::to_string(index) + "]";
  const char* w = where.c_str();
  check_keys(b, w,
             {"name", "id", "eta", "eta_scale", "m", "m_factor", "stages", "passes", "snapshot",
              "sampling", "schedule", "epsilon", "warmup_passes", "backtracking", "restart", "sweep"});
  if (!b.contains("name")) throw ConfigError(where + " needs a name");
  SolverConfig s;
  s.kind = choice(b, "name", SolverKind::ProxSvrg, w, kSolverNames);
  s.id = get<std::string>(b, "id", solver_name(s.kind), w);
  if (s.id.empty() || s.id.find_first_of("/\\ ,") != std::string::npos)
    throw ConfigError(where + ".id must be non-empty without '/', '\\', ',' or spaces");
  if (b.contains("eta")) s.eta = positive(b, "eta", 1.0, w);
  s.eta_scale = positive(b, "eta_scale", s.eta_scale, w);
  if (b.contains("m")) {
    s.m = count(b, "m", 1, w);
    if (*s.m == 0) throw ConfigError(where + ".m must be at least 1");
  }
  s.m_factor = positive(b, "m_factor", s.m_factor, w);
  if (b.contains("stages")) {
    s.stages = count(b, "stages", 1, w);
    if (*s.stages == 0) throw ConfigError(where + ".stages must be at least 1");
  }
  s.passes = positive(b, "passes", s.passes, w);
  s.snapshot = choice(b, "snapshot", s.snapshot, w,
                      {{"average", SnapshotRule::StageAverage}, {"last", SnapshotRule::LastIterate}});
  s.sampling = choice(b, "sampling", s.sampling, w,
                      {{"uniform", SamplingKind::Uniform}, {"lipschitz", SamplingKind::Lipschitz}});
  s.inverse_mu_k = choice(b, "schedule", false, w, {{"constant", false}, {"inverse_mu_k", true}});
  s.epsilon = positive(b, "epsilon", s.epsilon, w);
  s.warmup_passes = count(b, "warmup_passes", s.warmup_passes, w);
  s.backtracking = get<bool>(b, "backtracking", false, w);
  s.restart = get<bool>(b, "restart", false, w);
  if (const auto it = b.find("sweep"); it != b.end()) {
    if (it->is_boolean()) {
      s.sweep = it->get<bool>();
    } else {
      check_keys(*it, (where + ".sweep").c_str(), {"min_exponent", "max_exponent"});
      s.sweep = true;
      s.sweep_min = get<int>(*it, "min_exponent", s.sweep_min, w);
      s.sweep_max = get<int>(*it, "max_exponent", s.sweep_max, w);
    }
    if (s.sweep_min > s.sweep_max) throw ConfigError(where + ".sweep exponent range is empty");
  }
  return s;
}

ProblemConfig parse_problem(const json& b) {
  check_keys(b, "problem",
             {"dataset", "min_dimension", "synthetic", "loss", "lambda1", "lambda2", "splitting",
              "normalize", "label_map"});
  ProblemConfig p;
  if (b.contains("dataset")) p.dataset = get<std::string>(b, "dataset", "", "problem");
  if (b.contains("synthetic")) p.synthetic = parse_synthetic(b.at("synthetic"));
  if (p.dataset.has_value() == p.synthetic.has_value())
    throw ConfigError("problem needs exactly one of 'dataset' and 'synthetic'");
  if (b.contains("min_dimension")) p.min_dimension = count(b, "min_dimension", 0, "problem");
  p.loss = choice(b, "loss", p.loss, "problem",
                  {{"logistic", LossKind::Logistic}, {"least_squares", LossKind::LeastSquares}});
  p.lambda1 = nonneg(b, "lambda1", 0.0, "problem");
  p.lambda2 = nonneg(b, "lambda2", 0.0, "problem");
  p.splitting = choice(b, "splitting", p.splitting, "problem",
                       {{"l2_in_smooth", SplittingMode::L2InSmooth}, {"l2_in_reg", SplittingMode::L2InReg}});
  p.normalize = get<bool>(b, "normalize", false, "problem");
  if (const auto it = b.find("label_map"); it != b.end()) {
    if (!it->is_object()) throw ConfigError("problem.label_map must map label strings to +1/-1");
    for (const auto& [from, to] : it->items()) {
      double key = 0.0;
      try {
        std::size_t used = 0;
        key = std::stod(from, &used);
        if (used != from.size()) throw std::invalid_argument(from);
      } catch (const std::exception&) {
        throw ConfigError("problem.label_map key '" + from + "' is not a number");
      }
      if (!to.is_number() || (to.get<double>() != 1.0 && to.get<double>() != -1.0))
        throw ConfigError("problem.label_map values must be +1 or -1");
      p.label_map.emplace_back(key, to.get<double>());
    }
  }
  return p;
}

ReferenceConfig parse_reference(const json& b) {
  ReferenceConfig r;
  if (b.is_string()) {
    r.policy = choice(json{{"policy", b}}, "policy", r.policy, "reference",
                      {{"none", ReferencePolicy::None}, {"analytic", ReferencePolicy::Analytic},
                       {"solve", ReferencePolicy::Solve}});
    return r;
  }
  check_keys(b, "reference", {"policy", "value", "tolerance", "max_iterations"});
  r.policy = choice(b, "policy", r.policy, "reference",
                    {{"none", ReferencePolicy::None}, {"analytic", ReferencePolicy::Analytic},
                     {"solve", ReferencePolicy::Solve}, {"value", ReferencePolicy::Value}});
  if (r.policy == ReferencePolicy::Value) {
    if (!b.contains("value")) throw ConfigError("reference.value is required for policy 'value'");
    r.value = get<double>(b, "value", 0.0, "reference");
    if (!std::isfinite(r.value)) throw ConfigError("reference.value must be finite");
  }
  r.tolerance = positive(b, "tolerance", r.tolerance, "reference");
  r.max_iterations = count(b, "max_iterations", r.max_iterations, "reference");
  return r;
}

}  // namespace

std::string solver_name(SolverKind kind) {
  for (const auto& [name, k] : kSolverNames)
    if (k == kind) return name;
  return "unknown";
}

bool is_svrg_family(SolverKind kind) {
  return kind == SolverKind::ProxSvrg || kind == SolverKind::ProxSvrg2 || kind == SolverKind::ProxSvrgEps;
}

SyntheticSpec parse_synthetic(const json& b) {
  check_keys(b, "synthetic",
             {"n", "d", "density", "correlation", "profile", "kappa_l", "sparsity", "weight_scale",
              "labels", "noise", "seed"});
  SyntheticSpec s;
  s.n = count(b, "n", s.n, "synthetic");
  s.d = count(b, "d", s.d, "synthetic");
  s.density = get<double>(b, "density", s.density, "synthetic");
  s.correlation = get<double>(b, "correlation", s.correlation, "synthetic");
  s.kappa_l = get<double>(b, "kappa_l", s.kappa_l, "synthetic");
  s.scale_profile = choice(b, "profile", s.kappa_l > 1.0 ? ScaleProfile::Geometric : ScaleProfile::Constant,
                           "synthetic",
                           {{"constant", ScaleProfile::Constant}, {"geometric", ScaleProfile::Geometric}});
  s.sparsity = get<double>(b, "sparsity", s.sparsity, "synthetic");
  s.weight_scale = get<double>(b, "weight_scale", s.weight_scale, "synthetic");
  s.label_model = choice(b, "labels", s.label_model, "synthetic",
                         {{"logistic", LabelModel::Logistic}, {"linear", LabelModel::LinearNoise}});
  s.noise = get<double>(b, "noise", s.noise, "synthetic");
  s.seed = get<std::uint64_t>(b, "seed", s.seed, "synthetic");
  if (s.n == 0 || s.d == 0) throw ConfigError("synthetic.n and synthetic.d must be positive");
  if (!(s.density > 0.0 && s.density <= 1.0)) throw ConfigError("synthetic.density must lie in (0, 1]");
  if (!(s.correlation >= 0.0 && s.correlation < 1.0))
    throw ConfigError("synthetic.correlation must lie in [0, 1)");
  if (!(s.kappa_l >= 1.0) || !std::isfinite(s.kappa_l)) throw ConfigError("synthetic.kappa_l must be >= 1");
  if (!(s.sparsity >= 0.0 && s.sparsity <= 1.0)) throw ConfigError("synthetic.sparsity must lie in [0, 1]");
  if (!(s.noise >= 0.0) || !(s.weight_scale >= 0.0))
    throw ConfigError("synthetic.noise and synthetic.weight_scale must be nonnegative");
  return s;
}

json synthetic_to_json(const SyntheticSpec& s) {
  return json{{"n", s.n},
              {"d", s.d},
              {"density", s.density},
              {"correlation", s.correlation},
              {"profile", s.scale_profile == ScaleProfile::Geometric ? "geometric" : "constant"},
              {"kappa_l", s.kappa_l},
              {"sparsity", s.sparsity},
              {"weight_scale", s.weight_scale},
              {"labels", s.label_model == LabelModel::Logistic ? "logistic" : "linear"},
              {"noise", s.noise},
              {"seed", s.seed}};
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"problem", "solvers", "seeds", "output", "reference", "variance"});
  if (!doc.contains("problem")) throw ConfigError("config needs a 'problem' section");
  RunConfig c;
  c.problem = parse_problem(doc.at("problem"));
  const auto it = doc.find("solvers");
  if (it == doc.end() || !it->is_array() || it->empty())
    throw ConfigError("config needs a non-empty 'solvers' array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < it->size(); ++i) {
    c.solvers.push_back(parse_solver((*it)[i], i));
    if (!ids.insert(c.solvers.back().id).second)
      throw ConfigError("duplicate solver id '" + c.solvers.back().id + "'; set distinct 'id' fields");
  }
  if (const auto s = doc.find("seeds"); s != doc.end()) {
    if (!s->is_array() || s->empty()) throw ConfigError("seeds must be a non-empty array");
    c.seeds.clear();
    for (const auto& v : *s) {
      if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("seeds must be nonnegative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  c.output = get<std::string>(doc, "output", "", "config");
  if (doc.contains("reference")) c.reference = parse_reference(doc.at("reference"));
  if (c.reference.policy == ReferencePolicy::Analytic &&
      !(c.problem.loss == LossKind::LeastSquares && c.problem.lambda1 == 0.0))
    throw ConfigError("reference policy 'analytic' needs least_squares with lambda1 = 0");
  c.variance = get<bool>(doc, "variance", false, "config");
  return c;
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= node->size()) throw ConfigError("override path '" + path + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a scalar");
      node = &(*node)[key];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

json canonical_json(const RunConfig& c) {
  const auto& p = c.problem;
  json problem{{"loss", loss_name(p.loss)},
               {"lambda1", p.lambda1},
               {"lambda2", p.lambda2},
               {"splitting", split_name(p.splitting)},
               {"normalize", p.normalize}};
  if (p.dataset) problem["dataset"] = *p.dataset;
  if (p.min_dimension) problem["min_dimension"] = *p.min_dimension;
  if (p.synthetic) problem["synthetic"] = synthetic_to_json(*p.synthetic);
  if (!p.label_map.empty()) {
    json lm = json::array();
    for (const auto& [from, to] : p.label_map) lm.push_back({from, to});
    problem["label_map"] = lm;
  }
  json solvers = json::array();
  for (const auto& s : c.solvers) {
    json b{{"name", solver_name(s.kind)},
           {"id", s.id},
           {"eta_scale", s.eta_scale},
           {"m_factor", s.m_factor},
           {"passes", s.passes},
           {"snapshot", s.snapshot == SnapshotRule::StageAverage ? "average" : "last"},
           {"sampling", s.sampling == SamplingKind::Uniform ? "uniform" : "lipschitz"},
           {"schedule", s.inverse_mu_k ? "inverse_mu_k" : "constant"},
           {"epsilon", s.epsilon},
           {"warmup_passes", s.warmup_passes},
           {"backtracking", s.backtracking},
           {"restart", s.restart},
           {"sweep", s.sweep}};
    if (s.eta) b["eta"] = *s.eta;
    if (s.m) b["m"] = *s.m;
    if (s.stages) b["stages"] = *s.stages;
    if (s.sweep) b["sweep_range"] = {s.sweep_min, s.sweep_max};
    solvers.push_back(b);
  }
  const char* policy = "solve";
  switch (c.reference.policy) {
    case ReferencePolicy::None: policy = "none"; break;
    case ReferencePolicy::Analytic: policy = "analytic"; break;
    case ReferencePolicy::Solve: policy = "solve"; break;
    case ReferencePolicy::Value: policy = "value"; break;
  }
  json reference{{"policy", policy}};
  if (c.reference.policy == ReferencePolicy::Value) reference["value"] = c.reference.value;
  if (c.reference.policy == ReferencePolicy::Solve) {
    reference["tolerance"] = c.reference.tolerance;
    reference["max_iterations"] = c.reference.max_iterations;
  }
  return json{{"problem", problem}, {"solvers", solvers}, {"reference", reference}, {"variance", c.variance}};
}

std::string config_hash(const RunConfig& c) {
  const std::string text = canonical_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace psvrg::cli
