#include "psvrg/data_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "psvrg/error.hpp"
#include "psvrg/sampling.hpp"

namespace psvrg {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> min_dimension,
                     std::string source) {
  Dataset ds;
  ds.metadata.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);

    std::size_t pos = 0;
    auto next_token = [&](std::size_t& column) -> std::string_view {
      while (pos < sv.size() && is_space(sv[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < sv.size() && !is_space(sv[pos])) ++pos;
      column = start + 1;
      return sv.substr(start, pos - start);
    };

    std::size_t column = 0;
    const std::string_view label_tok = next_token(column);
    if (label_tok.empty()) continue;
    double label = 0.0;
    if (!parse_number(label_tok, label) || !std::isfinite(label))
      throw ParseError("malformed label '" + std::string(label_tok) + "'", line_no, column);

    entries.clear();
    std::uint64_t prev = 0;
    for (;;) {
      const std::string_view tok = next_token(column);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("expected idx:val, got '" + std::string(tok) + "'", line_no, column);
      std::uint64_t idx = 0;
      double val = 0.0;
      if (!parse_number(tok.substr(0, colon), idx) || idx == 0)
        throw ParseError("malformed feature index in '" + std::string(tok) + "'", line_no, column);
      if (!parse_number(tok.substr(colon + 1), val) || !std::isfinite(val))
        throw ParseError("malformed feature value in '" + std::string(tok) + "'", line_no,
                         column + colon + 1);
      if (idx <= prev)
        throw ParseError("feature indices must be strictly ascending", line_no, column);
      if (idx > std::numeric_limits<std::uint32_t>::max())
        throw ParseError("feature index too large", line_no, column);
      prev = idx;
      entries.emplace_back(static_cast<std::uint32_t>(idx - 1), val);
    }
    max_index = std::max<std::size_t>(max_index, prev);
    ds.examples.push_back(Example{SparseVector(prev, entries), label});
  }
  if (ds.examples.empty()) throw ParseError("no examples in input", line_no + 1, 1);

  ds.dimension = std::max<std::size_t>(max_index, min_dimension.value_or(0));
  if (ds.dimension == 0) ds.dimension = 1;
  for (auto& ex : ds.examples) ex.features.set_dim(ds.dimension);
  return ds;
}

Dataset load_libsvm(const std::string& path, std::optional<std::size_t> min_dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  return parse_libsvm(in, min_dimension, path);
}

void write_libsvm(std::ostream& out, const Dataset& dataset) {
  std::string line;
  for (const auto& ex : dataset.examples) {
    line.clear();
    append_double(line, ex.label);
    const auto idx = ex.features.indices();
    const auto val = ex.features.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      line += ' ';
      line += std::to_string(static_cast<std::uint64_t>(idx[k]) + 1);
      line += ':';
      append_double(line, val[k]);
    }
    line += '\n';
    out << line;
  }
}

Dataset normalize_rows(Dataset dataset) {
  constexpr double kUnitTolerance = 4.0 * std::numeric_limits<double>::epsilon();
  for (auto& ex : dataset.examples) {
    const double sq = ex.features.squared_norm();
    if (sq == 0.0 || std::fabs(sq - 1.0) <= kUnitTolerance) continue;
    ex.features.scale(1.0 / std::sqrt(sq));
  }
  dataset.metadata.normalized = true;
  return dataset;
}

Dataset binarize_labels(Dataset dataset, const std::map<double, double>& rule) {
  for (const auto& [from, to] : rule)
    if (to != 1.0 && to != -1.0) throw ArgumentError("label rule must map onto +1 and -1");
  for (auto& ex : dataset.examples) {
    const auto it = rule.find(ex.label);
    if (it == rule.end()) {
      std::ostringstream os;
      os << "label " << ex.label << " is not covered by the mapping rule";
      throw ArgumentError(os.str());
    }
    ex.label = it->second;
  }
  return dataset;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw ArgumentError("synthetic n and d must be positive");
  if (spec.d > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("d too large");
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw ArgumentError("density must lie in (0, 1]");
  if (!(spec.correlation >= 0.0 && spec.correlation < 1.0))
    throw ArgumentError("correlation must lie in [0, 1)");
  if (!(spec.kappa_l >= 1.0) || !std::isfinite(spec.kappa_l)) throw ArgumentError("kappa_l must be >= 1");
  if (!(spec.sparsity >= 0.0 && spec.sparsity <= 1.0)) throw ArgumentError("sparsity must lie in [0, 1]");
  if (!(spec.noise >= 0.0) || !(spec.weight_scale >= 0.0))
    throw ArgumentError("noise and weight scale must be nonnegative");

  SeededRng rng(spec.seed);
  const std::size_t d = spec.d;

  auto unit_normal = [&](DenseVector& v) {
    double sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      sq += x * x;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& x : v) x *= inv;
  };

  DenseVector shared(d);
  unit_normal(shared);
  DenseVector planted(d, 0.0);
  for (auto& w : planted) {
    const bool zero = rng.uniform01() < spec.sparsity;
    const double g = rng.normal();
    w = zero ? 0.0 : g * spec.weight_scale;
  }

  SyntheticData out;
  out.planted = planted;
  Dataset& ds = out.dataset;
  ds.dimension = d;
  ds.examples.reserve(spec.n);
  const double own = std::sqrt(1.0 - spec.correlation);
  const double common = std::sqrt(spec.correlation);
  DenseVector row(d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double sq = 0.0;
    for (auto& x : row) {
      const bool keep = spec.density >= 1.0 || rng.uniform01() < spec.density;
      x = keep ? rng.normal() : 0.0;
      sq += x * x;
    }
    const double zscale = sq > 0.0 ? own / std::sqrt(sq) : 0.0;
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = row[j] * zscale + common * shared[j];
      norm_sq += row[j] * row[j];
    }
    double scale = 1.0;
    if (spec.scale_profile == ScaleProfile::Geometric) {
      const double u = spec.n > 1 ? static_cast<double>(i) / static_cast<double>(spec.n - 1) : 0.5;
      scale = std::pow(spec.kappa_l, u - 0.5);
    }
    if (norm_sq > 0.0) {
      const double f = scale / std::sqrt(norm_sq);
      for (auto& x : row) x *= f;
    }

    double margin = 0.0;
    for (std::size_t j = 0; j < d; ++j) margin += row[j] * planted[j];
    double label;
    if (spec.label_model == LabelModel::Logistic) {
      const double p = 1.0 / (1.0 + std::exp(-margin));
      label = rng.uniform01() < p ? 1.0 : -1.0;
    } else {
      label = margin + spec.noise * rng.normal();
    }
    ds.examples.push_back(Example{SparseVector::from_dense(row), label});
  }

  std::ostringstream src;
  src << "synthetic(n=" << spec.n << ",d=" << spec.d << ",kappa_l=" << spec.kappa_l
      << ",seed=" << spec.seed << ")";
  ds.metadata.source = src.str();
  ds.metadata.normalized = spec.scale_profile == ScaleProfile::Constant;
  return out;
}

}  // namespace psvrg
