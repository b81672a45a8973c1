#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "psvrg/losses.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

struct DatasetMetadata {
  std::string source;
  bool normalized = false;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t dimension = 0;
  DatasetMetadata metadata;

  std::size_t size() const noexcept { return examples.size(); }
};

/// Parses LIBSVM text: "label idx:val idx:val ...", 1-based strictly
/// increasing indices. Blank lines and '#' comments are skipped. The
/// dimension is the largest index seen, raised to `min_dimension` if given.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> min_dimension = std::nullopt,
                     std::string source = {});
Dataset load_libsvm(const std::string& path,
                    std::optional<std::size_t> min_dimension = std::nullopt);

/// Writes with 17 significant digits so parsing reproduces every value.
void write_libsvm(std::ostream& out, const Dataset& dataset);

/// Scales each nonzero row to unit l2 norm. Zero rows are left alone.
Dataset normalize_rows(Dataset dataset);

/// Maps every observed label through `rule`; throws ArgumentError on a label
/// the rule does not cover.
Dataset binarize_labels(Dataset dataset, const std::map<double, double>& rule);

enum class ScaleProfile { Constant, Geometric };
enum class LabelModel { Logistic, LinearNoise };

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 100;
  /// Probability that a feature entry is nonzero.
  double density = 1.0;
  /// Weight of a direction shared by all rows, in [0, 1).
  double correlation = 0.0;
  ScaleProfile scale_profile = ScaleProfile::Constant;
  /// Ratio of the largest to smallest row norm under the geometric profile.
  double kappa_l = 1.0;
  /// Fraction of planted weights that are zero, in [0, 1].
  double sparsity = 0.0;
  double weight_scale = 1.0;
  LabelModel label_model = LabelModel::Logistic;
  double noise = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset dataset;
  DenseVector planted;
};

/// Rows are Gaussian (masked by `density`, mixed with a shared direction by
/// `correlation`), normalized, then scaled to norms kappa_l^(u_i - 1/2) with
/// u_i evenly spaced in [0, 1].
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace psvrg
