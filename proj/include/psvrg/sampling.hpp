#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace psvrg {

/// xoshiro256** seeded through splitmix64. Integer output is identical on every
/// platform for a given seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64();
  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform01();
  /// Uniform integer in [0, n) by multiply-shift (Lemire), with rejection.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via the polar method.
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Probabilities q_1..q_n over component indices with O(1) alias-table draws.
class SamplingDistribution {
 public:
  /// Probabilities must be >= 1e-15 each and sum to 1 within 1e-12.
  explicit SamplingDistribution(std::vector<double> probabilities);

  std::size_t size() const noexcept { return q_.size(); }
  std::span<const double> probabilities() const noexcept { return q_; }
  double probability(std::size_t i) const { return q_.at(i); }
  bool is_uniform() const noexcept { return uniform_; }

  std::size_t sample(SeededRng& rng) const;

 private:
  std::vector<double> q_;
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
  bool uniform_ = false;
};

inline constexpr double kMinProbability = 1e-15;

SamplingDistribution uniform_sampling(std::size_t n);
/// q_i = L_i / sum_j L_j.
SamplingDistribution lipschitz_weighted_sampling(std::span<const double> lipschitz);
/// L_Q = max_i L_i / (q_i n).
double l_q(const SamplingDistribution& q, std::span<const double> lipschitz);

}  // namespace psvrg
