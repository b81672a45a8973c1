#include "psvrg/sampling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psvrg/error.hpp"

namespace psvrg {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SeededRng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ArgumentError("uniform_index needs n >= 1");
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double SeededRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

SamplingDistribution::SamplingDistribution(std::vector<double> probabilities)
    : q_(std::move(probabilities)) {
  const std::size_t n = q_.size();
  if (n == 0) throw ArgumentError("sampling distribution needs at least one outcome");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("too many outcomes");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(q_[i] >= kMinProbability) || !std::isfinite(q_[i]))
      throw ArgumentError("probability " + std::to_string(i) + " is below 1e-15 or not finite");
    sum += q_[i];
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw ArgumentError("probabilities must sum to 1");

  uniform_ = true;
  for (double q : q_) uniform_ = uniform_ && q == q_[0];

  // Vose's alias method.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<std::uint32_t>(i);
    scaled[i] = q_[i] * static_cast<double>(n) / sum;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : small) accept_[i] = 1.0;
  for (auto i : large) accept_[i] = 1.0;
}

std::size_t SamplingDistribution::sample(SeededRng& rng) const {
  const auto column = static_cast<std::size_t>(rng.uniform_index(q_.size()));
  if (uniform_) return column;
  return rng.uniform01() < accept_[column] ? column : alias_[column];
}

SamplingDistribution uniform_sampling(std::size_t n) {
  if (n == 0) throw ArgumentError("uniform sampling needs n >= 1");
  return SamplingDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SamplingDistribution lipschitz_weighted_sampling(std::span<const double> lipschitz) {
  if (lipschitz.empty()) throw ArgumentError("empty Lipschitz array");
  double sum = 0.0;
  for (double l : lipschitz) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("Lipschitz constants must be positive");
    sum += l;
  }
  std::vector<double> q(lipschitz.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = lipschitz[i] / sum;
  return SamplingDistribution(std::move(q));
}

double l_q(const SamplingDistribution& q, std::span<const double> lipschitz) {
  if (q.size() != lipschitz.size()) throw ArgumentError("distribution and Lipschitz array differ in length");
  const double n = static_cast<double>(q.size());
  double best = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q.probability(i);
    if (!(qi > 0.0)) throw ArgumentError("zero probability makes L_Q undefined");
    best = std::max(best, lipschitz[i] / (qi * n));
  }
  return best;
}

}  // namespace psvrg
