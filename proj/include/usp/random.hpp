#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include "usp/error.hpp"
#include "usp/special_functions.hpp"

namespace usp {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a sequence of integer keys into a seed, e.g.
/// derive_seed(master, {grid_index, replicate, test}).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// Counter-keyed random stream. The pair (master_seed, stream_id) fully
/// determines the output sequence, so independent tasks can each construct
/// their own stream from a task index without any shared state. The
/// generator underneath is xoshiro256**, seeded by SplitMix64 from
/// master_seed ⊕ mix64(stream_id).
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : master_seed_(master_seed), stream_id_(stream_id) {
    std::uint64_t sm = master_seed ^ mix64(stream_id ^ 0xd1b54a32d192ed03ULL);
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound ≥ 1 (Lemire's multiply-and-reject).
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

namespace detail {

// Inversion sampling that walks outward from the mode, alternating right and
// left. `up(k)` returns pmf(k+1)/pmf(k) and `down(k)` returns pmf(k-1)/pmf(k).
// Expected work is proportional to the standard deviation, and no tail
// probability has to be evaluated from scratch.
template <typename Up, typename Down>
std::int64_t invert_from_mode(double u, std::int64_t lo, std::int64_t hi, std::int64_t mode,
                              double p_mode, Up&& up, Down&& down) {
  double acc = p_mode;
  if (u < acc) return mode;
  std::int64_t left = mode;
  std::int64_t right = mode;
  double p_left = p_mode;
  double p_right = p_mode;
  while (left > lo || right < hi) {
    if (right < hi) {
      p_right *= up(right);
      ++right;
      acc += p_right;
      if (u < acc) return right;
    }
    if (left > lo) {
      p_left *= down(left);
      --left;
      acc += p_left;
      if (u < acc) return left;
    }
  }
  // u landed in the rounding slack above the accumulated mass.
  return mode;
}

}  // namespace detail

/// Binomial(trials, p) variate.
inline std::int64_t sample_binomial(RandomStream& rng, std::int64_t trials, double p) {
  if (trials < 0) throw DomainError("binomial trials must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;

  const double q = 1.0 - p;
  auto mode = static_cast<std::int64_t>(std::floor((static_cast<double>(trials) + 1.0) * p));
  if (mode > trials) mode = trials;
  const double log_p_mode = log_choose(trials, mode) + static_cast<double>(mode) * std::log(p) +
                            static_cast<double>(trials - mode) * std::log(q);
  const double ratio = p / q;
  auto up = [&](std::int64_t k) { return static_cast<double>(trials - k) / static_cast<double>(k + 1) * ratio; };
  auto down = [&](std::int64_t k) { return static_cast<double>(k) / static_cast<double>(trials - k + 1) / ratio; };
  return detail::invert_from_mode(rng.uniform(), 0, trials, mode, std::exp(log_p_mode), up, down);
}

/// Number of marked items among `draws` taken without replacement from a
/// population of `population` items, `marked` of which are marked.
inline std::int64_t sample_hypergeometric(RandomStream& rng, std::int64_t population, std::int64_t marked,
                                          std::int64_t draws) {
  if (population < 0 || marked < 0 || draws < 0 || marked > population || draws > population)
    throw DomainError("invalid hypergeometric parameters");
  if (draws == 0 || marked == 0) return 0;
  if (marked == population) return draws;
  if (draws == population) return marked;

  const std::int64_t lo = std::max<std::int64_t>(0, draws - (population - marked));
  const std::int64_t hi = std::min(draws, marked);
  if (lo == hi) return lo;

  const double np1 = static_cast<double>(population) + 2.0;
  auto mode = static_cast<std::int64_t>(
      std::floor((static_cast<double>(draws) + 1.0) * (static_cast<double>(marked) + 1.0) / np1));
  mode = std::clamp(mode, lo, hi);
  const double log_p_mode = log_choose(marked, mode) + log_choose(population - marked, draws - mode) -
                            log_choose(population, draws);
  const auto K = static_cast<double>(marked);
  const auto N = static_cast<double>(population);
  const auto m = static_cast<double>(draws);
  auto up = [&](std::int64_t k) {
    const auto x = static_cast<double>(k);
    return (K - x) * (m - x) / ((x + 1.0) * (N - K - m + x + 1.0));
  };
  auto down = [&](std::int64_t k) {
    const auto x = static_cast<double>(k);
    return x * (N - K - m + x) / ((K - x + 1.0) * (m - x + 1.0));
  };
  return detail::invert_from_mode(rng.uniform(), lo, hi, mode, std::exp(log_p_mode), up, down);
}

}  // namespace usp
