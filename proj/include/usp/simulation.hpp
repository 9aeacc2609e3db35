#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "usp/asymptotics.hpp"
#include "usp/error.hpp"
#include "usp/estimators.hpp"
#include "usp/parallel.hpp"
#include "usp/permutation.hpp"
#include "usp/random.hpp"
#include "usp/table.hpp"

namespace usp {

enum class FamilyKind { sparse, dense, multiplicative };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::sparse: return "sparse";
    case FamilyKind::dense: return "dense";
    case FamilyKind::multiplicative: return "multiplicative";
  }
  return "?";
}

inline FamilyKind parse_family(std::string_view s) {
  if (s == "sparse") return FamilyKind::sparse;
  if (s == "dense") return FamilyKind::dense;
  if (s == "multiplicative") return FamilyKind::multiplicative;
  throw InvalidConfig("unknown family '" + std::string(s) + "' (expected sparse, dense or multiplicative)");
}

/// Null distribution p_ij ∝ 2^{-(i+j)} perturbed by +ε at (1,1), (2,2) and
/// -ε at (1,2), (2,1). Margins do not depend on ε and D = 4ε².
inline JointDistribution sparse_family(std::size_t I, std::size_t J, double epsilon) {
  if (I < 2 || J < 2) throw InfeasibleEpsilon("sparse family needs I, J >= 2");
  if (!(epsilon >= 0.0)) throw InfeasibleEpsilon("epsilon must be >= 0");
  const double norm = (1.0 - std::ldexp(1.0, -static_cast<int>(I))) * (1.0 - std::ldexp(1.0, -static_cast<int>(J)));
  std::vector<double> p(I * J);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) p[i * J + j] = std::ldexp(1.0, -static_cast<int>(i + j + 2)) / norm;
  if (epsilon > p[1] || epsilon > p[J] || p[0] + epsilon > 1.0 || p[J + 1] + epsilon > 1.0)
    throw InfeasibleEpsilon("epsilon " + std::to_string(epsilon) + " pushes a sparse-family cell outside [0,1]");
  p[0] += epsilon;
  p[J + 1] += epsilon;
  p[1] -= epsilon;
  p[J] -= epsilon;
  return JointDistribution(I, J, std::move(p));
}

/// Checkerboard perturbation of the uniform table: 1/(IJ) + (-1)^{i+j} ε.
/// The ±ε cells cancel in the total only when I or J is even, and D = IJε²
/// when both are even (the margins then stay uniform).
inline JointDistribution dense_family(std::size_t I, std::size_t J, double epsilon) {
  if (I < 1 || J < 1) throw InfeasibleEpsilon("dense family needs I, J >= 1");
  const double base = 1.0 / static_cast<double>(I * J);
  if (!(epsilon >= 0.0) || epsilon > base)
    throw InfeasibleEpsilon("dense family needs 0 <= epsilon <= 1/(IJ)");
  if (epsilon > 0.0 && I % 2 == 1 && J % 2 == 1)
    throw InfeasibleEpsilon("dense family with epsilon > 0 needs I or J even");
  std::vector<double> p(I * J);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) p[i * J + j] = base + ((i + j) % 2 == 0 ? epsilon : -epsilon);
  return JointDistribution(I, J, std::move(p));
}

/// 4×4 family p_ij = (1 + (-1)^{i+j} ε) / (C_ε 2^{i+j}).
inline JointDistribution multiplicative_family(double epsilon) {
  constexpr std::size_t I = 4;
  constexpr std::size_t J = 4;
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InfeasibleEpsilon("multiplicative family needs 0 <= epsilon <= 1");
  std::vector<double> w(I * J);
  double normaliser = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
      w[i * J + j] = (1.0 + sign * epsilon) * std::ldexp(1.0, -static_cast<int>(i + j + 2));
      normaliser += w[i * J + j];
    }
  }
  for (double& v : w) v /= normaliser;
  return JointDistribution(I, J, std::move(w));
}

struct AlternativeFamily {
  FamilyKind kind = FamilyKind::sparse;
  std::size_t I = 5;
  std::size_t J = 8;

  static AlternativeFamily with_default_shape(FamilyKind kind) {
    switch (kind) {
      case FamilyKind::sparse: return {kind, 5, 8};
      case FamilyKind::dense: return {kind, 6, 8};
      case FamilyKind::multiplicative: return {kind, 4, 4};
    }
    return {};
  }

  JointDistribution at(double epsilon) const {
    switch (kind) {
      case FamilyKind::sparse: return sparse_family(I, J, epsilon);
      case FamilyKind::dense: return dense_family(I, J, epsilon);
      case FamilyKind::multiplicative: return multiplicative_family(epsilon);
    }
    throw InvalidConfig("unknown family");
  }

  /// 11 points: [0, 0.075] sparse, [0, 1/(IJ)] dense, [0, 0.9] multiplicative.
  std::vector<double> default_grid() const {
    switch (kind) {
      case FamilyKind::sparse: return linear_grid(0.0, 0.075, 11);
      case FamilyKind::dense: return linear_grid(0.0, 1.0 / static_cast<double>(I * J), 11);
      case FamilyKind::multiplicative: return linear_grid(0.0, 0.9, 11);
    }
    return {};
  }
};

/// A (method, mode) pair such as "usp" or "g-perm".
struct TestSpec {
  Method method = Method::usp;
  Mode mode = Mode::permutation;

  std::string name() const {
    if (method == Method::usp) return "usp";
    return std::string(to_string(method)) + (mode == Mode::permutation ? "-perm" : "-classic");
  }
  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

inline TestSpec parse_test_spec(std::string_view s) {
  if (s == "usp" || s == "usp-perm") return {Method::usp, Mode::permutation};
  if (s == "pearson-perm") return {Method::pearson, Mode::permutation};
  if (s == "g-perm") return {Method::g, Mode::permutation};
  if (s == "pearson-classic") return {Method::pearson, Mode::classic};
  if (s == "g-classic") return {Method::g, Mode::classic};
  throw InvalidConfig("unknown test '" + std::string(s) +
                      "' (expected usp, pearson-perm, g-perm, pearson-classic or g-classic)");
}

inline std::vector<TestSpec> parse_test_list(std::string_view list) {
  std::vector<TestSpec> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) out.push_back(parse_test_spec(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidConfig("test list is empty");
  return out;
}

inline std::vector<TestSpec> permutation_tests() {
  return {{Method::usp, Mode::permutation}, {Method::pearson, Mode::permutation}, {Method::g, Mode::permutation}};
}

struct TestRate {
  TestSpec test;
  std::size_t reps = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
  double std_err = 0.0;  // √(r(1-r)/reps)
};

struct PowerCurvePoint {
  double epsilon = 0.0;
  Count n = 0;
  std::size_t reps = 0;
  std::vector<TestRate> rates;
};

inline TestRate make_rate(const TestSpec& test, std::size_t rejections, std::size_t reps) {
  TestRate rate{test, reps, rejections, 0.0, 0.0};
  if (reps > 0) {
    rate.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
    rate.std_err = std::sqrt(rate.rejection_rate * (1.0 - rate.rejection_rate) / static_cast<double>(reps));
  }
  return rate;
}

/// Runs one configured test on a simulated table. Pearson and G are
/// undefined when a row or column is empty; simulated tables are then
/// reduced to their non-empty rows and columns first. In permutation mode
/// this leaves the test unchanged, because permuted tables keep the same
/// empty margins.
inline TestResult run_simulated_test(const ContingencyTable& table, const TestSpec& test,
                                     const PermutationConfig& config) {
  if (test.method != Method::usp && table.has_empty_margin())
    return run_test(drop_empty_margins(table), test.method, test.mode, config);
  return run_test(table, test.method, test.mode, config);
}

namespace detail {
inline void check_sim_args(std::size_t reps, std::span<const TestSpec> tests, const PermutationConfig& config) {
  if (reps < 1) throw InvalidConfig("reps must be >= 1");
  if (tests.empty()) throw InvalidConfig("at least one test is required");
  config.validate();
}

inline PermutationConfig replicate_config(const PermutationConfig& base, std::uint64_t seed) {
  PermutationConfig c = base;
  c.seed = seed;
  c.threads = 1;
  return c;
}
}  // namespace detail

/// Monte Carlo rejection rates over a grid of ε. Replicate r at grid index k
/// samples its table from RandomStream(derive_seed(seed, {0, k}), r); test t
/// then runs with permutation seed derive_seed(seed, {t + 1, k, r}). All
/// tests in a replicate see the same table. `config.threads` workers split
/// the replicates; the output does not depend on it.
inline std::vector<PowerCurvePoint> power_curve(const std::function<JointDistribution(double)>& family,
                                                std::span<const double> eps_grid, Count n, std::size_t reps,
                                                std::span<const TestSpec> tests, const PermutationConfig& config) {
  detail::check_sim_args(reps, tests, config);
  if (n < 1) throw InvalidConfig("sample size n must be >= 1");
  std::vector<JointDistribution> dists;
  dists.reserve(eps_grid.size());
  for (double eps : eps_grid) dists.push_back(family(eps));

  const std::size_t T = tests.size();
  std::vector<unsigned char> decisions(eps_grid.size() * reps * T, 0);
  parallel_for(eps_grid.size() * reps, config.threads, [&](std::size_t task) {
    const std::size_t k = task / reps;
    const std::size_t r = task % reps;
    RandomStream data_rng(derive_seed(config.seed, {0, k}), r);
    const ContingencyTable table = sample_table(dists[k], n, data_rng);
    for (std::size_t t = 0; t < T; ++t) {
      const auto cfg = detail::replicate_config(config, derive_seed(config.seed, {t + 1, k, r}));
      decisions[task * T + t] = run_simulated_test(table, tests[t], cfg).reject ? 1 : 0;
    }
  });

  std::vector<PowerCurvePoint> out;
  out.reserve(eps_grid.size());
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    PowerCurvePoint point{eps_grid[k], n, reps, {}};
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t rejections = 0;
      for (std::size_t r = 0; r < reps; ++r) rejections += decisions[(k * reps + r) * T + t];
      point.rates.push_back(make_rate(tests[t], rejections, reps));
    }
    out.push_back(std::move(point));
  }
  return out;
}

inline std::vector<PowerCurvePoint> power_curve(const AlternativeFamily& family, std::span<const double> eps_grid,
                                                Count n, std::size_t reps, std::span<const TestSpec> tests,
                                                const PermutationConfig& config) {
  return power_curve([&family](double eps) { return family.at(eps); }, eps_grid, n, reps, tests, config);
}

/// D-hat on `reps` independent multinomial tables; replicate r draws from
/// RandomStream(seed, r).
inline std::vector<double> dhat_samples(const JointDistribution& dist, Count n, std::size_t reps, std::uint64_t seed,
                                        unsigned threads = 1) {
  if (n < 4) throw SampleTooSmall("D-hat samples need n >= 4");
  std::vector<double> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RandomStream rng(seed, r);
    out[r] = dhat_statistic(sample_table(dist, n, rng)).value;
  });
  return out;
}

enum class SubsampleScheme { without_replacement, with_replacement };

inline const char* to_string(SubsampleScheme s) {
  return s == SubsampleScheme::without_replacement ? "without-replacement" : "with-replacement";
}

/// Rejection proportions over `reps` subsamples of size m drawn from
/// `table`, without replacement by default. Subsample r comes from
/// RandomStream(derive_seed(seed, {0}), r); test t uses permutation seed
/// derive_seed(seed, {t + 1, r}).
inline std::vector<TestRate> subsample_study(const ContingencyTable& table, Count m, std::size_t reps,
                                             std::span<const TestSpec> tests, const PermutationConfig& config,
                                             SubsampleScheme scheme = SubsampleScheme::without_replacement) {
  detail::check_sim_args(reps, tests, config);
  if (m < 4) throw InvalidConfig("subsample size m must be >= 4");
  if (scheme == SubsampleScheme::without_replacement && m > table.total())
    throw SubsampleTooLarge("subsample size " + std::to_string(m) + " exceeds table total " +
                            std::to_string(table.total()));
  const std::size_t T = tests.size();
  std::vector<unsigned char> decisions(reps * T, 0);
  const std::uint64_t data_seed = derive_seed(config.seed, {0});
  parallel_for(reps, config.threads, [&](std::size_t r) {
    RandomStream rng(data_seed, r);
    const ContingencyTable sub =
        scheme == SubsampleScheme::without_replacement ? subsample(table, m, rng) : resample(table, m, rng);
    for (std::size_t t = 0; t < T; ++t) {
      const auto cfg = detail::replicate_config(config, derive_seed(config.seed, {t + 1, r}));
      decisions[r * T + t] = run_simulated_test(sub, tests[t], cfg).reject ? 1 : 0;
    }
  });
  std::vector<TestRate> out;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t rejections = 0;
    for (std::size_t r = 0; r < reps; ++r) rejections += decisions[r * T + t];
    out.push_back(make_rate(tests[t], rejections, reps));
  }
  return out;
}

}  // namespace usp
