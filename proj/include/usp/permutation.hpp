#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usp/error.hpp"
#include "usp/estimators.hpp"
#include "usp/parallel.hpp"
#include "usp/random.hpp"
#include "usp/special_functions.hpp"
#include "usp/table.hpp"

namespace usp {

enum class Method { usp, pearson, g };
enum class Mode { permutation, classic };
enum class TiePolicy { randomized, conservative };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::usp: return "usp";
    case Method::pearson: return "pearson";
    case Method::g: return "g";
  }
  return "?";
}

inline const char* to_string(Mode m) { return m == Mode::permutation ? "permutation" : "classic"; }
inline const char* to_string(TiePolicy t) { return t == TiePolicy::randomized ? "randomized" : "conservative"; }

inline Method parse_method(std::string_view s) {
  if (s == "usp") return Method::usp;
  if (s == "pearson") return Method::pearson;
  if (s == "g") return Method::g;
  throw InvalidConfig("unknown method '" + std::string(s) + "' (expected usp, pearson or g)");
}

inline Mode parse_mode(std::string_view s) {
  if (s == "permutation" || s == "perm") return Mode::permutation;
  if (s == "classic") return Mode::classic;
  throw InvalidConfig("unknown mode '" + std::string(s) + "' (expected permutation or classic)");
}

inline TiePolicy parse_tie_policy(std::string_view s) {
  if (s == "randomized") return TiePolicy::randomized;
  if (s == "conservative") return TiePolicy::conservative;
  throw InvalidConfig("unknown tie policy '" + std::string(s) + "'");
}

inline StatisticKind statistic_kind(Method m) {
  switch (m) {
    case Method::usp: return StatisticKind::usp;
    case Method::pearson: return StatisticKind::pearson;
    case Method::g: return StatisticKind::g;
  }
  return StatisticKind::usp;
}

struct PermutationConfig {
  std::size_t B = 999;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  TiePolicy tie_policy = TiePolicy::randomized;
  // Workers for the B replicates; never changes the result.
  unsigned threads = 1;

  void validate() const {
    if (B < 1) throw InvalidConfig("number of permutations B must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfig("alpha must lie strictly between 0 and 1");
  }

  /// False when alpha·(B+1) < 1, i.e. even the smallest attainable
  /// p-value 1/(B+1) exceeds alpha and the test can never reject.
  bool can_reject() const { return alpha * static_cast<double>(B + 1) >= 1.0; }
};

struct TestResult {
  Method method = Method::usp;
  Mode mode = Mode::permutation;
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  std::optional<std::size_t> B;  // permutation mode
  std::optional<int> df;         // classic mode
  std::uint64_t seed = 0;
};

/// A table with the same margins as `table`, distributed as the table
/// obtained by pairing the row labels with a uniformly random permutation of
/// the column labels. Filled row by row: each row's total is split across
/// the columns by sequential hypergeometric draws from the column labels not
/// yet used, so the cost does not grow with n.
inline ContingencyTable permuted_table(const ContingencyTable& table, RandomStream& rng) {
  const std::size_t rows = table.rows();
  const std::size_t cols = table.cols();
  std::vector<Count> remaining(table.col_totals().begin(), table.col_totals().end());
  std::vector<Count> cells(rows * cols, 0);
  Count population = table.total();
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    Count draws = table.row_total(i);
    Count pool = population;
    for (std::size_t j = 0; j < cols && draws > 0; ++j) {
      const Count x = (j + 1 == cols) ? draws : sample_hypergeometric(rng, pool, remaining[j], draws);
      cells[i * cols + j] = x;
      pool -= remaining[j];
      remaining[j] -= x;
      draws -= x;
    }
    population -= table.row_total(i);
  }
  for (std::size_t j = 0; j < cols; ++j) cells[(rows - 1) * cols + j] = remaining[j];
  return ContingencyTable(rows, cols, std::move(cells));
}

/// Reference construction of permuted_table: expands the observations,
/// Fisher–Yates shuffles the column labels and recounts. O(n).
inline ContingencyTable permuted_table_by_shuffle(const ContingencyTable& table, RandomStream& rng) {
  const auto obs = observations_of(table);
  std::vector<std::size_t> col_labels;
  col_labels.reserve(obs.size());
  for (const auto& o : obs) col_labels.push_back(o.col);
  for (std::size_t k = col_labels.size(); k > 1; --k) {
    const auto swap_with = static_cast<std::size_t>(rng.uniform_below(k));
    std::swap(col_labels[k - 1], col_labels[swap_with]);
  }
  std::vector<Count> cells(table.rows() * table.cols(), 0);
  for (std::size_t k = 0; k < obs.size(); ++k) ++cells[obs[k].row * table.cols() + col_labels[k]];
  return ContingencyTable(table.rows(), table.cols(), std::move(cells));
}

// Relative tolerance under which two statistic values count as tied. Covers
// tables that are relabelings of each other but sum their cells in a
// different order.
inline constexpr double kTieTolerance = 1e-12;

inline bool statistics_tie(double a, double b) {
  return a == b || std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

struct PermutationOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t exceed = 0;  // #{b : T_b > T_0}
  std::size_t ties = 0;    // #{b : T_b = T_0}
};

/// Stream that drives replicate b (1-based) of a permutation run keyed by
/// `seed`; stream 0 is reserved for the tie-break draw.
inline RandomStream replicate_stream(std::uint64_t seed, std::size_t b) { return RandomStream(seed, b); }

/// Statistic values on B permuted tables, replicate b drawn from
/// replicate_stream(seed, b). Order matches b = 1..B for any thread count.
template <typename Statistic>
std::vector<double> permutation_statistics(const ContingencyTable& table, Statistic&& statistic, std::size_t B,
                                           std::uint64_t seed, unsigned threads = 1) {
  std::vector<double> values(B);
  parallel_for(B, threads, [&](std::size_t k) {
    RandomStream rng = replicate_stream(seed, k + 1);
    values[k] = static_cast<double>(statistic(permuted_table(table, rng)));
  });
  return values;
}

/// Rank-based p-value of `observed` among `observed` and `permuted`.
/// Randomized: (1 + #greater + U) / (B+1), U uniform on {0, ..., #ties}.
/// Conservative: (1 + #greater + #ties) / (B+1).
inline PermutationOutcome rank_p_value(double observed, std::span<const double> permuted, TiePolicy policy,
                                       RandomStream& tie_rng) {
  PermutationOutcome out;
  out.statistic = observed;
  for (double v : permuted) {
    if (statistics_tie(v, observed)) {
      ++out.ties;
    } else if (v > observed) {
      ++out.exceed;
    }
  }
  std::size_t rank_above = out.exceed;
  if (policy == TiePolicy::conservative) {
    rank_above += out.ties;
  } else if (out.ties > 0) {
    rank_above += static_cast<std::size_t>(tie_rng.uniform_below(out.ties + 1));
  }
  out.p_value = static_cast<double>(1 + rank_above) / static_cast<double>(permuted.size() + 1);
  return out;
}

/// Permutation p-value of `statistic` on `table`. Replicate b uses
/// replicate_stream(config.seed, b) and the tie break uses stream 0, so the
/// result depends only on (table, statistic, config) and not on threads.
template <typename Statistic>
PermutationOutcome permutation_pvalue(const ContingencyTable& table, Statistic&& statistic,
                                      const PermutationConfig& config) {
  config.validate();
  const double observed = static_cast<double>(statistic(table));
  const auto permuted = permutation_statistics(table, statistic, config.B, config.seed, config.threads);
  RandomStream tie_rng(config.seed, 0);
  return rank_p_value(observed, permuted, config.tie_policy, tie_rng);
}

/// Runs one test on one table. Classic mode compares Pearson or G to the
/// chi-squared law with (I-1)(J-1) degrees of freedom; a table with a single
/// row or column has df = 0 and p = 1.
inline TestResult run_test(const ContingencyTable& table, Method method, Mode mode, const PermutationConfig& config) {
  config.validate();
  TestResult result;
  result.method = method;
  result.mode = mode;
  result.alpha = config.alpha;
  result.seed = config.seed;
  const StatisticKind kind = statistic_kind(method);

  if (mode == Mode::classic) {
    if (method == Method::usp) throw InvalidMode("the USP statistic has no classic (chi-squared) mode");
    result.statistic = compute_statistic(kind, table).value;
    const int df = static_cast<int>((table.rows() - 1) * (table.cols() - 1));
    result.df = df;
    result.p_value = df == 0 ? 1.0 : chi2_sf(result.statistic, df);
  } else {
    auto stat = [kind](const ContingencyTable& t) { return compute_statistic(kind, t).value; };
    const auto outcome = permutation_pvalue(table, stat, config);
    result.statistic = outcome.statistic;
    result.p_value = outcome.p_value;
    result.B = config.B;
  }
  result.reject = result.p_value <= config.alpha;
  return result;
}

}  // namespace usp
