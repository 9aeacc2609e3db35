#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usp/error.hpp"
#include "usp/table.hpp"

namespace usp {

enum class StatisticKind { pearson, g, usp, dhat };

inline const char* to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::pearson: return "pearson";
    case StatisticKind::g: return "g";
    case StatisticKind::usp: return "usp";
    case StatisticKind::dhat: return "dhat";
  }
  return "?";
}

struct StatisticValue {
  double value = 0.0;
  StatisticKind kind = StatisticKind::usp;
};

/// Σ (p_ij - p'_ij)² / p'_ij; cells with p_ij = p'_ij = 0 contribute nothing.
inline double chi2_divergence(const JointDistribution& p, const JointDistribution& p_ref) {
  if (p.rows() != p_ref.rows() || p.cols() != p_ref.cols())
    throw DimensionMismatch("chi-squared divergence needs distributions of the same shape");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double a = p(i, j);
      const double b = p_ref(i, j);
      if (b == 0.0) {
        if (a > 0.0)
          throw DivergenceUndefined("reference probability is zero at cell (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") where the other is positive");
        continue;
      }
      sum += (a - b) * (a - b) / b;
    }
  }
  return sum;
}

/// D = Σ (p_ij - q_i r_j)².
inline double dependence_measure(const JointDistribution& p) {
  const auto q = p.row_margins();
  const auto r = p.col_margins();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double d = p(i, j) - q[i] * r[j];
      sum += d * d;
    }
  }
  return sum;
}

namespace detail {
inline void require_full_margins(const ContingencyTable& table, const char* name) {
  if (table.total() == 0) throw EmptySample(std::string(name) + " statistic needs n >= 1");
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (table.row_total(i) == 0)
      throw UndefinedStatistic(std::string(name) + " statistic is undefined: row " + std::to_string(i + 1) +
                               " has no observations");
  for (std::size_t j = 0; j < table.cols(); ++j)
    if (table.col_total(j) == 0)
      throw UndefinedStatistic(std::string(name) + " statistic is undefined: column " + std::to_string(j + 1) +
                               " has no observations");
}

inline void require_four(const ContingencyTable& table, const char* name) {
  if (table.total() < 4)
    throw SampleTooSmall(std::string(name) + " needs n >= 4, got n = " + std::to_string(table.total()));
}
}  // namespace detail

/// Pearson's Σ (o - e)² / e.
inline StatisticValue pearson_statistic(const ContingencyTable& table) {
  detail::require_full_margins(table, "Pearson");
  const auto n = static_cast<double>(table.total());
  double sum = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const double e = static_cast<double>(table.row_total(i)) * static_cast<double>(table.col_total(j)) / n;
      const double d = static_cast<double>(table(i, j)) - e;
      sum += d * d / e;
    }
  }
  return {sum, StatisticKind::pearson};
}

/// G = 2 Σ o log(o / e), with empty cells contributing 0.
inline StatisticValue g_statistic(const ContingencyTable& table) {
  detail::require_full_margins(table, "G");
  const auto n = static_cast<double>(table.total());
  double sum = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const Count o = table(i, j);
      if (o == 0) continue;
      const double e = static_cast<double>(table.row_total(i)) * static_cast<double>(table.col_total(j)) / n;
      sum += static_cast<double>(o) * std::log(static_cast<double>(o) / e);
    }
  }
  // Rounding can leave a tiny negative value when o ≈ e everywhere.
  return {std::max(0.0, 2.0 * sum), StatisticKind::g};
}

namespace detail {

using Int128 = __int128;

// Above this n the integer numerators could exceed 127 bits.
inline constexpr Count kExactStatisticLimit = Count{1} << 16;

// The two cell sums shared by U-hat and D-hat, scaled to integers:
//   cross  = Σ (n o_ij - o_i+ o_+j)²   (= n² Σ (o - e)²)
//   weight = Σ o_ij o_i+ o_+j          (= n Σ o e)
struct CellSums {
  Int128 cross = 0;
  Int128 weight = 0;
};

inline CellSums cell_sums(const ContingencyTable& table) {
  const Int128 n = table.total();
  CellSums s;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const Int128 a = table.row_total(i);
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const Int128 b = table.col_total(j);
      const Int128 o = table(i, j);
      const Int128 d = n * o - a * b;
      s.cross += d * d;
      s.weight += o * a * b;
    }
  }
  return s;
}

// n³(n-2)(n-3) · U-hat.
inline Int128 usp_numerator(const CellSums& s, Int128 n) { return s.cross * (n - 2) - 4 * n * s.weight; }

inline double to_double(Int128 v) { return static_cast<double>(static_cast<long double>(v)); }

inline double sum_of_squares(std::span<const Count> v) {
  double s = 0.0;
  for (Count x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

}  // namespace detail

/// The USP statistic
///   U = Σ (o - e)² / (n(n-3)) - 4 Σ o e / (n(n-2)(n-3)),  n ≥ 4.
/// Defined for tables with empty rows or columns. For n < 65536 it is
/// evaluated from an exact integer numerator, so two tables with the same
/// mathematical value produce the same double.
inline StatisticValue usp_statistic(const ContingencyTable& table) {
  detail::require_four(table, "USP statistic");
  const Count n = table.total();
  if (n < detail::kExactStatisticLimit) {
    const detail::Int128 nn = n;
    const auto numerator = detail::usp_numerator(detail::cell_sums(table), nn);
    const detail::Int128 denominator = nn * nn * nn * (nn - 2) * (nn - 3);
    return {detail::to_double(numerator) / detail::to_double(denominator), StatisticKind::usp};
  }
  const auto nd = static_cast<double>(n);
  const RealMatrix e = expected_counts(table);
  double squares = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    const auto o = static_cast<double>(table.counts()[k]);
    squares += (o - e.values[k]) * (o - e.values[k]);
    weighted += o * e.values[k];
  }
  return {squares / (nd * (nd - 3.0)) - 4.0 * weighted / (nd * (nd - 2.0) * (nd - 3.0)), StatisticKind::usp};
}

/// Unbiased estimator of D from the fourth-order U-statistic (n ≥ 4):
///   U-hat + (Σ o_i+² + Σ o_+j²) / (n(n-1)(n-3))
///         + (3n-2) (Σ o_i+²)(Σ o_+j²) / (n³(n-1)(n-2)(n-3))
///         - n / ((n-1)(n-3)).
inline StatisticValue dhat_statistic(const ContingencyTable& table) {
  detail::require_four(table, "D-hat");
  const Count n = table.total();
  if (n < detail::kExactStatisticLimit) {
    using detail::Int128;
    const Int128 nn = n;
    Int128 rows_sq = 0;
    Int128 cols_sq = 0;
    for (Count a : table.row_totals()) rows_sq += Int128{a} * a;
    for (Count b : table.col_totals()) cols_sq += Int128{b} * b;
    // Everything over the common denominator n³(n-1)(n-2)(n-3).
    const Int128 n2 = nn * nn;
    const Int128 numerator = (nn - 1) * detail::usp_numerator(detail::cell_sums(table), nn) +
                             (rows_sq + cols_sq) * n2 * (nn - 2) + (3 * nn - 2) * rows_sq * cols_sq -
                             n2 * n2 * (nn - 2);
    const Int128 denominator = n2 * nn * (nn - 1) * (nn - 2) * (nn - 3);
    return {detail::to_double(numerator) / detail::to_double(denominator), StatisticKind::dhat};
  }
  const auto nd = static_cast<double>(n);
  const double rows_sq = detail::sum_of_squares(table.row_totals());
  const double cols_sq = detail::sum_of_squares(table.col_totals());
  const double value = usp_statistic(table).value + (rows_sq + cols_sq) / (nd * (nd - 1.0) * (nd - 3.0)) +
                       (3.0 * nd - 2.0) * rows_sq * cols_sq / (nd * nd * nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0)) -
                       nd / ((nd - 1.0) * (nd - 3.0));
  return {value, StatisticKind::dhat};
}

inline StatisticValue compute_statistic(StatisticKind kind, const ContingencyTable& table) {
  switch (kind) {
    case StatisticKind::pearson: return pearson_statistic(table);
    case StatisticKind::g: return g_statistic(table);
    case StatisticKind::usp: return usp_statistic(table);
    case StatisticKind::dhat: return dhat_statistic(table);
  }
  throw InvalidMode("unknown statistic kind");
}

/// One observation (X, Y) as zero-based (row, column) category indices.
struct Observation {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Expands a table into its n observations, cells in row-major order.
inline std::vector<Observation> observations_of(const ContingencyTable& table) {
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(table.total()));
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j)
      for (Count k = 0; k < table(i, j); ++k) out.push_back({i, j});
  return out;
}

inline constexpr std::size_t kBruteforceMaxSample = 12;

/// Reference D-hat: the kernel
///   h = 1{z1 = z2} - 2·1{x1 = x2, y1 = y3} + 1{x1 = x3, y2 = y4}
/// averaged over all n(n-1)(n-2)(n-3) ordered 4-tuples of distinct
/// observations. O(n⁴); restricted to 4 ≤ n ≤ 12.
inline double dhat_bruteforce(std::span<const Observation> pairs) {
  const std::size_t n = pairs.size();
  if (n < 4) throw SampleTooSmall("brute-force D-hat needs at least 4 observations");
  if (n > kBruteforceMaxSample)
    throw SampleTooLargeForOracle("brute-force D-hat is limited to " + std::to_string(kBruteforceMaxSample) +
                                  " observations");
  long long total = 0;
  long long tuples = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        for (std::size_t d = 0; d < n; ++d) {
          if (d == a || d == b || d == c) continue;
          const int same_cell = pairs[a] == pairs[b] ? 1 : 0;
          const int cross = (pairs[a].row == pairs[b].row && pairs[a].col == pairs[c].col) ? 1 : 0;
          const int product = (pairs[a].row == pairs[c].row && pairs[b].col == pairs[d].col) ? 1 : 0;
          total += same_cell - 2 * cross + product;
          ++tuples;
        }
      }
    }
  }
  return static_cast<double>(total) / static_cast<double>(tuples);
}

}  // namespace usp
