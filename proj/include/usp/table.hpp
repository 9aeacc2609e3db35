#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "usp/error.hpp"
#include "usp/random.hpp"

namespace usp {

using Count = std::int64_t;

/// Dense row-major matrix of reals.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// I×J table of non-negative cell counts. Immutable once constructed; the
/// margins and total are computed at construction from the cells.
class ContingencyTable {
 public:
  ContingencyTable(std::size_t rows, std::size_t cols, std::vector<Count> counts)
      : rows_(rows), cols_(cols), counts_(std::move(counts)) {
    if (rows_ == 0 || cols_ == 0) throw EmptyTable("contingency table needs at least one row and one column");
    if (counts_.size() != rows_ * cols_)
      throw DimensionMismatch("expected " + std::to_string(rows_ * cols_) + " cells, got " +
                              std::to_string(counts_.size()));
    row_totals_.assign(rows_, 0);
    col_totals_.assign(cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        const Count c = counts_[i * cols_ + j];
        if (c < 0) throw NegativeCount(i, j, c);
        row_totals_[i] += c;
        col_totals_[j] += c;
      }
    }
    total_ = std::accumulate(row_totals_.begin(), row_totals_.end(), Count{0});
  }

  /// Builds a table from nested rows; rejects ragged input.
  static ContingencyTable from_rows(const std::vector<std::vector<Count>>& raw) {
    if (raw.empty() || raw.front().empty())
      throw EmptyTable("contingency table needs at least one row and one column");
    const std::size_t cols = raw.front().size();
    std::vector<Count> cells;
    cells.reserve(raw.size() * cols);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].size() != cols)
        throw DimensionMismatch("row " + std::to_string(i + 1) + " has " + std::to_string(raw[i].size()) +
                                " entries, expected " + std::to_string(cols));
      cells.insert(cells.end(), raw[i].begin(), raw[i].end());
    }
    return ContingencyTable(raw.size(), cols, std::move(cells));
  }

  static ContingencyTable zeros(std::size_t rows, std::size_t cols) {
    return ContingencyTable(rows, cols, std::vector<Count>(rows * cols, 0));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Count total() const noexcept { return total_; }
  Count operator()(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
  Count row_total(std::size_t i) const { return row_totals_[i]; }
  Count col_total(std::size_t j) const { return col_totals_[j]; }
  std::span<const Count> counts() const noexcept { return counts_; }
  std::span<const Count> row_totals() const noexcept { return row_totals_; }
  std::span<const Count> col_totals() const noexcept { return col_totals_; }

  bool has_empty_margin() const noexcept {
    for (Count r : row_totals_)
      if (r == 0) return true;
    for (Count c : col_totals_)
      if (c == 0) return true;
    return false;
  }

  bool same_margins(const ContingencyTable& other) const noexcept {
    return row_totals_ == other.row_totals_ && col_totals_ == other.col_totals_;
  }

  friend bool operator==(const ContingencyTable& a, const ContingencyTable& b) noexcept {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.counts_ == b.counts_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Count> counts_;
  std::vector<Count> row_totals_;
  std::vector<Count> col_totals_;
  Count total_ = 0;
};

inline ContingencyTable validate_table(const std::vector<std::vector<Count>>& raw) {
  return ContingencyTable::from_rows(raw);
}

inline constexpr double kProbabilitySumTolerance = 1e-12;

/// Cell probabilities p_ij of a pair (X, Y) with derived margins q_i, r_j.
class JointDistribution {
 public:
  JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> probs)
      : probs_(rows, cols) {
    if (rows == 0 || cols == 0) throw EmptyTable("distribution needs at least one row and one column");
    if (probs.size() != rows * cols) throw DimensionMismatch("probability vector has the wrong length");
    probs_.values = std::move(probs);
    row_margins_.assign(rows, 0.0);
    col_margins_.assign(cols, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double p = probs_(i, j);
        if (!(p >= 0.0 && p <= 1.0))
          throw InvalidDistribution("cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                    ") probability outside [0,1]");
        row_margins_[i] += p;
        col_margins_[j] += p;
        sum += p;
      }
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
      throw InvalidDistribution("cell probabilities sum to " + std::to_string(sum) + ", not 1");
  }

  static JointDistribution from_rows(const std::vector<std::vector<double>>& raw) {
    if (raw.empty() || raw.front().empty()) throw EmptyTable("distribution needs at least one row and one column");
    std::vector<double> flat;
    for (const auto& row : raw) {
      if (row.size() != raw.front().size()) throw DimensionMismatch("ragged probability matrix");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return JointDistribution(raw.size(), raw.front().size(), std::move(flat));
  }

  /// Product distribution with the given margins.
  static JointDistribution product(std::span<const double> row_margins, std::span<const double> col_margins) {
    std::vector<double> flat;
    flat.reserve(row_margins.size() * col_margins.size());
    for (double q : row_margins)
      for (double r : col_margins) flat.push_back(q * r);
    return JointDistribution(row_margins.size(), col_margins.size(), std::move(flat));
  }

  std::size_t rows() const noexcept { return probs_.rows; }
  std::size_t cols() const noexcept { return probs_.cols; }
  double operator()(std::size_t i, std::size_t j) const { return probs_(i, j); }
  std::span<const double> probs() const noexcept { return probs_.values; }
  std::span<const double> row_margins() const noexcept { return row_margins_; }
  std::span<const double> col_margins() const noexcept { return col_margins_; }

 private:
  RealMatrix probs_;
  std::vector<double> row_margins_;
  std::vector<double> col_margins_;
};

/// e_ij = o_i+ o_+j / n.
inline RealMatrix expected_counts(const ContingencyTable& table) {
  if (table.total() == 0) throw EmptySample("expected counts need n >= 1");
  const auto n = static_cast<double>(table.total());
  RealMatrix e(table.rows(), table.cols());
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j)
      e(i, j) = static_cast<double>(table.row_total(i)) * static_cast<double>(table.col_total(j)) / n;
  return e;
}

/// Multinomial(n, p) table, drawn as a chain of conditional binomials over
/// the cells in row-major order.
inline ContingencyTable sample_table(const JointDistribution& dist, Count n, RandomStream& rng) {
  if (n < 0) throw DomainError("sample size must be >= 0");
  const auto probs = dist.probs();
  const std::size_t cells = probs.size();
  // Suffix sums so the conditional probabilities do not accumulate drift.
  std::vector<double> remaining_mass(cells + 1, 0.0);
  for (std::size_t k = cells; k-- > 0;) remaining_mass[k] = remaining_mass[k + 1] + probs[k];

  std::vector<Count> counts(cells, 0);
  Count left = n;
  for (std::size_t k = 0; k < cells && left > 0; ++k) {
    if (k + 1 == cells) {
      counts[k] = left;
      break;
    }
    if (probs[k] <= 0.0) continue;
    double p = remaining_mass[k] > 0.0 ? probs[k] / remaining_mass[k] : 1.0;
    if (p > 1.0 || remaining_mass[k + 1] <= 0.0) p = 1.0;
    counts[k] = sample_binomial(rng, left, p);
    left -= counts[k];
  }
  // If trailing cells have zero probability the loop above assigns the
  // remainder to the last positive cell via p = 1.
  return ContingencyTable(dist.rows(), dist.cols(), std::move(counts));
}

/// Table of m individuals drawn without replacement from the n individuals
/// summarised by `table` (sequential hypergeometric draws over the cells).
inline ContingencyTable subsample(const ContingencyTable& table, Count m, RandomStream& rng) {
  if (m < 0) throw DomainError("subsample size must be >= 0");
  if (m > table.total())
    throw SubsampleTooLarge("subsample size " + std::to_string(m) + " exceeds table total " +
                            std::to_string(table.total()));
  const auto source = table.counts();
  std::vector<Count> counts(source.size(), 0);
  Count population = table.total();
  Count left = m;
  for (std::size_t k = 0; k < source.size() && left > 0; ++k) {
    counts[k] = sample_hypergeometric(rng, population, source[k], left);
    population -= source[k];
    left -= counts[k];
  }
  return ContingencyTable(table.rows(), table.cols(), std::move(counts));
}

/// m individuals drawn with replacement from those `table` summarizes, i.e.
/// a multinomial table with cell probabilities o_ij / n. m may exceed n.
inline ContingencyTable resample(const ContingencyTable& table, Count m, RandomStream& rng) {
  if (m < 0) throw DomainError("resample size must be >= 0");
  if (m > 0 && table.total() == 0) throw EmptySample("cannot resample from an empty table");
  const auto source = table.counts();
  std::vector<Count> counts(source.size(), 0);
  Count population = table.total();
  Count left = m;
  for (std::size_t k = 0; k < source.size() && left > 0; ++k) {
    if (source[k] == population) {
      counts[k] = left;
      break;
    }
    counts[k] = sample_binomial(rng, left, static_cast<double>(source[k]) / static_cast<double>(population));
    population -= source[k];
    left -= counts[k];
  }
  return ContingencyTable(table.rows(), table.cols(), std::move(counts));
}

/// Removes rows and columns whose margin is zero. Returns the table unchanged
/// when no margin is empty; a table with n = 0 collapses to a single 1×1 cell.
inline ContingencyTable drop_empty_margins(const ContingencyTable& table) {
  if (!table.has_empty_margin()) return table;
  std::vector<std::size_t> keep_rows;
  std::vector<std::size_t> keep_cols;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (table.row_total(i) > 0) keep_rows.push_back(i);
  for (std::size_t j = 0; j < table.cols(); ++j)
    if (table.col_total(j) > 0) keep_cols.push_back(j);
  if (keep_rows.empty() || keep_cols.empty()) return ContingencyTable::zeros(1, 1);
  std::vector<Count> cells;
  cells.reserve(keep_rows.size() * keep_cols.size());
  for (std::size_t i : keep_rows)
    for (std::size_t j : keep_cols) cells.push_back(table(i, j));
  return ContingencyTable(keep_rows.size(), keep_cols.size(), std::move(cells));
}

}  // namespace usp
