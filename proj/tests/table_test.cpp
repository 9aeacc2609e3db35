#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "usp/datasets.hpp"
#include "usp/io.hpp"
#include "usp/simulation.hpp"
#include "usp/table.hpp"

using usp::ContingencyTable;

TEST(ValidateTable, MaritalTable) {
  const auto t = usp::validate_table({{18, 36, 21, 9, 6}, {12, 36, 45, 36, 21}, {6, 9, 9, 3, 3}, {3, 9, 9, 6, 3}});
  EXPECT_EQ(t.total(), 300);
  EXPECT_EQ(t.rows(), 4u);
  EXPECT_EQ(t.cols(), 5u);
  EXPECT_EQ(t.row_total(1), 150);
  EXPECT_EQ(t.col_total(0), 39);
  EXPECT_EQ(t, usp::datasets::marital());
}

TEST(ValidateTable, DegenerateAndInvalid) {
  const auto zero = usp::validate_table({{0}});
  EXPECT_EQ(zero.total(), 0);
  EXPECT_THROW(usp::validate_table({{1, -1}}), usp::NegativeCount);
  EXPECT_THROW(usp::validate_table({}), usp::EmptyTable);
  EXPECT_THROW(usp::validate_table({{}}), usp::EmptyTable);
  EXPECT_THROW(usp::validate_table({{1, 2}, {3}}), usp::DimensionMismatch);
  try {
    usp::validate_table({{1, 2}, {3, -4}});
    FAIL();
  } catch (const usp::NegativeCount& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 1u);
    EXPECT_NE(std::string(e.what()).find("row 2, column 2"), std::string::npos);
  }
}

TEST(ExpectedCounts, MatchesPublishedFrequencies) {
  const auto e = usp::expected_counts(usp::datasets::marital());
  const double published[4][5] = {{11.7, 27, 25.2, 16.2, 9.9},
                                  {19.5, 45, 42, 27, 16.5},
                                  {3.9, 9, 8.4, 5.4, 3.3},
                                  {3.9, 9, 8.4, 5.4, 3.3}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(e(i, j), published[i][j], 1e-12);
}

TEST(ExpectedCounts, SimpleCases) {
  const auto ones = usp::expected_counts(ContingencyTable::from_rows({{1, 1}, {1, 1}}));
  for (double v : ones.values) EXPECT_DOUBLE_EQ(v, 1.0);
  const auto half = usp::expected_counts(ContingencyTable::from_rows({{5, 5}, {0, 0}}));
  EXPECT_DOUBLE_EQ(half(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(half(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(half(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(half(1, 1), 0.0);
  EXPECT_THROW(usp::expected_counts(ContingencyTable::from_rows({{0, 0}})), usp::EmptySample);
}

TEST(ExpectedCounts, PreservesMarginsOnRandomTables) {
  usp::RandomStream rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t I = 1 + rng.uniform_below(6), J = 1 + rng.uniform_below(6);
    std::vector<usp::Count> cells(I * J);
    for (auto& c : cells) c = static_cast<usp::Count>(rng.uniform_below(50));
    cells[0] += 1;
    const ContingencyTable t(I, J, cells);
    const auto e = usp::expected_counts(t);
    const double tol = 1e-9 * static_cast<double>(t.total());
    double sum = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < J; ++j) row += e(i, j);
      EXPECT_NEAR(row, static_cast<double>(t.row_total(i)), tol);
      sum += row;
    }
    for (std::size_t j = 0; j < J; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < I; ++i) col += e(i, j);
      EXPECT_NEAR(col, static_cast<double>(t.col_total(j)), tol);
    }
    EXPECT_NEAR(sum, static_cast<double>(t.total()), tol);
  }
}

TEST(JointDistribution, Validation) {
  EXPECT_NO_THROW(usp::JointDistribution::from_rows({{0.25, 0.25}, {0.25, 0.25}}));
  EXPECT_THROW(usp::JointDistribution::from_rows({{0.5, 0.6}}), usp::InvalidDistribution);
  EXPECT_THROW(usp::JointDistribution::from_rows({{-0.1, 1.1}}), usp::InvalidDistribution);
  EXPECT_THROW(usp::JointDistribution::from_rows({{0.5, 0.5 - 1e-9}}), usp::InvalidDistribution);
}

TEST(JointDistribution, MarginsSumToOne) {
  for (double eps : {0.0, 0.02, 0.05}) {
    for (const auto& d : {usp::sparse_family(5, 8, eps), usp::dense_family(6, 8, eps / 10),
                          usp::multiplicative_family(eps * 10)}) {
      double q = 0.0, r = 0.0;
      for (double v : d.row_margins()) q += v;
      for (double v : d.col_margins()) r += v;
      EXPECT_NEAR(q, 1.0, 1e-12);
      EXPECT_NEAR(r, 1.0, 1e-12);
    }
  }
}

TEST(SampleTable, PointMass) {
  const auto d = usp::JointDistribution::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  usp::RandomStream rng(1, 0);
  const auto t = usp::sample_table(d, 7, rng);
  EXPECT_EQ(t(0, 0), 7);
  EXPECT_EQ(t.total(), 7);
}

TEST(SampleTable, TrailingZeroCellsGetNothing) {
  const auto d = usp::JointDistribution::from_rows({{0.0, 0.5}, {0.5, 0.0}});
  usp::RandomStream rng(9, 0);
  for (int i = 0; i < 100; ++i) {
    const auto t = usp::sample_table(d, 20, rng);
    EXPECT_EQ(t(0, 0), 0);
    EXPECT_EQ(t(1, 1), 0);
    EXPECT_EQ(t.total(), 20);
  }
}

TEST(SampleTable, LargeUniformSample) {
  // Each cell is Binomial(1e5, 1/4) with sd ≈ 137, so ±1000 is > 7 sd.
  const auto d = usp::JointDistribution::from_rows({{0.25, 0.25}, {0.25, 0.25}});
  usp::RandomStream rng(77, 0);
  const auto t = usp::sample_table(d, 100000, rng);
  EXPECT_EQ(t.total(), 100000);
  for (auto c : t.counts()) EXPECT_NEAR(static_cast<double>(c) / 1e5, 0.25, 0.01);
}

TEST(SampleTable, TopLeftCellMeanMatchesProbability) {
  const auto d = usp::sparse_family(5, 8, 0.0);
  const double p11 = std::ldexp(1.0, -2) / ((1 - std::ldexp(1.0, -5)) * (1 - std::ldexp(1.0, -8)));
  constexpr int draws = 10000;
  constexpr int n = 100;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < draws; ++r) {
    usp::RandomStream rng(5, r);
    const double f = static_cast<double>(usp::sample_table(d, n, rng)(0, 0)) / n;
    sum += f;
    sum_sq += f * f;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, p11, 3 * se);
}

TEST(SampleTable, Reproducible) {
  const auto d = usp::dense_family(6, 8, 0.01);
  usp::RandomStream a(123, 4), b(123, 4);
  EXPECT_EQ(usp::sample_table(d, 500, a), usp::sample_table(d, 500, b));
}

TEST(Subsample, FullAndEmpty) {
  const auto t = usp::datasets::eyecolour();
  usp::RandomStream rng(1, 1);
  EXPECT_EQ(usp::subsample(t, t.total(), rng), t);
  EXPECT_EQ(usp::subsample(t, 0, rng), ContingencyTable::zeros(2, 5));
  EXPECT_THROW(usp::subsample(t, t.total() + 1, rng), usp::SubsampleTooLarge);
}

TEST(Subsample, DiagonalPairFrequency) {
  // Drawing 2 of the 4 individuals in [[2,0],[0,2]]: one from each cell in
  // 2·2 of the C(4,2) = 6 equally likely pairs.
  const auto t = ContingencyTable::from_rows({{2, 0}, {0, 2}});
  constexpr int draws = 100000;
  int hits = 0;
  usp::RandomStream rng(31, 0);
  for (int i = 0; i < draws; ++i) {
    const auto s = usp::subsample(t, 2, rng);
    hits += s(0, 0) == 1 && s(1, 1) == 1;
  }
  const double p = 2.0 / 3.0;
  EXPECT_NEAR(hits / static_cast<double>(draws), p, 3 * std::sqrt(p * (1 - p) / draws));
}

TEST(Subsample, NeverExceedsSource) {
  const auto t = usp::datasets::marital();
  for (int r = 0; r < 500; ++r) {
    usp::RandomStream rng(8, r);
    const usp::Count m = static_cast<usp::Count>(rng.uniform_below(301));
    const auto s = usp::subsample(t, m, rng);
    ASSERT_EQ(s.total(), m);
    for (std::size_t k = 0; k < s.counts().size(); ++k) {
      ASSERT_GE(s.counts()[k], 0);
      ASSERT_LE(s.counts()[k], t.counts()[k]);
    }
  }
}

TEST(DropEmptyMargins, RemovesZeroRowsAndColumns) {
  const auto t = ContingencyTable::from_rows({{1, 0, 2}, {0, 0, 0}, {3, 0, 4}});
  const auto c = usp::drop_empty_margins(t);
  EXPECT_EQ(c, ContingencyTable::from_rows({{1, 2}, {3, 4}}));
  EXPECT_EQ(usp::drop_empty_margins(c), c);
}

TEST(CsvTable, ParsesCommentsAndWhitespace) {
  std::istringstream in("# marital\n18, 36,21,9,6\n\n12,36,45,36,21\n6,9,9,3,3\n3,9,9,6,3\n");
  EXPECT_EQ(usp::parse_table_csv(in), usp::datasets::marital());
}

TEST(CsvTable, Errors) {
  std::istringstream negative("1,2\n3,-4\n");
  EXPECT_THROW(usp::parse_table_csv(negative), usp::NegativeCount);
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(usp::parse_table_csv(ragged), usp::ParseError);
  std::istringstream junk("1,x\n");
  EXPECT_THROW(usp::parse_table_csv(junk), usp::ParseError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(usp::parse_table_csv(empty), usp::EmptyTable);
}

TEST(Resample, CellMeansMatchEmpiricalProportions) {
  const auto t = ContingencyTable::from_rows({{6, 0, 3}, {1, 10, 0}});
  const int draws = 20000;
  const usp::Count m = 30;
  std::vector<double> sum(6, 0.0);
  for (int k = 0; k < draws; ++k) {
    usp::RandomStream rng(41, k);
    const auto r = usp::resample(t, m, rng);
    ASSERT_EQ(r.total(), m);
    for (std::size_t c = 0; c < 6; ++c) sum[c] += static_cast<double>(r.counts()[c]);
  }
  for (std::size_t c = 0; c < 6; ++c) {
    const double p = static_cast<double>(t.counts()[c]) / 20.0;
    const double se = std::sqrt(m * p * (1 - p) / draws);
    if (p == 0.0) {
      EXPECT_EQ(sum[c], 0.0);
    } else {
      EXPECT_NEAR(sum[c] / draws, m * p, 4 * se) << c;
    }
  }
}

TEST(Resample, SizesAndErrors) {
  const auto t = ContingencyTable::from_rows({{2, 1}, {0, 3}});
  usp::RandomStream rng(42, 0);
  EXPECT_EQ(usp::resample(t, 100, rng).total(), 100);
  EXPECT_EQ(usp::resample(t, 0, rng), ContingencyTable::zeros(2, 2));
  EXPECT_EQ(usp::resample(ContingencyTable::from_rows({{0, 5}}), 7, rng), ContingencyTable::from_rows({{0, 7}}));
  EXPECT_THROW(usp::resample(ContingencyTable::zeros(2, 2), 3, rng), usp::EmptySample);
  EXPECT_THROW(usp::resample(t, -1, rng), usp::DomainError);
}
