// Runs the three tests on the embedded marital-status table and prints a
// short comparison.

#include <cstdio>

#include "usp/usp.hpp"

int main() {
  const usp::ContingencyTable table = usp::datasets::marital();

  usp::PermutationConfig config;
  config.B = 999;
  config.seed = 2024;

  std::printf("%-8s %-12s %12s %10s\n", "method", "mode", "statistic", "p-value");
  const struct {
    usp::Method method;
    usp::Mode mode;
  } runs[] = {
      {usp::Method::usp, usp::Mode::permutation},     {usp::Method::pearson, usp::Mode::permutation},
      {usp::Method::g, usp::Mode::permutation},       {usp::Method::pearson, usp::Mode::classic},
      {usp::Method::g, usp::Mode::classic},
  };
  for (const auto& run : runs) {
    const usp::TestResult r = usp::run_test(table, run.method, run.mode, config);
    std::printf("%-8s %-12s %12.6g %10.4f\n", usp::to_string(r.method), usp::to_string(r.mode), r.statistic,
                r.p_value);
  }

  std::printf("\nD-hat on the table: %.6g\n", usp::dhat_statistic(table).value);
  return 0;
}
