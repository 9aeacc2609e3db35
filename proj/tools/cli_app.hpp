#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "usp/usp.hpp"

namespace usp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUndefined = 3;

/// Parses "lo:hi:k" into k evenly spaced points.
inline std::vector<double> parse_range(const std::string& text) {
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos) throw InvalidConfig("range '" + text + "' must look like lo:hi:count");
  try {
    std::size_t used = 0;
    const double lo = std::stod(text.substr(0, first), &used);
    if (used != first) throw InvalidConfig("bad range lower end in '" + text + "'");
    const std::string hi_text = text.substr(first + 1, second - first - 1);
    const double hi = std::stod(hi_text, &used);
    if (used != hi_text.size()) throw InvalidConfig("bad range upper end in '" + text + "'");
    const std::string count_text = text.substr(second + 1);
    const long long count = std::stoll(count_text, &used);
    if (used != count_text.size() || count < 1) throw InvalidConfig("bad range count in '" + text + "'");
    return linear_grid(lo, hi, static_cast<std::size_t>(count));
  } catch (const std::logic_error&) {
    throw InvalidConfig("range '" + text + "' must look like lo:hi:count");
  } catch (const DomainError& e) {
    throw InvalidConfig("range '" + text + "': " + e.what());
  }
}

/// --threads if given, else USP_THREADS, else the hardware thread count.
inline unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("USP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
    }
  }
  return hardware_threads();
}

inline nlohmann::json to_json(const TestResult& r) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["mode"] = to_string(r.mode);
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  j["B"] = r.B ? nlohmann::json(*r.B) : nlohmann::json(nullptr);
  j["df"] = r.df ? nlohmann::json(*r.df) : nlohmann::json(nullptr);
  j["seed"] = r.seed;
  return j;
}

namespace detail {

struct TableSource {
  std::string input;
  std::string dataset;

  void add_to(CLI::App& cmd) {
    auto* in = cmd.add_option("--input", input, "CSV file with the contingency table");
    auto* ds = cmd.add_option("--dataset", dataset, "Embedded dataset: marital or eyecolour");
    in->excludes(ds);
  }

  ContingencyTable load() const {
    if (!dataset.empty()) return datasets::by_name(dataset);
    if (input.empty()) throw InvalidConfig("either --input or --dataset is required");
    std::ifstream file(input);
    if (!file) throw ParseError("cannot open '" + input + "'");
    return parse_table_csv(file);
  }
};

struct PermutationFlags {
  std::size_t B;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string tie = "randomized";

  explicit PermutationFlags(std::size_t default_B) : B(default_B) {}

  void add_to(CLI::App& cmd) {
    cmd.add_option("--B", B, "Number of permutations")->capture_default_str();
    cmd.add_option("--alpha", alpha, "Nominal level")->capture_default_str();
    cmd.add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd.add_option("--tie", tie, "Tie policy: randomized or conservative")->capture_default_str();
  }

  PermutationConfig config(unsigned threads) const {
    PermutationConfig c;
    c.B = B;
    c.alpha = alpha;
    c.seed = seed;
    c.tie_policy = parse_tie_policy(tie);
    c.threads = threads;
    c.validate();
    return c;
  }
};

// Writes CSV to --output when given, otherwise to `out`.
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw InvalidConfig("cannot write '" + path + "'");
  write(file);
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Independence tests for contingency tables: USP, Pearson and G"};
  app.require_subcommand(1);
  std::optional<unsigned> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (default: USP_THREADS or all cores)");

  // test
  auto* test_cmd = app.add_subcommand("test", "Run one independence test and print a JSON report");
  detail::TableSource test_source;
  test_source.add_to(*test_cmd);
  std::string method = "usp";
  std::string mode = "permutation";
  test_cmd->add_option("--method", method, "usp, pearson or g")->capture_default_str();
  test_cmd->add_option("--mode", mode, "permutation or classic")->capture_default_str();
  detail::PermutationFlags test_perm(999);
  test_perm.add_to(*test_cmd);
  test_cmd->add_option("--threads", threads_flag, "Worker threads");

  // power
  auto* power_cmd = app.add_subcommand("power", "Monte Carlo power curve over an epsilon grid (CSV)");
  std::string family_name = "sparse";
  std::optional<std::size_t> rows_flag;
  std::optional<std::size_t> cols_flag;
  long long n = 100;
  long long reps = 1000;
  std::string eps_grid;
  std::string tests = "usp,pearson-perm,g-perm";
  std::string power_output;
  power_cmd->add_option("--family", family_name, "sparse, dense or multiplicative")->capture_default_str();
  power_cmd->add_option("--I", rows_flag, "Rows (sparse default 5, dense 6)");
  power_cmd->add_option("--J", cols_flag, "Columns (default 8)");
  power_cmd->add_option("--n", n, "Sample size")->capture_default_str();
  power_cmd->add_option("--reps", reps, "Monte Carlo replicates")->capture_default_str();
  power_cmd->add_option("--eps-grid", eps_grid, "Grid as lo:hi:count (default depends on family)");
  power_cmd->add_option("--tests", tests, "Comma-separated tests")->capture_default_str();
  power_cmd->add_option("--output", power_output, "Write CSV here instead of stdout");
  detail::PermutationFlags power_perm(99);
  power_perm.add_to(*power_cmd);
  power_cmd->add_option("--threads", threads_flag, "Worker threads");

  // asymsize
  auto* asym_cmd = app.add_subcommand("asymsize", "Asymptotic Type I error of classic Pearson / G (CSV)");
  std::string asym_test = "pearson";
  double asym_alpha = 0.05;
  std::string lambda_range = "0.05:5:500";
  std::string asym_output;
  asym_cmd->add_option("--test", asym_test, "pearson or g")->capture_default_str();
  asym_cmd->add_option("--alpha", asym_alpha, "Nominal level")->capture_default_str();
  asym_cmd->add_option("--lambda", lambda_range, "Grid as lo:hi:count")->capture_default_str();
  asym_cmd->add_option("--output", asym_output, "Write CSV here instead of stdout");

  // subsample
  auto* sub_cmd = app.add_subcommand("subsample", "Rejection proportions over random subsamples (CSV)");
  detail::TableSource sub_source;
  sub_source.add_to(*sub_cmd);
  long long m = 0;
  long long sub_reps = 1000;
  std::string sub_tests = "usp,pearson-perm,g-perm";
  std::string sub_output;
  sub_cmd->add_option("--m", m, "Subsample size")->required();
  sub_cmd->add_option("--reps", sub_reps, "Number of subsamples")->capture_default_str();
  sub_cmd->add_option("--tests", sub_tests, "Comma-separated tests")->capture_default_str();
  sub_cmd->add_option("--output", sub_output, "Write CSV here instead of stdout");
  bool with_replacement = false;
  sub_cmd->add_flag("--with-replacement", with_replacement, "Draw the m observations with replacement");
  detail::PermutationFlags sub_perm(99);
  sub_perm.add_to(*sub_cmd);
  sub_cmd->add_option("--threads", threads_flag, "Worker threads");

  // dhat
  auto* dhat_cmd = app.add_subcommand("dhat", "Raw D-hat values on simulated tables (CSV)");
  std::string dhat_family = "sparse";
  std::optional<std::size_t> dhat_rows;
  std::optional<std::size_t> dhat_cols;
  long long dhat_n = 100;
  double dhat_eps = 0.0;
  long long dhat_reps = 10000;
  std::uint64_t dhat_seed = 1;
  std::string dhat_output;
  dhat_cmd->add_option("--family", dhat_family, "sparse, dense or multiplicative")->capture_default_str();
  dhat_cmd->add_option("--I", dhat_rows, "Rows");
  dhat_cmd->add_option("--J", dhat_cols, "Columns");
  dhat_cmd->add_option("--n", dhat_n, "Sample size")->capture_default_str();
  dhat_cmd->add_option("--eps", dhat_eps, "Perturbation epsilon")->capture_default_str();
  dhat_cmd->add_option("--reps", dhat_reps, "Number of tables")->capture_default_str();
  dhat_cmd->add_option("--seed", dhat_seed, "Master seed")->capture_default_str();
  dhat_cmd->add_option("--output", dhat_output, "Write CSV here instead of stdout");
  dhat_cmd->add_option("--threads", threads_flag, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto make_family = [](const std::string& name, std::optional<std::size_t> I, std::optional<std::size_t> J) {
    AlternativeFamily family = AlternativeFamily::with_default_shape(parse_family(name));
    if (family.kind == FamilyKind::multiplicative) {
      if ((I && *I != 4) || (J && *J != 4)) throw InvalidConfig("the multiplicative family is fixed at 4x4");
      return family;
    }
    if (I) family.I = *I;
    if (J) family.J = *J;
    return family;
  };

  try {
    const unsigned threads = resolve_threads(threads_flag);

    if (test_cmd->parsed()) {
      const ContingencyTable table = test_source.load();
      const TestResult result =
          run_test(table, parse_method(method), parse_mode(mode), test_perm.config(threads));
      if (result.mode == Mode::permutation && !test_perm.config(threads).can_reject())
        err << "warning: alpha*(B+1) < 1, the test cannot reject\n";
      out << to_json(result).dump(2) << '\n';
      return kExitOk;
    }

    if (power_cmd->parsed()) {
      if (reps < 1) throw InvalidConfig("--reps must be >= 1");
      if (n < 1) throw InvalidConfig("--n must be >= 1");
      const AlternativeFamily family = make_family(family_name, rows_flag, cols_flag);
      const std::vector<double> grid = eps_grid.empty() ? family.default_grid() : parse_range(eps_grid);
      const auto test_list = parse_test_list(tests);
      const auto points = power_curve(family, grid, n, static_cast<std::size_t>(reps), test_list,
                                      power_perm.config(threads));
      detail::emit(power_output, out, [&](std::ostream& os) { write_power_csv(os, points); });
      return kExitOk;
    }

    if (asym_cmd->parsed()) {
      if (!(asym_alpha > 0.0 && asym_alpha < 1.0)) throw InvalidConfig("--alpha must lie strictly between 0 and 1");
      const auto grid = parse_range(lambda_range);
      for (double l : grid)
        if (!(l > 0.0)) throw InvalidConfig("lambda values must be > 0");
      const auto points = size_curve(parse_classic_test(asym_test), asym_alpha, grid);
      detail::emit(asym_output, out, [&](std::ostream& os) { write_size_curve_csv(os, points); });
      return kExitOk;
    }

    if (sub_cmd->parsed()) {
      if (sub_reps < 1) throw InvalidConfig("--reps must be >= 1");
      const ContingencyTable table = sub_source.load();
      const auto test_list = parse_test_list(sub_tests);
      const auto rates =
          subsample_study(table, m, static_cast<std::size_t>(sub_reps), test_list, sub_perm.config(threads),
                          with_replacement ? SubsampleScheme::with_replacement : SubsampleScheme::without_replacement);
      detail::emit(sub_output, out, [&](std::ostream& os) { write_subsample_csv(os, m, rates); });
      return kExitOk;
    }

    if (dhat_cmd->parsed()) {
      if (dhat_reps < 1) throw InvalidConfig("--reps must be >= 1");
      const AlternativeFamily family = make_family(dhat_family, dhat_rows, dhat_cols);
      const auto samples =
          dhat_samples(family.at(dhat_eps), dhat_n, static_cast<std::size_t>(dhat_reps), dhat_seed, threads);
      detail::emit(dhat_output, out, [&](std::ostream& os) { write_dhat_csv(os, dhat_eps, dhat_n, samples); });
      return kExitOk;
    }
  } catch (const UndefinedStatistic& e) {
    err << "error: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace usp::cli
