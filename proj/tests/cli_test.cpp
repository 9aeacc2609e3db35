#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli_app.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "usp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = usp::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("usp_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, ClassicPearsonOnMarital) {
  const auto r = run({"test", "--dataset", "marital", "--method", "pearson", "--mode", "classic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["method"], "pearson");
  EXPECT_EQ(j["mode"], "classic");
  EXPECT_NEAR(j["p_value"].get<double>(), 0.0235, 0.0005);
  EXPECT_EQ(j["df"], 12);
  EXPECT_TRUE(j["B"].is_null());
  EXPECT_TRUE(j["reject"].get<bool>());
}

TEST(Cli, UspOnMaritalFromCsv) {
  const auto path = write_temp("marital.csv",
                               "# marital status by education\n18,36,21,9,6\n12,36,45,36,21\n6,9,9,3,3\n\n3,9,9,6,3\n");
  const auto r = run({"test", "--input", path, "--method", "usp", "--B", "999", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j["p_value"].get<double>(), 0.01);
  EXPECT_EQ(j["B"], 999);
  EXPECT_TRUE(j["df"].is_null());
  EXPECT_EQ(j["seed"], 1);
  const double scaled = j["p_value"].get<double>() * 1000;
  EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
}

TEST(Cli, ErrorExitCodes) {
  const auto negative = write_temp("negative.csv", "1,2\n3,-4\n");
  auto r = run({"test", "--input", negative});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("row 2, column 2"), std::string::npos) << r.err;

  const auto zero_margin = write_temp("zero_margin.csv", "5,5\n0,0\n");
  r = run({"test", "--input", zero_margin, "--method", "pearson", "--mode", "classic"});
  EXPECT_EQ(r.code, 3);
  r = run({"test", "--input", zero_margin, "--method", "pearson"});
  EXPECT_EQ(r.code, 3);

  EXPECT_EQ(run({"test", "--input", write_temp("ragged.csv", "1,2\n3\n")}).code, 2);
  EXPECT_EQ(run({"test", "--input", "/nonexistent/table.csv"}).code, 2);
  EXPECT_EQ(run({"test", "--dataset", "marital", "--method", "usp", "--mode", "classic"}).code, 2);
  EXPECT_EQ(run({"power", "--reps", "0"}).code, 2);
  EXPECT_EQ(run({"asymsize", "--alpha", "1.5"}).code, 2);
  EXPECT_EQ(run({"subsample", "--dataset", "marital", "--m", "99999"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"power", "--family", "dense", "--eps-grid", "0:0.5:3"}).code, 2);
}

TEST(Cli, AlphaWarning) {
  const auto r = run({"test", "--dataset", "marital", "--B", "9", "--alpha", "0.05"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("cannot reject"), std::string::npos);
}

TEST(Cli, PowerIsReproducibleAndThreadIndependent) {
  const std::vector<std::string> base = {"power", "--family", "sparse", "--n", "60", "--reps", "40",
                                         "--B", "19", "--eps-grid", "0:0.06:3", "--seed", "9"};
  auto with_threads = [&](const std::string& t) {
    auto args = base;
    args.push_back("--threads");
    args.push_back(t);
    return run(args);
  };
  const auto a = with_threads("1");
  const auto b = with_threads("1");
  const auto c = with_threads("3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  const auto rows = csv_rows(a.out);
  ASSERT_EQ(rows.size(), 1u + 3 * 3);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "epsilon,n,reps,method,mode,rejection_rate,std_err");
}

TEST(Cli, PowerWritesOutputFile) {
  const auto path = (std::filesystem::temp_directory_path() / "usp_cli_test_power_out.csv").string();
  std::filesystem::remove(path);
  const auto r = run({"power", "--family", "multiplicative", "--n", "40", "--reps", "10", "--B", "19",
                      "--eps-grid", "0:0.9:2", "--tests", "usp,g-classic", "--output", path});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  EXPECT_EQ(csv_rows(content.str()).size(), 1u + 2 * 2);
}

TEST(Cli, AsymsizeSinglePoint) {
  const auto r = run({"asymsize", "--test", "pearson", "--alpha", "0.05", "--lambda", "1:1:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "alpha", "test", "asymptotic_size"}));
  EXPECT_NEAR(std::stod(rows[1][3]), 0.0803, 1e-4);
}

TEST(Cli, AsymsizeGJumpOnDefaultGrid) {
  const auto r = run({"asymsize", "--test", "g", "--alpha", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 501u);
  bool found = false;
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const double l0 = std::stod(rows[k - 1][0]), l1 = std::stod(rows[k][0]);
    const double gap = std::abs(std::stod(rows[k][3]) - std::stod(rows[k - 1][3]));
    if (l0 <= 1.3859 && l1 >= 1.3859 && gap > 0.01) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Cli, SubsampleRuns) {
  const auto r = run({"subsample", "--dataset", "eyecolour", "--m", "84", "--reps", "20", "--B", "19"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "m");
  EXPECT_EQ(rows[1][0], "84");
  const auto big = run({"subsample", "--dataset", "eyecolour", "--m", "500", "--reps", "5", "--B", "19",
                        "--with-replacement"});
  EXPECT_EQ(big.code, 0) << big.err;
}

TEST(Cli, DhatNullMean) {
  const auto r = run({"dhat", "--family", "sparse", "--n", "100", "--eps", "0", "--reps", "4000", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4001u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"epsilon", "n", "rep", "dhat"}));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double v = std::stod(rows[k][3]);
    sum += v;
    sum_sq += v * v;
  }
  const double n = 4000.0;
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 0.0, 3 * se);
}

TEST(Cli, HelpExitsCleanly) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("asymsize"), std::string::npos);
}
