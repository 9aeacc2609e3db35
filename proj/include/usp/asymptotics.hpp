#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usp/error.hpp"
#include "usp/special_functions.hpp"

namespace usp {

// Limiting Type I error of the classic Pearson and G tests on the 2×2 null
// family with cell probabilities p², p(1-p), p(1-p), (1-p)², p = λ/√n.
// As n → ∞ the top-left count converges to Z ~ Poisson(λ²) and both
// statistics become functions of Z alone.

enum class ClassicTest { pearson, g };

inline const char* to_string(ClassicTest t) { return t == ClassicTest::pearson ? "pearson" : "g"; }

inline ClassicTest parse_classic_test(std::string_view s) {
  if (s == "pearson") return ClassicTest::pearson;
  if (s == "g") return ClassicTest::g;
  throw DomainError("unknown test '" + std::string(s) + "' (expected pearson or g)");
}

struct SizeCurvePoint {
  double lambda = 0.0;
  double alpha = 0.0;
  double asymptotic_size = 0.0;
  ClassicTest test = ClassicTest::pearson;
};

/// (z - λ²)² / λ².
inline double pearson_limit_statistic(std::int64_t z, double lambda) {
  const double mu = lambda * lambda;
  const double d = static_cast<double>(z) - mu;
  return d * d / mu;
}

/// 2z log(z/λ²) - 2(z - λ²), with 0 log 0 = 0.
inline double g_limit_statistic(std::int64_t z, double lambda) {
  const double mu = lambda * lambda;
  const auto zd = static_cast<double>(z);
  const double log_term = z == 0 ? 0.0 : 2.0 * zd * std::log(zd / mu);
  return log_term - 2.0 * (zd - mu);
}

namespace detail {
inline void check_size_args(double lambda, double alpha) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie strictly between 0 and 1");
}
}  // namespace detail

/// P((Z - λ²)²/λ² > c_α), Z ~ Poisson(λ²), c_α the upper-α point of χ²₁.
inline double pearson_asymptotic_size(double lambda, double alpha) {
  detail::check_size_args(lambda, alpha);
  const double critical = chi2_quantile(1.0 - alpha, 1);
  return poisson_tail_mass(
      [&](std::int64_t z) { return pearson_limit_statistic(z, lambda) > critical; }, lambda * lambda);
}

/// P(2Z log(Z/λ²) - 2(Z - λ²) > c_α), Z ~ Poisson(λ²).
inline double g_asymptotic_size(double lambda, double alpha) {
  detail::check_size_args(lambda, alpha);
  const double critical = chi2_quantile(1.0 - alpha, 1);
  return poisson_tail_mass([&](std::int64_t z) { return g_limit_statistic(z, lambda) > critical; },
                           lambda * lambda);
}

inline double asymptotic_size(ClassicTest test, double lambda, double alpha) {
  return test == ClassicTest::pearson ? pearson_asymptotic_size(lambda, alpha) : g_asymptotic_size(lambda, alpha);
}

inline std::vector<SizeCurvePoint> size_curve(ClassicTest test, double alpha, std::span<const double> lambda_grid) {
  std::vector<SizeCurvePoint> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) out.push_back({lambda, alpha, asymptotic_size(test, lambda, alpha), test});
  return out;
}

/// `count` evenly spaced points from lo to hi inclusive (a single point
/// when count is 1, which requires lo == hi).
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count == 0) throw DomainError("grid needs at least one point");
  if (!(hi >= lo)) throw DomainError("grid upper end is below lower end");
  if (count == 1) {
    if (lo != hi) throw DomainError("a one-point grid needs lo == hi");
    return {lo};
  }
  std::vector<double> grid(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo + step * static_cast<double>(k);
  grid.back() = hi;
  return grid;
}

inline std::vector<double> default_lambda_grid() { return linear_grid(0.05, 5.0, 500); }

}  // namespace usp
