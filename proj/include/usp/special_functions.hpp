#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "usp/error.hpp"

namespace usp {

/// log Γ(x) for x > 0, Lanczos approximation with 14 terms (g = 671/128).
/// Relative accuracy is close to double epsilon over the whole positive axis.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
  static constexpr std::array<double, 14> kCoef = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
      .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  double y = x;
  const double shifted = x + 5.24218750000000000;
  const double lead = (x + 0.5) * std::log(shifted) - shifted;
  double series = 0.999999999999997092;
  for (double c : kCoef) series += c / ++y;
  return lead + std::log(2.5066282746310005 * series / x);
}

namespace detail {
inline constexpr std::size_t kLogFactorialTableSize = 1024;

inline const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    t[0] = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) t[k] = log_gamma(static_cast<double>(k) + 1.0);
    return t;
  }();
  return table;
}
}  // namespace detail

/// log(k!) for k ≥ 0; table lookup below 1024.
inline double log_factorial(std::int64_t k) {
  if (k < 0) throw DomainError("log_factorial requires k >= 0");
  if (static_cast<std::size_t>(k) < detail::kLogFactorialTableSize)
    return detail::log_factorial_table()[static_cast<std::size_t>(k)];
  return log_gamma(static_cast<double>(k) + 1.0);
}

/// log of the binomial coefficient C(n, k), 0 ≤ k ≤ n.
inline double log_choose(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

namespace detail {
inline constexpr int kGammaMaxIterations = 100000;
inline constexpr double kGammaEps = 1e-16;

// Series for P(a, x); converges quickly when x < a + 1.
inline double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kGammaMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Modified Lentz continued fraction for Q(a, x); used when x ≥ a + 1.
inline double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) <= kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

inline void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma requires a > 0");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
}
}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double reg_lower_gamma(double a, double x) {
  detail::check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::lower_gamma_series(a, x);
  return 1.0 - detail::upper_gamma_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly in the tail so small p-values keep their relative accuracy.
inline double reg_upper_gamma(double a, double x) {
  detail::check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::lower_gamma_series(a, x);
  return detail::upper_gamma_fraction(a, x);
}

namespace detail {
inline void check_dof(int k) {
  if (k < 1) throw DomainError("chi-squared degrees of freedom must be >= 1, got " + std::to_string(k));
}
}  // namespace detail

inline double chi2_cdf(double x, int k) {
  detail::check_dof(k);
  if (std::isnan(x)) throw DomainError("chi2_cdf of NaN");
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * k, 0.5 * x);
}

/// Upper tail 1 - chi2_cdf(x, k).
inline double chi2_sf(double x, int k) {
  detail::check_dof(k);
  if (std::isnan(x)) throw DomainError("chi2_sf of NaN");
  if (x <= 0.0) return 1.0;
  return reg_upper_gamma(0.5 * k, 0.5 * x);
}

/// Inverse of chi2_cdf by bracketed bisection; the bracket is shrunk to
/// floating-point resolution, which puts |cdf(q) - p| well under 1e-10.
inline double chi2_quantile(double p, int k) {
  detail::check_dof(k);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile requires 0 < p < 1");
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(k));
  while (chi2_cdf(hi, k) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (chi2_cdf(mid, k) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// e^{-mu} mu^z / z!, evaluated in log space.
inline double poisson_pmf(std::int64_t z, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("poisson_pmf requires mu > 0");
  if (z < 0) return 0.0;
  return std::exp(static_cast<double>(z) * std::log(mu) - mu - log_factorial(z));
}

inline constexpr double kPoissonTruncation = 1e-12;

/// Sum of poisson_pmf(z, mu) over all z ≥ 0 with pred(z) true. Summation
/// stops once the visited support carries at least 1 - 1e-12 of the mass.
template <typename Predicate>
double poisson_tail_mass(Predicate&& pred, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("poisson_tail_mass requires mu > 0");
  double covered = 0.0;
  double selected = 0.0;
  for (std::int64_t z = 0;; ++z) {
    const double p = poisson_pmf(z, mu);
    covered += p;
    if (pred(z)) selected += p;
    if (covered >= 1.0 - kPoissonTruncation && static_cast<double>(z) >= mu) break;
    if (static_cast<double>(z) > mu + 40.0 * std::sqrt(mu) + 50.0) break;
  }
  return selected;
}

}  // namespace usp
