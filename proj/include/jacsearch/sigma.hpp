#pragma once
// Semismooth probability sigma(u) = G(1/u, 2/u): the chance that an integer
// N ~ 2^n has second-largest prime factor below N^{1/u} and largest prime
// factor below N^{2/u}. Dickman's rho is represented as a Taylor series on
// each interval [k, k+1] about its midpoint, marched interval by interval
// from the exact rho = 1 - ln t on [1,2]; sigma integrates rho(u(1-y))/y
// with Gauss-Legendre panels split wherever rho changes series.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <jacsearch/errors.hpp>

namespace jacsearch {

namespace detail {

inline constexpr int kRhoTerms = 40;
inline constexpr int kRhoTMax = 13;

// Taylor coefficients of rho on [k, k+1] about c = k + 1/2 for k = 1..12.
// From t rho'(t) = -rho(t-1), coefficients on one interval satisfy
//   a_{j+1} = -(b_j + j a_j) / (c (j+1))
// with b the previous interval's coefficients (same local offset), and a_0
// pinned by continuity at t = k. On [1,2], rho = 1 - ln t exactly. The
// march is carried in long double: forward roundoff seeded near t = 2
// decays only like 1/t, so it must start well below the ~1e-14 values rho
// reaches at the far end of the table.
inline const std::array<std::array<long double, kRhoTerms>, kRhoTMax - 1>&
rho_series() {
  static const auto table = [] {
    std::array<std::array<long double, kRhoTerms>, kRhoTMax - 1> S{};
    long double c = 1.5L;
    S[0][0] = 1.0L - std::log(c);
    long double cp = 1.0L;
    for (int j = 1; j < kRhoTerms; ++j) {
      cp *= c;
      S[0][j] = ((j % 2 == 0) ? 1.0L : -1.0L) / (j * cp);
    }
    for (int k = 2; k < kRhoTMax; ++k) {
      c = k + 0.5L;
      const auto& b = S[k - 2];
      auto& a = S[k - 1];
      for (int j = 0; j + 1 < kRhoTerms; ++j) {
        a[j + 1] = -(b[j] + j * a[j]) / (c * (j + 1));
      }
      long double left = 0.0L;   // previous series at x = +1/2
      long double right = 0.0L;  // this series at x = -1/2, a_0 excluded
      for (int j = kRhoTerms - 1; j >= 1; --j) {
        left = left * 0.5L + b[j];
        right = right * -0.5L + a[j];
      }
      left = left * 0.5L + b[0];
      right = right * -0.5L;
      a[0] = left - right;
    }
    return S;
  }();
  return table;
}

inline const std::array<std::pair<long double, long double>, 64>&
gauss_legendre_64() {
  static const auto table = [] {
    std::array<std::pair<long double, long double>, 64> t{};
    const int n = 64;
    for (int i = 1; i <= n; ++i) {
      long double x =
          std::cos(std::numbers::pi_v<long double> * (i - 0.25L) / (n + 0.5L));
      long double dp = 0.0L;
      for (int iter = 0; iter < 100; ++iter) {
        long double p0 = 1.0L, p1 = x;
        for (int k = 2; k <= n; ++k) {
          long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0L);
        long double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-18L) break;
      }
      t[size_t(i - 1)] = {x, 2.0L / ((1.0L - x * x) * dp * dp)};
    }
    return t;
  }();
  return table;
}

template <class F>
long double integrate_gl64(F f, long double lo, long double hi) {
  long double mid = (lo + hi) / 2, half = (hi - lo) / 2;
  long double sum = 0.0L;
  for (const auto& [x, wgt] : gauss_legendre_64()) sum += wgt * f(mid + half * x);
  return sum * half;
}

}  // namespace detail

// Dickman's rho: the density of x^{1/t}-smooth integers near x.
inline double dickman_rho(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= detail::kRhoTMax) return 0.0;
  int k = std::min(int(t), detail::kRhoTMax - 1);
  const auto& a = detail::rho_series()[size_t(k - 1)];
  long double x = (long double)t - (k + 0.5L);
  long double r = 0.0L;
  for (int j = detail::kRhoTerms - 1; j >= 0; --j) r = r * x + a[j];
  return double(r);
}

// G(1/u, v): the probability that an integer near x has second-largest
// prime factor at most x^{1/u} and largest prime factor at most x^v.
inline double sigma(double u, double v) {
  check(std::isfinite(u) && std::isfinite(v) && u > 0.0, ErrorKind::BadInput,
        "semismooth density needs a positive finite argument");
  if (u <= 1.0) return 1.0;
  check(u <= 12.0, ErrorKind::OutOfCalibratedRange,
        "semismooth density is calibrated for u <= 12 only");
  const long double a = 1.0L / (long double)u;
  check(v >= 1.0 / u - 1e-12 && v <= 1.0 + 1e-12, ErrorKind::BadInput,
        "largest-factor exponent must lie in [1/u, 1]");
  const long double b = std::min((long double)v, 1.0L);
  std::vector<long double> cuts{a, b};
  for (int j = 1; j <= int(u); ++j) {
    long double y = 1.0L - j / (long double)u;
    if (y > a && y < b) cuts.push_back(y);
  }
  std::sort(cuts.begin(), cuts.end());
  long double total = detail::rho_series()[0][0], ld_u = (long double)u;
  total = dickman_rho(u);
  auto integrand = [ld_u](long double y) -> long double {
    double arg = double(ld_u * (1.0L - y));
    return (long double)dickman_rho(arg) / y;
  };
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) {
      total += detail::integrate_gl64(integrand, cuts[i], cuts[i + 1]);
    }
  }
  return double(total);
}

// sigma(u) = G(1/u, 2/u), the tuning density: for u <= 2 both constraints
// are vacuous and the probability is 1.
inline double sigma(double u) {
  check(std::isfinite(u) && u > 0.0, ErrorKind::BadInput,
        "semismooth density needs a positive finite argument");
  if (u <= 2.0) return 1.0;
  return sigma(u, 2.0 / u);
}

}  // namespace jacsearch
