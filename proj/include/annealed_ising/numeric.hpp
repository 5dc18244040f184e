#ifndef ANNEALED_ISING_NUMERIC_HPP
#define ANNEALED_ISING_NUMERIC_HPP

// Numerical building blocks shared by every module: compensated summation,
// accurate log-cosh style special functions, a bracketed scalar root finder
// and thin wrappers around Boost.Math quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "annealed_ising/errors.hpp"

namespace ising {

/// Neumaier's variant of Kahan summation.
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double init) : sum_(init) {}

  KahanSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

inline constexpr int kLogCoshTerms = 14;

// log cosh x = sum_{n>=1} a_n x^{2n} with
// a_n = (-1)^{n+1} (4^n - 1) 2 zeta(2n) / (2n pi^{2n}).
inline const std::array<double, kLogCoshTerms + 1>& log_cosh_coefficients() {
  static const std::array<double, kLogCoshTerms + 1> coeffs = [] {
    std::array<double, kLogCoshTerms + 1> c{};
    for (int n = 1; n <= kLogCoshTerms; ++n) {
      const double two_n = 2.0 * n;
      const double mag = (std::pow(4.0, n) - 1.0) * 2.0 * boost::math::zeta(two_n) /
                         (two_n * std::pow(std::numbers::pi, two_n));
      c[static_cast<std::size_t>(n)] = (n % 2 == 1) ? mag : -mag;
    }
    return c;
  }();
  return coeffs;
}

}  // namespace detail

/// Coefficient of x^{2n} in the Taylor series of log cosh x (n >= 1).
inline double log_cosh_coefficient(int n) {
  return detail::log_cosh_coefficients().at(static_cast<std::size_t>(n));
}

/// Radius below which the truncated series are used.
inline constexpr double kSeriesRadius = 0.25;
/// Number of log-cosh terms kept inside kSeriesRadius (error ~ 1e-19 relative).
inline constexpr int kSeriesTerms = 12;

inline double log_cosh(double x) noexcept {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

/// x^2/2 - log cosh x, accurate for small |x| (behaves like x^4/12).
inline double log_cosh_deficit(double x) noexcept {
  const double ax = std::abs(x);
  if (ax < kSeriesRadius) {
    const double x2 = x * x;
    double p = 0.0;
    for (int n = kSeriesTerms; n >= 2; --n) p = p * x2 - log_cosh_coefficient(n);
    return p * x2 * x2;
  }
  return 0.5 * x * x - log_cosh(x);
}

/// x - tanh x, accurate for small |x| (behaves like x^3/3).
inline double x_minus_tanh(double x) noexcept {
  if (std::abs(x) < kSeriesRadius) {
    const double x2 = x * x;
    double p = 0.0;
    // tanh x = sum_n 2n a_n x^{2n-1}
    for (int n = kSeriesTerms; n >= 2; --n) p = p * x2 - 2.0 * n * log_cosh_coefficient(n);
    return p * x2 * x;
  }
  return x - std::tanh(x);
}

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Bracketed root of a scalar function: false position with the Illinois
/// modification, falling back to bisection whenever the bracket fails to
/// halve. Bisection is geometric when the bracket spans decades on the
/// positive axis. Requires f_lo and f_hi of opposite sign (or zero).
template <class F>
RootResult bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi,
                          int max_iter = 500) {
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    std::ostringstream msg;
    msg << "root not bracketed on [" << lo << ", " << hi << "]: f = " << f_lo << ", " << f_hi;
    throw NumericalError(msg.str(), 0.0);
  }
  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  double ia = fa, ib = fb;  // Illinois-scaled copies used only for interpolation
  RootResult best = std::abs(fa) < std::abs(fb) ? RootResult{a, fa, 0} : RootResult{b, fb, 0};
  int side = 0;
  double width_checkpoint = b - a;
  int since_checkpoint = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const double width = b - a;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)) ||
        width <= std::numeric_limits<double>::min()) {
      best.iterations = it - 1;
      return best;
    }
    bool bisect = since_checkpoint >= 3;
    double x = a - ia * (b - a) / (ib - ia);
    if (bisect || !(x > a && x < b)) {
      x = (a > 0.0 && b > 8.0 * a) ? std::sqrt(a * b) : a + 0.5 * (b - a);
      if (bisect) {
        since_checkpoint = 0;
        width_checkpoint = b - a;
      }
    }
    const double fx = f(x);
    if (std::abs(fx) < std::abs(best.fx)) best = {x, fx, it};
    best.iterations = it;
    if (fx == 0.0) return {x, 0.0, it};
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
      ia = fx;
      if (side == -1) ib *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      ib = fx;
      if (side == +1) ia *= 0.5;
      side = +1;
    }
    if (b - a <= 0.5 * width_checkpoint) {
      width_checkpoint = b - a;
      since_checkpoint = 0;
    } else {
      ++since_checkpoint;
    }
  }
  return best;
}

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (15/31) on a finite interval with a smooth integrand.
template <class F>
Integral integrate_smooth(F&& f, double a, double b, double rel_tol = 1e-13,
                          unsigned max_depth = 15) {
  Integral out;
  if (a == b) return out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &out.error);
  return out;
}

/// Tanh-sinh quadrature on a finite interval; tolerates integrable endpoint
/// singularities.
template <class F>
Integral integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-14) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(18);
  Integral out;
  if (a == b) return out;
  out.value = integrator.integrate(f, a, b, rel_tol, &out.error);
  return out;
}

/// Geometric grid from lo to hi (inclusive) with the given number of points per decade.
inline std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) {
    throw ConfigError("geometric_grid needs 0 < lo < hi and per_decade >= 1");
  }
  const double decades = std::log10(hi / lo);
  const int steps = std::max(1, static_cast<int>(std::ceil(decades * per_decade - 1e-9)));
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    grid[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / steps);
  }
  grid.back() = hi;
  return grid;
}

}  // namespace ising

#endif  // ANNEALED_ISING_NUMERIC_HPP
