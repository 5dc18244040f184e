#ifndef ANNEALED_ISING_LIMIT_LAW_HPP
#define ANNEALED_ISING_LIMIT_LAW_HPP

// Limiting critical density exp(-f(x)) of S_N / N^lambda, its scaling-window
// tilt, normalizers and moment generating functions.
//
// Power-law regime, tau in (3,5): with a = (tau-2)/(tau-1), p = 1/(tau-1),
//   f(x) = sum_{i>=1} h(a x i^{-p}),   h(y) = y^2/2 - log cosh y.
// The sum is split at an index M; the tail is handled by Euler-Maclaurin,
// whose integral part reduces to
//   int_M^inf h(a x t^{-p}) dt = (tau-1) (a x)^{tau-1} int_0^{y_M} h(y) y^{-tau} dy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "annealed_ising/criticality.hpp"
#include "annealed_ising/errors.hpp"
#include "annealed_ising/hubbard_stratonovich.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

struct LimitLaw {
  Regime regime = Regime::finite_fourth;
  /// finite_fourth: E[W^4] / E[W]^4.
  double quartic = 1.0;
  /// powerlaw: tail exponent.
  double tau = 0.0;
  /// Scaling-window parameter b and the coefficient multiplying (b/2) x^2.
  double window_b = 0.0;
  double window_coefficient = 0.0;
  double truncation_tol = 1e-12;

  static LimitLaw finite_fourth(double m1, double m4) {
    if (!(m1 > 0.0) || !(m4 > 0.0)) throw ConfigError("finite_fourth needs m1, m4 > 0");
    LimitLaw law;
    law.regime = Regime::finite_fourth;
    law.quartic = m4 / (m1 * m1 * m1 * m1);
    return law;
  }

  static LimitLaw finite_fourth(const MomentSet& mom) {
    return finite_fourth(mom.m1(), mom.moment(4));
  }

  static LimitLaw powerlaw(double tau) {
    if (!(tau > 3.0 && tau < 5.0)) {
      throw ConfigError("the power-law limit density needs 3 < tau < 5");
    }
    LimitLaw law;
    law.regime = Regime::powerlaw;
    law.tau = tau;
    return law;
  }

  LimitLaw with_window(double b, double coefficient) const {
    if (!std::isfinite(b) || !(coefficient >= 0.0)) throw ConfigError("invalid window parameters");
    LimitLaw out = *this;
    out.window_b = b;
    out.window_coefficient = coefficient;
    return out;
  }

  LimitLaw with_tolerance(double tol) const {
    if (!(tol > 0.0)) throw ConfigError("truncation_tol must be > 0");
    LimitLaw out = *this;
    out.truncation_tol = tol;
    return out;
  }

  /// Coefficient of x^2 in the log-density.
  double quadratic() const noexcept { return 0.5 * window_b * window_coefficient; }
};

/// cosh(beta_c) E[W^2]^2 / E[W]^3 on the annealed GRG; the rank-1 Curie-Weiss
/// coupling is linear in beta, so the cosh factor is 1 there.
inline double window_coefficient(ModelKind kind, const MomentSet& mom) {
  const double m1 = mom.m1();
  const double m2 = mom.m2();
  const double base = m2 * m2 / (m1 * m1 * m1);
  if (kind == ModelKind::rank_one_icw) return base;
  return std::cosh(critical_beta(kind, mom.nu)) * base;
}

namespace detail {

// int_0^Y h(y) y^{-tau} dy for 3 < tau < 5 and 0 <= Y <= inf.
inline double deficit_power_integral(double tau, double Y) {
  KahanSum acc;
  const double ya = std::min(Y, kSeriesRadius);
  if (ya > 0.0) {
    for (int k = kSeriesTerms; k >= 2; --k) {
      const double e = 2.0 * k - tau + 1.0;
      acc += -log_cosh_coefficient(k) * std::pow(ya, e) / e;
    }
  }
  if (Y > kSeriesRadius) {
    const double yb = std::min(Y, 1.0);
    acc += integrate_smooth([&](double y) { return log_cosh_deficit(y) * std::pow(y, -tau); },
                            kSeriesRadius, yb, 1e-14, 4)
               .value;
  }
  if (Y > 1.0) {
    // y = 1/v: h(1/v) = 1/(2 v^2) - 1/v + log 2 - log1p(e^{-2/v}).
    const double V = std::isinf(Y) ? 0.0 : 1.0 / Y;
    auto primitive = [&](double v) {
      if (v == 0.0) return 0.0;
      return std::pow(v, tau - 3.0) / (2.0 * (tau - 3.0)) - std::pow(v, tau - 2.0) / (tau - 2.0) +
             std::numbers::ln2 * std::pow(v, tau - 1.0) / (tau - 1.0);
    };
    acc += primitive(1.0) - primitive(V);
    acc += -integrate_smooth(
                [&](double v) {
                  return v == 0.0 ? 0.0 : std::log1p(std::exp(-2.0 / v)) * std::pow(v, tau - 2.0);
                },
                V, 1.0, 1e-14, 4)
                .value;
  }
  return acc.value();
}

inline constexpr int kJetOrder = 8;
using Jet = std::array<double, kJetOrder + 1>;

// Taylor coefficients in s of h(y0 (1 + s/M)^{-p}).
inline Jet deficit_jet(double y0, double M, double p) {
  Jet y{}, T{}, D{}, H{};
  double binom = 1.0;
  for (int k = 0; k <= kJetOrder; ++k) {
    y[static_cast<std::size_t>(k)] = y0 * binom / std::pow(M, k);
    binom *= (-p - k) / (k + 1.0);
  }
  T[0] = std::tanh(y0);
  for (int k = 0; k < kJetOrder; ++k) {
    // (k+1) T_{k+1} = sum_j U_j (k-j+1) y_{k-j+1},  U = 1 - T^2
    double s = 0.0;
    for (int j = 0; j <= k; ++j) {
      double tt = 0.0;
      for (int i = 0; i <= j; ++i) tt += T[static_cast<std::size_t>(i)] * T[static_cast<std::size_t>(j - i)];
      const double U = (j == 0 ? 1.0 : 0.0) - tt;
      s += U * (k - j + 1) * y[static_cast<std::size_t>(k - j + 1)];
    }
    T[static_cast<std::size_t>(k + 1)] = s / (k + 1);
  }
  D[0] = x_minus_tanh(y0);
  for (int k = 1; k <= kJetOrder; ++k) {
    D[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(k)] - T[static_cast<std::size_t>(k)];
  }
  H[0] = log_cosh_deficit(y0);
  for (int k = 0; k < kJetOrder; ++k) {
    // h' = (y - tanh y) y'
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += D[static_cast<std::size_t>(j)] * (k - j + 1) * y[static_cast<std::size_t>(k - j + 1)];
    H[static_cast<std::size_t>(k + 1)] = s / (k + 1);
  }
  return H;
}

inline double powerlaw_f(double x, double tau, double tol) {
  const double c = (tau - 2.0) / (tau - 1.0) * std::abs(x);
  if (c == 0.0) return 0.0;
  const double p = 1.0 / (tau - 1.0);
  // B_{2j} / (2j), j = 1..4
  constexpr std::array<double, 4> kBernoulli{1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0};
  constexpr std::size_t kMaxHead = std::size_t{1} << 24;

  KahanSum head;
  std::size_t next = 1;
  double f = 0.0;
  for (std::size_t M = 64;; M *= 4) {
    for (; next < M; ++next) head += log_cosh_deficit(c * std::pow(static_cast<double>(next), -p));
    const double Md = static_cast<double>(M);
    const double yM = c * std::pow(Md, -p);
    const double integral = (tau - 1.0) * std::pow(c, tau - 1.0) * deficit_power_integral(tau, yM);
    const Jet H = deficit_jet(yM, Md, p);
    double correction = 0.0;
    for (int j = 1; j <= 4; ++j) {
      correction += kBernoulli[static_cast<std::size_t>(j - 1)] * H[static_cast<std::size_t>(2 * j - 1)];
    }
    f = head.value() + integral + 0.5 * H[0] - correction;
    const double last = std::abs(kBernoulli[3] * H[7]);
    if (last <= std::max(0.01 * tol, 1e-16 * f) || M >= kMaxHead) break;
  }
  return f;
}

}  // namespace detail

/// f(x): (1/12)(m4/m1^4) x^4 when the fourth moment is finite, the
/// log-cosh series above for tau in (3,5).
inline double limit_density_f(double x, const LimitLaw& law) {
  if (!std::isfinite(x)) throw ConfigError("x must be finite");
  if (law.regime == Regime::finite_fourth) {
    const double x2 = x * x;
    return law.quartic / 12.0 * x2 * x2;
  }
  if (law.regime != Regime::powerlaw) throw ConfigError("no limit density for the tau = 5 boundary");
  return detail::powerlaw_f(x, law.tau, law.truncation_tol);
}

/// lim f(x) / x^{1+delta}.
inline double limit_constant_C(const LimitLaw& law) {
  if (law.regime == Regime::finite_fourth) return law.quartic / 12.0;
  if (law.regime != Regime::powerlaw) throw ConfigError("no limit density for the tau = 5 boundary");
  const double tau = law.tau;
  const double a = (tau - 2.0) / (tau - 1.0);
  return (tau - 1.0) * std::pow(a, tau - 1.0) *
         detail::deficit_power_integral(tau, std::numeric_limits<double>::infinity());
}

/// exp{(b/2) coeff x^2 - f(x)}, unnormalized.
inline double window_density(double x, const LimitLaw& law) {
  return std::exp(law.quadratic() * x * x - limit_density_f(x, law));
}

namespace detail {

struct LogIntegral {
  double log_value = 0.0;
  double rel_error = 0.0;
};

// log int exp(e(x)) dx over R for an exponent that tends to -inf on both sides.
template <class E>
LogIntegral integrate_exponent(E&& e, double x_scale = 1.0) {
  constexpr int scan = 256;
  double xmax = x_scale;
  double emax = -std::numeric_limits<double>::infinity();
  for (int attempt = 0;; ++attempt) {
    emax = std::max(e(-xmax), e(xmax));
    for (int i = 0; i <= scan; ++i) emax = std::max(emax, e(-xmax + 2.0 * xmax * i / scan));
    if (std::max(e(-xmax), e(xmax)) < emax - kTailLogGap) break;
    if (attempt > 60) throw NumericalError("density tail bound not found", kTailLogGap);
    xmax *= 2.0;
  }
  constexpr int pieces = 32;
  KahanSum total, err;
  for (int k = 0; k < pieces; ++k) {
    const double a = -xmax + 2.0 * xmax * k / pieces;
    const double b = -xmax + 2.0 * xmax * (k + 1) / pieces;
    const auto piece = integrate_smooth([&](double x) { return std::exp(e(x) - emax); }, a, b, 1e-12, 3);
    total += piece.value;
    err += piece.error;
  }
  const double rel = err.value() / total.value();
  if (!(total.value() > 0.0) || !(rel < 1e-9)) {
    std::ostringstream msg;
    msg << "density quadrature did not converge: relative error estimate " << rel;
    throw NumericalError(msg.str(), 1e-9);
  }
  return {std::log(total.value()) + emax, rel};
}

}  // namespace detail

/// int exp{(b/2) coeff x^2 - f(x)} dx.
inline double density_normalizer(const LimitLaw& law) {
  const double q = law.quadratic();
  return std::exp(detail::integrate_exponent(
                      [&](double x) { return q * x * x - limit_density_f(x, law); })
                      .log_value);
}

/// int e^{r x} p(x) dx for the normalized window density p.
inline double limiting_mgf(double r, const LimitLaw& law) {
  const double q = law.quadratic();
  auto base = [&](double x) { return q * x * x - limit_density_f(x, law); };
  const double log_z = detail::integrate_exponent(base).log_value;
  const double log_num = detail::integrate_exponent([&](double x) { return r * x + base(x); }).log_value;
  return std::exp(log_num - log_z);
}

/// Cumulative distribution of the normalized window density, tabulated on
/// a uniform grid and interpolated linearly.
class LimitCdf {
 public:
  explicit LimitCdf(const LimitLaw& law, int cells = 8192) {
    const double q = law.quadratic();
    auto e = [&](double x) { return q * x * x - limit_density_f(x, law); };
    double emax = e(0.0);
    xmax_ = 1.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (int i = 0; i <= 256; ++i) emax = std::max(emax, e(xmax_ * i / 256.0));
      if (e(xmax_) < emax - 40.0) break;
      xmax_ *= 2.0;
    }
    cdf_.assign(static_cast<std::size_t>(cells) + 1, 0.0);
    const double h = 2.0 * xmax_ / cells;
    // 3-point Gauss-Legendre per cell.
    const double g = std::sqrt(0.6);
    KahanSum acc;
    for (int i = 0; i < cells; ++i) {
      const double mid = -xmax_ + h * (i + 0.5);
      const double mass = h / 18.0 *
                          (5.0 * std::exp(e(mid - g * h / 2) - emax) + 8.0 * std::exp(e(mid) - emax) +
                           5.0 * std::exp(e(mid + g * h / 2) - emax));
      acc += mass;
      cdf_[static_cast<std::size_t>(i) + 1] = acc.value();
    }
    for (double& c : cdf_) c /= acc.value();
    h_ = h;
  }

  double operator()(double x) const {
    if (x <= -xmax_) return 0.0;
    if (x >= xmax_) return 1.0;
    const double pos = (x + xmax_) / h_;
    const auto i = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
    const double t = pos - static_cast<double>(i);
    return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
  }

  double support_bound() const noexcept { return xmax_; }

 private:
  double xmax_ = 1.0;
  double h_ = 1.0;
  std::vector<double> cdf_;
};

struct DensityRow {
  double x = 0.0;
  double f = 0.0;
  double unnormalized = 0.0;
  double normalized = 0.0;
};

inline std::vector<DensityRow> tabulate_density(const LimitLaw& law, std::span<const double> xs) {
  const double z = density_normalizer(law);
  std::vector<DensityRow> rows;
  rows.reserve(xs.size());
  for (double x : xs) {
    const double f = limit_density_f(x, law);
    const double u = std::exp(law.quadratic() * x * x - f);
    rows.push_back({x, f, u, u / z});
  }
  return rows;
}

inline void write_density_csv(std::ostream& os, const std::vector<DensityRow>& rows) {
  os << "x,f,unnormalized_density,normalized_density\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.x << ',' << r.f << ',' << r.unnormalized << ',' << r.normalized << '\n';
  }
}

/// Limit law matching a weight sequence at the finite-N critical point:
/// finite_fourth from its own moments when it has no power-law tag with
/// tau < 5, powerlaw(tau) otherwise.
inline LimitLaw limit_law_for(const WeightSequence& ws) {
  if (ws.power_law() && ws.power_law()->tau < 5.0) return LimitLaw::powerlaw(ws.power_law()->tau);
  return LimitLaw::finite_fourth(empirical_moments(ws));
}

struct LimitCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// (N G_N(z / N^{1/(delta+1)}; r), -z r sqrt(E[W]/nu) + f(sqrt(E[W]/nu) z)),
/// with E[W] and nu taken from the weights carried by gn.
inline LimitCheck gn_limit_check(const GnFunction& gn, double z, double r, const LimitLaw& law,
                                 const ExponentTable& table) {
  const double N = static_cast<double>(gn.n());
  const double scale = std::pow(N, 1.0 / (table.delta_exp + 1.0));
  const double k = std::sqrt(gn.moments().m1() / gn.moments().nu);
  return {gn.scaled(z / scale, r), -z * r * k + limit_density_f(k * z, law)};
}

}  // namespace ising

#endif  // ANNEALED_ISING_LIMIT_LAW_HPP
