#ifndef ANNEALED_ISING_CRITICALITY_HPP
#define ANNEALED_ISING_CRITICALITY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/meanfield.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

/// beta_c = asinh(1/nu) on the annealed GRG, 1/nu for rank-1 Curie-Weiss.
inline double critical_beta(ModelKind kind, double nu) {
  if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
  return beta_for_coupling(kind, 1.0 / nu);
}

/// Finite-N critical sequence, built from the empirical nu_N.
inline double critical_beta_N(ModelKind kind, const WeightSequence& ws) {
  return critical_beta(kind, empirical_moments(ws).nu);
}

enum class Regime { finite_fourth, powerlaw, tau5_logcorrected };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::finite_fourth:
      return "finite_fourth";
    case Regime::powerlaw:
      return "powerlaw";
    case Regime::tau5_logcorrected:
      return "tau5_logcorrected";
  }
  return "?";
}

/// Critical exponents (beta, delta, gamma, gamma') of one universality class,
/// plus the block-spin scaling exponent lambda = delta / (delta + 1).
struct ExponentTable {
  Regime regime = Regime::finite_fourth;
  double tau = std::numeric_limits<double>::infinity();
  double beta_exp = 0.5;
  double delta_exp = 3.0;
  double gamma_exp = 1.0;
  double gamma_prime_exp = 1.0;
  double lambda = 0.75;
};

/// Regime of a power-law tail exponent: (3,5) power law, 5 the
/// log-corrected boundary, above 5 the finite-fourth-moment class.
inline Regime regime_for_tau(double tau) {
  if (!(tau > 3.0)) throw ConfigError("tau must be > 3");
  if (tau < 5.0) return Regime::powerlaw;
  if (tau == 5.0) return Regime::tau5_logcorrected;
  return Regime::finite_fourth;
}

inline ExponentTable exponent_table(Regime regime, double tau = 0.0) {
  ExponentTable t;
  t.regime = regime;
  switch (regime) {
    case Regime::finite_fourth:
    case Regime::tau5_logcorrected:
      t.tau = regime == Regime::tau5_logcorrected ? 5.0 : std::numeric_limits<double>::infinity();
      t.beta_exp = 0.5;
      t.delta_exp = 3.0;
      break;
    case Regime::powerlaw:
      if (!(tau > 3.0 && tau < 5.0)) throw ConfigError("power-law regime needs 3 < tau < 5");
      t.tau = tau;
      t.beta_exp = 1.0 / (tau - 3.0);
      t.delta_exp = tau - 2.0;
      break;
  }
  t.gamma_exp = 1.0;
  t.gamma_prime_exp = 1.0;
  t.lambda = t.delta_exp / (t.delta_exp + 1.0);
  return t;
}

inline ExponentTable exponent_table_for_tau(double tau) {
  return exponent_table(regime_for_tau(tau), tau);
}

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
};

/// loglog: regress log y on log x.
/// logcorrected: regress log y on log[(x / log(1/x))^power]; a slope of 1
/// means the data follow the log-corrected form with that power.
struct FitTransform {
  enum class Kind { loglog, logcorrected } kind = Kind::loglog;
  double power = 1.0;

  static FitTransform loglog() { return {}; }
  static FitTransform logcorrected(double power) { return {Kind::logcorrected, power}; }
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// Range of the raw abscissa x that entered the fit.
  std::pair<double, double> window{0.0, 0.0};
};

inline FitResult fit_exponent(std::span<const FitPoint> points, FitTransform transform = {}) {
  if (points.size() < 3) throw ConfigError("exponent fit needs at least 3 points");
  std::vector<double> X, Y;
  X.reserve(points.size());
  Y.reserve(points.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !(p.y > 0.0)) throw ConfigError("exponent fit needs x, y > 0");
    double ax = std::log(p.x);
    if (transform.kind == FitTransform::Kind::logcorrected) {
      if (!(p.x < 1.0)) throw ConfigError("log-corrected fit needs 0 < x < 1");
      ax = transform.power * (std::log(p.x) - std::log(std::log(1.0 / p.x)));
    }
    X.push_back(ax);
    Y.push_back(std::log(p.y));
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  const double n = static_cast<double>(X.size());
  KahanSum sx, sy;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sx += X[i];
    sy += Y[i];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  KahanSum sxx, sxy, syy;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double dx = X[i] - mx;
    const double dy = Y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx.value() > 0.0)) throw ConfigError("exponent fit needs distinct abscissae");
  FitResult fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.r_squared =
      syy.value() > 0.0 ? std::clamp(sxy.value() * sxy.value() / (sxx.value() * syy.value()), 0.0, 1.0) : 1.0;
  fit.window = {lo, hi};
  return fit;
}

// ---------------------------------------------------------------------------
// Exact mean-field curves near the critical point

/// (B, M(beta_c, B)) over the given fields.
template <WeightLaw L>
std::vector<FitPoint> critical_isotherm(ModelKind kind, const L& law, std::span<const double> fields) {
  const double beta_c = critical_beta(kind, moments_of(law).nu);
  std::vector<FitPoint> out;
  out.reserve(fields.size());
  for (double B : fields) {
    const ModelSpec spec(kind, beta_c, B);
    const auto fp = solve_fixed_point(spec, law);
    out.push_back({B, magnetization(spec, law, fp.z_star)});
  }
  return out;
}

/// (beta - beta_c, M(beta, 0+)) for beta above beta_c.
template <WeightLaw L>
std::vector<FitPoint> spontaneous_magnetization(ModelKind kind, const L& law,
                                                std::span<const double> offsets) {
  const double beta_c = critical_beta(kind, moments_of(law).nu);
  std::vector<FitPoint> out;
  out.reserve(offsets.size());
  for (double d : offsets) {
    const ModelSpec spec(kind, beta_c + d, 0.0);
    const auto fp = solve_fixed_point(spec, law);
    out.push_back({d, magnetization(spec, law, fp.z_star)});
  }
  return out;
}

/// (|beta - beta_c|, chi(beta, 0+)) below (sign < 0) or above (sign > 0) beta_c.
template <WeightLaw L>
std::vector<FitPoint> zero_field_susceptibility(ModelKind kind, const L& law,
                                                std::span<const double> offsets, int sign) {
  const double beta_c = critical_beta(kind, moments_of(law).nu);
  std::vector<FitPoint> out;
  out.reserve(offsets.size());
  for (double d : offsets) {
    const ModelSpec spec(kind, sign < 0 ? beta_c - d : beta_c + d, 0.0);
    const auto fp = solve_fixed_point(spec, law);
    out.push_back({d, susceptibility(spec, law, fp)});
  }
  return out;
}

/// lim_{beta -> beta_c-} (beta_c - beta) chi(beta, 0+) = E[W]^2/E[W^2] tanh(beta_c).
/// Stated for the annealed GRG only.
inline double gamma_amplitude(ModelKind kind, const MomentSet& mom) {
  if (kind != ModelKind::annealed_grg) {
    throw ConfigError("gamma amplitude is only available for the annealed GRG");
  }
  const double beta_c = critical_beta(kind, mom.nu);
  return mom.m1() * mom.m1() / mom.m2() * std::tanh(beta_c);
}

/// Extremes of M(beta, B) / ((beta - beta_c)^b + B^{1/d}) over an
/// n x n grid in (beta_c, beta_c + eps) x (0, eps).
template <WeightLaw L>
std::pair<double, double> joint_scaling_ratio(ModelKind kind, const L& law,
                                              const ExponentTable& table, double eps, int n) {
  if (!(eps > 0.0) || n < 1) throw ConfigError("joint scaling needs eps > 0 and n >= 1");
  const double beta_c = critical_beta(kind, moments_of(law).nu);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double d = eps * i / (n + 1.0);
    for (int j = 1; j <= n; ++j) {
      const double B = eps * j / (n + 1.0);
      const ModelSpec spec(kind, beta_c + d, B);
      const auto fp = solve_fixed_point(spec, law);
      const double m = magnetization(spec, law, fp.z_star);
      const double ratio = m / (std::pow(d, table.beta_exp) + std::pow(B, 1.0 / table.delta_exp));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo, hi};
}

inline nlohmann::json fit_report(const ExponentTable& table, std::string_view exponent_name,
                                 const FitResult& fit, double expected) {
  nlohmann::json j;
  j["regime"] = std::string(to_string(table.regime));
  if (std::isfinite(table.tau)) j["tau"] = table.tau;
  j["exponent_name"] = std::string(exponent_name);
  j["slope"] = fit.slope;
  j["expected"] = expected;
  j["window"] = {fit.window.first, fit.window.second};
  j["r_squared"] = fit.r_squared;
  return j;
}

}  // namespace ising

#endif  // ANNEALED_ISING_CRITICALITY_HPP
