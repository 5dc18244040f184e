#ifndef ANNEALED_ISING_MEANFIELD_HPP
#define ANNEALED_ISING_MEANFIELD_HPP

// Mean-field fixed point z* of
//   z = E[tanh(alpha W z + B) alpha W],   alpha = sqrt(theta / E[W]),
// and the magnetization / susceptibility built on it.
//
// The map is never evaluated as "Phi(z) - z" directly. Writing
// tanh x = x - (x - tanh x) gives
//   Phi(z) - z = (theta nu - 1) z + alpha B E[W] - alpha E[W (x - tanh x)],
// whose first two terms are exact moments; this keeps the sign of the gap
// reliable arbitrarily close to the critical point.

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

inline constexpr double kDefaultFixedPointTol = 1e-12;

enum class Branch { zero, positive };

struct FixedPointSolution {
  double z_star = 0.0;
  /// |Phi(z*) - z*|.
  double residual = 0.0;
  int iterations = 0;
  /// dz*/dB; disengaged at the critical point where it diverges.
  std::optional<double> dz_dB;
  Branch branch = Branch::zero;
  /// B = 0 and theta * nu = 1 to rounding.
  bool critical = false;
};

struct ThermoPoint {
  double beta = 0.0;
  double b_field = 0.0;
  double magnetization = 0.0;
  /// +inf at the critical point.
  double susceptibility = 0.0;
};

namespace detail {

template <class G>
double expect_split(const WeightSequence& ws, G&& g, double /*w_break*/) {
  return ws.expect(g);
}

template <class G>
double expect_split(const PowerLawLimit& law, G&& g, double w_break) {
  return law.expect(g, w_break);
}

inline double break_weight(double alpha, double z) {
  const double az = alpha * z;
  return az > 0.0 ? 1.0 / az : 0.0;
}

struct Coupling {
  double theta;
  double alpha;
  double m1;
  double nu;
};

template <WeightLaw L>
Coupling coupling_of(const ModelSpec& spec, const L& law) {
  const MomentSet& mom = moments_of(law);
  const double m1 = mom.m1();
  return {spec.theta(), std::sqrt(spec.theta() / m1), m1, mom.nu};
}

}  // namespace detail

/// Phi(z) = E[tanh(alpha W z + B) alpha W].
template <WeightLaw L>
double fixed_point_map(double z, const ModelSpec& spec, const L& law) {
  if (!(z >= 0.0)) throw ConfigError("fixed_point_map needs z >= 0");
  const auto c = detail::coupling_of(spec, law);
  const double B = spec.b_field();
  return detail::expect_split(
      law, [&](double w) { return std::tanh(c.alpha * w * z + B) * c.alpha * w; },
      detail::break_weight(c.alpha, z));
}

/// Phi(z) - z, evaluated through the decomposition described above.
template <WeightLaw L>
double fixed_point_gap(double z, const ModelSpec& spec, const L& law) {
  const auto c = detail::coupling_of(spec, law);
  const double B = spec.b_field();
  if (c.alpha == 0.0) return -z;
  double remainder = 0.0;
  if (z > 0.0 || B > 0.0) {
    remainder = detail::expect_split(
        law, [&](double w) { return w * x_minus_tanh(c.alpha * w * z + B); },
        detail::break_weight(c.alpha, z));
  }
  return (c.theta * c.nu - 1.0) * z + c.alpha * B * c.m1 - c.alpha * remainder;
}

namespace detail {

struct TanhMoments {
  double t2 = 0.0;     // E[t^2]
  double w_t2 = 0.0;   // E[W t^2]
  double w2_t2 = 0.0;  // E[W^2 t^2]
};

template <WeightLaw L>
TanhMoments tanh_moments(const L& law, double alpha, double z, double B) {
  TanhMoments out;
  if (z == 0.0 && B == 0.0) return out;
  const double wb = break_weight(alpha, z);
  auto t2 = [&](double w) {
    const double t = std::tanh(alpha * w * z + B);
    return t * t;
  };
  out.t2 = expect_split(law, t2, wb);
  out.w_t2 = expect_split(law, [&](double w) { return w * t2(w); }, wb);
  out.w2_t2 = expect_split(law, [&](double w) { return w * w * t2(w); }, wb);
  return out;
}

}  // namespace detail

/// Unique non-negative fixed point. B > 0: root bracketed on
/// [0, sqrt(theta m1)]. B = 0: z* = 0 when theta nu <= 1, otherwise the
/// positive root (the B -> 0+ limit). dz*/dB solves the differentiated
/// fixed-point equation.
template <WeightLaw L>
FixedPointSolution solve_fixed_point(const ModelSpec& spec, const L& law,
                                     double tol = kDefaultFixedPointTol) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
  const auto c = detail::coupling_of(spec, law);
  const double B = spec.b_field();
  FixedPointSolution sol;

  if (c.theta == 0.0) {
    sol.dz_dB = 0.0;
    return sol;
  }

  auto gap = [&](double z) { return fixed_point_gap(z, spec, law); };
  const double z_hi = std::sqrt(c.theta * c.m1);
  const double excess = c.theta * c.nu - 1.0;
  const double eps = std::numeric_limits<double>::epsilon();

  if (B > 0.0) {
    const auto root = bracketed_root(gap, 0.0, z_hi, gap(0.0), gap(z_hi));
    sol.z_star = root.x;
    sol.iterations = root.iterations;
  } else if (excess > 4.0 * eps) {
    double z_lo = 1e-3 * z_hi;
    double g_lo = gap(z_lo);
    while (!(g_lo > 0.0) && z_lo > 1e-280) {
      z_lo *= 1e-3;
      g_lo = gap(z_lo);
    }
    if (g_lo > 0.0) {
      const auto root = bracketed_root(gap, z_lo, z_hi, g_lo, gap(z_hi));
      sol.z_star = root.x;
      sol.iterations = root.iterations;
    }
  } else {
    sol.critical = std::abs(excess) <= 4.0 * eps;
  }

  sol.branch = sol.z_star > 0.0 ? Branch::positive : Branch::zero;
  sol.residual = std::abs(gap(sol.z_star));
  if (!(sol.residual <= tol)) {
    std::ostringstream msg;
    msg << "fixed point residual " << sol.residual << " exceeds tolerance " << tol;
    throw NumericalError(msg.str(), tol);
  }

  const auto tm = detail::tanh_moments(law, c.alpha, sol.z_star, B);
  const double numerator = c.alpha * (c.m1 - tm.w_t2);
  const double denominator = 1.0 - c.theta * c.nu + c.alpha * c.alpha * tm.w2_t2;
  if (denominator > 4.0 * eps) sol.dz_dB = numerator / denominator;
  return sol;
}

/// M = E[tanh(alpha W z* + B)].
template <WeightLaw L>
double magnetization(const ModelSpec& spec, const L& law, double z_star) {
  const auto c = detail::coupling_of(spec, law);
  const double B = spec.b_field();
  if (z_star == 0.0 && B == 0.0) return 0.0;
  return detail::expect_split(
      law, [&](double w) { return std::tanh(c.alpha * w * z_star + B); },
      detail::break_weight(c.alpha, z_star));
}

/// chi = E[(1 + alpha W dz*/dB)(1 - tanh^2(alpha W z* + B))].
template <WeightLaw L>
double susceptibility(const ModelSpec& spec, const L& law, const FixedPointSolution& fp) {
  if (!fp.dz_dB) throw CriticalDivergence("susceptibility diverges at the critical point");
  const auto c = detail::coupling_of(spec, law);
  const auto tm = detail::tanh_moments(law, c.alpha, fp.z_star, spec.b_field());
  return (1.0 - tm.t2) + c.alpha * *fp.dz_dB * (c.m1 - tm.w_t2);
}

template <WeightLaw L>
ThermoPoint thermo_point(const ModelSpec& spec, const L& law, double tol = kDefaultFixedPointTol) {
  const auto fp = solve_fixed_point(spec, law, tol);
  ThermoPoint out;
  out.beta = spec.beta();
  out.b_field = spec.b_field();
  out.magnetization = magnetization(spec, law, fp.z_star);
  out.susceptibility =
      fp.dz_dB ? susceptibility(spec, law, fp) : std::numeric_limits<double>::infinity();
  return out;
}

struct CurveRow {
  double beta = 0.0;
  double b_field = 0.0;
  double z_star = 0.0;
  double magnetization = 0.0;
  double susceptibility = 0.0;
};

template <WeightLaw L>
CurveRow curve_row(const ModelSpec& spec, const L& law, double tol = kDefaultFixedPointTol) {
  const auto fp = solve_fixed_point(spec, law, tol);
  CurveRow row;
  row.beta = spec.beta();
  row.b_field = spec.b_field();
  row.z_star = fp.z_star;
  row.magnetization = magnetization(spec, law, fp.z_star);
  row.susceptibility =
      fp.dz_dB ? susceptibility(spec, law, fp) : std::numeric_limits<double>::infinity();
  return row;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "beta,B,z_star,magnetization,susceptibility\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.beta << ',' << r.b_field << ',' << r.z_star << ',' << r.magnetization << ',';
    if (std::isinf(r.susceptibility)) {
      os << "inf";
    } else {
      os << r.susceptibility;
    }
    os << '\n';
  }
}

}  // namespace ising

#endif  // ANNEALED_ISING_MEANFIELD_HPP
