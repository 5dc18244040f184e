#ifndef ANNEALED_ISING_MODEL_HPP
#define ANNEALED_ISING_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

/// AnnealedGrg: annealed Ising measure on the generalized random graph.
/// RankOneIcw: rank-1 inhomogeneous Curie-Weiss model.
enum class ModelKind { annealed_grg, rank_one_icw };

inline std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::annealed_grg ? "grg" : "icw";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "grg") return ModelKind::annealed_grg;
  if (s == "icw") return ModelKind::rank_one_icw;
  throw ConfigError("unknown model kind '" + std::string(s) + "' (expected grg or icw)");
}

/// The coupling that enters every mean-field formula: sinh(beta) on the
/// annealed GRG, beta itself for the rank-1 Curie-Weiss model.
inline double effective_coupling(ModelKind kind, double beta) {
  return kind == ModelKind::annealed_grg ? std::sinh(beta) : beta;
}

/// Inverse of effective_coupling.
inline double beta_for_coupling(ModelKind kind, double theta) {
  return kind == ModelKind::annealed_grg ? std::asinh(theta) : theta;
}

class ModelSpec {
 public:
  ModelSpec(ModelKind kind, double beta, double b_field = 0.0)
      : kind_(kind), beta_(beta), b_field_(b_field) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
    if (!(b_field >= 0.0) || !std::isfinite(b_field)) throw ConfigError("field B must be finite and >= 0");
    theta_ = effective_coupling(kind, beta);
  }

  static ModelSpec from_coupling(ModelKind kind, double theta, double b_field = 0.0) {
    if (!(theta >= 0.0)) throw ConfigError("effective coupling must be >= 0");
    return ModelSpec(kind, beta_for_coupling(kind, theta), b_field);
  }

  ModelKind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  double b_field() const noexcept { return b_field_; }
  double theta() const noexcept { return theta_; }

  ModelSpec with_field(double b_field) const { return ModelSpec(kind_, beta_, b_field); }

 private:
  ModelKind kind_;
  double beta_;
  double b_field_;
  double theta_ = 0.0;
};

namespace detail {
inline void check_index(const WeightSequence& ws, std::size_t i) {
  if (i >= ws.size()) {
    throw ConfigError("vertex index " + std::to_string(i) + " out of range for n = " +
                      std::to_string(ws.size()));
  }
}
}  // namespace detail

/// p_ij = w_i w_j / (l_N + w_i w_j). Indices are 0-based.
inline double edge_probability(const WeightSequence& ws, std::size_t i, std::size_t j) {
  detail::check_index(ws, i);
  detail::check_index(ws, j);
  const double ww = ws[i] * ws[j];
  return ww / (ws.total() + ww);
}

/// J(beta, p) = 1/2 log[(e^beta p + 1 - p) / (e^-beta p + 1 - p)],
/// evaluated as 1/2 [log1p(p (e^beta - 1)) - log1p(p (e^-beta - 1))].
inline double grg_coupling(double beta, double p) {
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("edge probability must lie in [0, 1]");
  if (p == 1.0) return beta;
  return 0.5 * (std::log1p(p * std::expm1(beta)) - std::log1p(p * std::expm1(-beta)));
}

/// J(beta, p) minus its second-order expansion p sinh(beta) - p^2 sinh(beta)(cosh(beta) - 1).
inline double coupling_expansion_gap(double beta, double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw ConfigError("expansion gap is defined for 0 <= p <= 1/2");
  const double s = std::sinh(beta);
  return grg_coupling(beta, p) - (p * s - p * p * s * (std::cosh(beta) - 1.0));
}

/// theta w_i w_j / l_N. Indices are 0-based.
inline double rank1_coupling(const WeightSequence& ws, std::size_t i, std::size_t j, double theta) {
  detail::check_index(ws, i);
  detail::check_index(ws, j);
  return theta * ws[i] * ws[j] / ws.total();
}

/// Mixed-Poisson degree law: E[e^{-W} W^k / k!].
template <WeightLaw L>
double degree_pmf(unsigned k, const L& law) {
  const double log_kfact = std::lgamma(static_cast<double>(k) + 1.0);
  return law.expect([&](double w) {
    return std::exp(static_cast<double>(k) * std::log(w) - w - log_kfact);
  });
}

}  // namespace ising

#endif  // ANNEALED_ISING_MODEL_HPP
