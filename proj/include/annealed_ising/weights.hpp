#ifndef ANNEALED_ISING_WEIGHTS_HPP
#define ANNEALED_ISING_WEIGHTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/numeric.hpp"

namespace ising {

/// Sequences longer than this are never materialized; their moments are
/// summed on the fly.
inline constexpr std::size_t kMaxStoredWeights = 10'000'000;

/// Exponent and scale of the deterministic power-law family
/// w_i = cw * (n / i)^{1/(tau - 1)}.
struct PowerLawTag {
  double tau = 0.0;
  double cw = 0.0;
};

/// Finite vector of strictly positive vertex weights. Immutable; copies
/// share storage.
class WeightSequence {
 public:
  explicit WeightSequence(std::vector<double> w, std::optional<PowerLawTag> tag = std::nullopt)
  {
    if (w.empty()) throw ConfigError("weight sequence must be non-empty");
    KahanSum total;
    for (double x : w) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("weights must be finite and > 0");
      total += x;
    }
    auto data = std::make_shared<Data>();
    data->w = std::move(w);
    data->total = total.value();
    data->tag = tag;
    data_ = std::move(data);
  }

  std::size_t size() const noexcept { return data_->w.size(); }
  std::span<const double> weights() const noexcept { return data_->w; }
  double operator[](std::size_t i) const noexcept { return data_->w[i]; }
  /// l_N, the total weight.
  double total() const noexcept { return data_->total; }
  const std::optional<PowerLawTag>& power_law() const noexcept { return data_->tag; }

  /// Exact uniform average of g over the vertex weights.
  template <class G>
  double expect(G&& g) const {
    KahanSum acc;
    for (double x : data_->w) acc += g(x);
    return acc.value() / static_cast<double>(size());
  }

 private:
  struct Data {
    std::vector<double> w;
    double total = 0.0;
    std::optional<PowerLawTag> tag;
  };
  std::shared_ptr<const Data> data_;
};

inline void validate_powerlaw_tau(double tau) {
  if (!(tau > 3.0 && tau < 5.0)) {
    throw ConfigError("deterministic power-law weights need 3 < tau < 5");
  }
}

inline double powerlaw_weight(std::size_t i, std::size_t n, double tau, double cw) {
  return cw * std::pow(static_cast<double>(n) / static_cast<double>(i), 1.0 / (tau - 1.0));
}

/// w_i = cw * (n/i)^{1/(tau-1)}, i = 1..n (stored 0-based).
inline WeightSequence make_powerlaw_weights(std::size_t n, double tau, double cw) {
  if (n == 0) throw ConfigError("n must be >= 1");
  validate_powerlaw_tau(tau);
  if (!(cw > 0.0)) throw ConfigError("cw must be > 0");
  if (n > kMaxStoredWeights) throw ConfigError("n too large to materialize; use streamed moments");
  std::vector<double> w(n);
  for (std::size_t i = 1; i <= n; ++i) w[i - 1] = powerlaw_weight(i, n, tau, cw);
  return WeightSequence(std::move(w), PowerLawTag{tau, cw});
}

inline WeightSequence make_homogeneous_weights(std::size_t n, double c = 1.0) {
  if (n == 0) throw ConfigError("n must be >= 1");
  if (!(c > 0.0)) throw ConfigError("weight must be > 0");
  return WeightSequence(std::vector<double>(n, c));
}

enum class MomentSource { empirical, limiting };

/// E[W^k], k = 1..4. A disengaged optional marks a divergent moment.
struct MomentSet {
  std::array<std::optional<double>, 4> m{};
  double nu = 0.0;
  MomentSource source = MomentSource::empirical;
  /// Sequence length for empirical moments, 0 for limiting ones.
  std::size_t n = 0;

  bool finite(int k) const { return m.at(static_cast<std::size_t>(k - 1)).has_value(); }

  /// E[W^k]; throws when that moment diverges.
  double moment(int k) const {
    if (k < 1 || k > 4) throw ConfigError("moment order must be in 1..4");
    const auto& v = m[static_cast<std::size_t>(k - 1)];
    if (!v) throw ConfigError("moment E[W^" + std::to_string(k) + "] is infinite");
    return *v;
  }
  double m1() const { return moment(1); }
  double m2() const { return moment(2); }
};

namespace detail {

inline MomentSet finish_moments(const std::array<KahanSum, 4>& sums, std::size_t n) {
  MomentSet out;
  for (std::size_t k = 0; k < 4; ++k) out.m[k] = sums[k].value() / static_cast<double>(n);
  out.nu = *out.m[1] / *out.m[0];
  out.source = MomentSource::empirical;
  out.n = n;
  return out;
}

}  // namespace detail

inline MomentSet empirical_moments(const WeightSequence& ws) {
  std::array<KahanSum, 4> sums;
  for (double x : ws.weights()) {
    const double x2 = x * x;
    sums[0] += x;
    sums[1] += x2;
    sums[2] += x2 * x;
    sums[3] += x2 * x2;
  }
  return detail::finish_moments(sums, ws.size());
}

/// Empirical moments of the power-law sequence without materializing it
/// (any n, including n > kMaxStoredWeights).
inline MomentSet empirical_powerlaw_moments(std::size_t n, double tau, double cw) {
  if (n == 0) throw ConfigError("n must be >= 1");
  validate_powerlaw_tau(tau);
  if (!(cw > 0.0)) throw ConfigError("cw must be > 0");
  std::array<KahanSum, 4> sums;
  // Sum from the small weights up so the compensated sums see increasing terms.
  for (std::size_t i = n; i >= 1; --i) {
    const double x = powerlaw_weight(i, n, tau, cw);
    const double x2 = x * x;
    sums[0] += x;
    sums[1] += x2;
    sums[2] += x2 * x;
    sums[3] += x2 * x2;
  }
  return detail::finish_moments(sums, n);
}

/// Moments of the limit law P(W > w) = (cw / w)^{tau-1}, w > cw:
/// E[W^k] = cw^k (tau-1)/(tau-1-k) for k < tau-1, infinite otherwise.
/// tau = 5 (the log-corrected boundary) is accepted here.
inline MomentSet limiting_moments(double tau, double cw) {
  if (!(tau > 3.0 && tau <= 5.0)) throw ConfigError("limiting moments need 3 < tau <= 5");
  if (!(cw > 0.0)) throw ConfigError("cw must be > 0");
  MomentSet out;
  for (int k = 1; k <= 4; ++k) {
    if (static_cast<double>(k) < tau - 1.0) {
      out.m[static_cast<std::size_t>(k - 1)] = std::pow(cw, k) * (tau - 1.0) / (tau - 1.0 - k);
    }
  }
  out.nu = *out.m[1] / *out.m[0];
  out.source = MomentSource::limiting;
  out.n = 0;
  return out;
}

/// Limit law of the deterministic power-law family, W = cw * U^{-1/(tau-1)}
/// with U uniform on (0,1). Expectations are computed by quadrature in u.
class PowerLawLimit {
 public:
  PowerLawLimit(double tau, double cw) : tau_(tau), cw_(cw), moments_(limiting_moments(tau, cw)) {}

  double tau() const noexcept { return tau_; }
  double cw() const noexcept { return cw_; }
  const MomentSet& moments() const noexcept { return moments_; }

  double weight_at(double u) const { return cw_ * std::pow(u, -1.0 / (tau_ - 1.0)); }

  /// E[g(W)]. `w_break`, when larger than cw, splits the u-range where g
  /// changes behaviour (e.g. where alpha * w * z crosses 1).
  template <class G>
  double expect(G&& g, double w_break = 0.0) const {
    auto in_u = [&](double u) {
      if (u <= 0.0) return 0.0;
      return g(weight_at(u));
    };
    double total = 0.0;
    double u_break = 1.0;
    if (w_break > cw_) u_break = std::pow(cw_ / w_break, tau_ - 1.0);
    if (u_break < 1.0 && u_break > 0.0) {
      total += integrate_endpoint_singular(in_u, 0.0, u_break, 1e-14).value;
      total += integrate_endpoint_singular(in_u, u_break, 1.0, 1e-14).value;
    } else {
      total += integrate_endpoint_singular(in_u, 0.0, 1.0, 1e-14).value;
    }
    return total;
  }

 private:
  double tau_;
  double cw_;
  MomentSet moments_;
};

inline MomentSet moments_of(const WeightSequence& ws) { return empirical_moments(ws); }
inline const MomentSet& moments_of(const PowerLawLimit& law) { return law.moments(); }

/// A weight law usable by the mean-field solver: either an exact finite
/// average or the limiting power law.
template <class L>
concept WeightLaw = requires(const L& law, double (*g)(double)) {
  { law.expect(g) } -> std::convertible_to<double>;
  { moments_of(law) };
};

struct MomentGapRow {
  std::size_t n = 0;
  MomentSet empirical;
  /// |m_k(n) - m_k(inf)|, disengaged where the limiting moment diverges.
  std::array<std::optional<double>, 4> gap{};
};

/// Distance of the empirical power-law moments from their limits for each n.
inline std::vector<MomentGapRow> moment_convergence_report(double tau, double cw,
                                                           std::span<const std::size_t> ns) {
  validate_powerlaw_tau(tau);
  const MomentSet lim = limiting_moments(tau, cw);
  std::vector<MomentGapRow> rows;
  rows.reserve(ns.size());
  for (std::size_t n : ns) {
    MomentGapRow row;
    row.n = n;
    row.empirical = empirical_powerlaw_moments(n, tau, cw);
    for (std::size_t k = 0; k < 4; ++k) {
      if (lim.m[k]) row.gap[k] = std::abs(*row.empirical.m[k] - *lim.m[k]);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV / JSON

inline void write_weights_csv(std::ostream& os, const WeightSequence& ws) {
  os << "i,w\n";
  os.precision(17);
  for (std::size_t i = 0; i < ws.size(); ++i) os << (i + 1) << ',' << ws[i] << '\n';
}

inline WeightSequence read_weights_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("weights CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "i,w") throw ConfigError("weights CSV must start with header 'i,w'");
  std::vector<double> w;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("weights CSV line " + std::to_string(line_no) + ": expected 'i,w'");
    }
    try {
      const long idx = std::stol(line.substr(0, comma));
      if (idx != static_cast<long>(w.size()) + 1) {
        throw ConfigError("weights CSV line " + std::to_string(line_no) + ": indices must be 1..n in order");
      }
      std::size_t used = 0;
      const std::string value = line.substr(comma + 1);
      w.push_back(std::stod(value, &used));
      if (used != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("weights CSV line " + std::to_string(line_no) + ": not a number");
    }
  }
  return WeightSequence(std::move(w));
}

inline nlohmann::json to_json(const MomentSet& mom) {
  nlohmann::json j;
  j["n"] = mom.n;
  const char* names[] = {"m1", "m2", "m3", "m4"};
  for (std::size_t k = 0; k < 4; ++k) {
    if (mom.m[k]) {
      j[names[k]] = *mom.m[k];
    } else {
      j[names[k]] = "inf";
    }
  }
  j["nu"] = mom.nu;
  j["source"] = mom.source == MomentSource::empirical ? "empirical" : "limiting";
  return j;
}

inline MomentSet moments_from_json(const nlohmann::json& j) {
  MomentSet mom;
  try {
    mom.n = j.at("n").get<std::size_t>();
    const char* names[] = {"m1", "m2", "m3", "m4"};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& v = j.at(names[k]);
      if (v.is_string()) {
        if (v.get<std::string>() != "inf") throw ConfigError("moment must be a number or \"inf\"");
      } else {
        mom.m[k] = v.get<double>();
      }
    }
    mom.nu = j.at("nu").get<double>();
    const auto src = j.at("source").get<std::string>();
    if (src == "empirical") {
      mom.source = MomentSource::empirical;
    } else if (src == "limiting") {
      mom.source = MomentSource::limiting;
    } else {
      throw ConfigError("unknown moment source '" + src + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed moments JSON: ") + e.what());
  }
  if (!mom.m[0] || !mom.m[1]) throw ConfigError("m1 and m2 must be finite");
  return mom;
}

}  // namespace ising

#endif  // ANNEALED_ISING_WEIGHTS_HPP
