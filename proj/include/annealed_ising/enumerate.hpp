#ifndef ANNEALED_ISING_ENUMERATE_HPP
#define ANNEALED_ISING_ENUMERATE_HPP

// Brute-force law of S_N = sum_i sigma_i over all 2^N configurations.
//
// tilde: weights exp{theta/(2 l_N) (sum_i w_i sigma_i)^2}.
// exact: weights exp{1/2 sum_{i,j} J_ij sigma_i sigma_j} with
//        J_ij = grg_coupling(beta, p_ij) on the annealed GRG and
//        theta w_i w_j / l_N on the rank-1 Curie-Weiss model. The diagonal
//        terms are kept; they do not depend on sigma.
// Both include the field term B S_N.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

inline constexpr std::size_t kMaxEnumerationSize = 22;

enum class Measure { tilde, exact };

inline Measure parse_measure(std::string_view s) {
  if (s == "tilde") return Measure::tilde;
  if (s == "exact") return Measure::exact;
  throw ConfigError("unknown measure '" + std::string(s) + "' (expected tilde or exact)");
}

/// Law of S_N on {-N, -N+2, ..., N}; index k holds S = 2k - N.
struct SpinLaw {
  std::size_t n = 0;
  std::vector<double> prob;
  /// log of the sum of unnormalized configuration weights.
  double log_z = 0.0;

  long spin_at(std::size_t k) const { return 2 * static_cast<long>(k) - static_cast<long>(n); }

  double probability(long s) const {
    const long k2 = s + static_cast<long>(n);
    if (k2 < 0 || k2 % 2 != 0 || k2 / 2 > static_cast<long>(n)) return 0.0;
    return prob[static_cast<std::size_t>(k2 / 2)];
  }
};

inline SpinLaw enumerate_spin_law(const WeightSequence& ws, const ModelSpec& spec, Measure measure) {
  const std::size_t n = ws.size();
  if (n > kMaxEnumerationSize) {
    throw ConfigError("enumeration supports n <= " + std::to_string(kMaxEnumerationSize));
  }
  const double B = spec.b_field();

  // Coupling matrix; the tilde measure is the rank-1 form for either kind.
  std::vector<double> J(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (measure == Measure::exact && spec.kind() == ModelKind::annealed_grg) {
        J[i * n + j] = grg_coupling(spec.beta(), edge_probability(ws, i, j));
      } else {
        J[i * n + j] = rank1_coupling(ws, i, j, spec.theta());
      }
    }
  }

  auto energy_of = [&](const std::vector<int>& sigma) {
    KahanSum e;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += J[i * n + j] * sigma[j];
      e += 0.5 * sigma[i] * row + B * sigma[i];
    }
    return e.value();
  };

  // All couplings are non-negative and B >= 0, so the all-plus state has the
  // largest exponent; shifting by it keeps every term <= 1.
  const double shift = energy_of(std::vector<int>(n, 1));

  std::vector<int> sigma(n, -1);
  std::vector<double> field(n, 0.0);  // field_k = sum_j J_kj sigma_j
  auto refresh = [&] {
    for (std::size_t k = 0; k < n; ++k) {
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j) h += J[k * n + j] * sigma[j];
      field[k] = h;
    }
  };
  refresh();
  double energy = energy_of(sigma);
  long s = -static_cast<long>(n);

  std::vector<KahanSum> bins(n + 1);
  const std::uint64_t total = std::uint64_t{1} << n;
  bins[0] += std::exp(energy - shift);
  for (std::uint64_t idx = 1; idx < total; ++idx) {
    const auto k = static_cast<std::size_t>(std::countr_zero(idx));
    const int old = sigma[k];
    energy += -2.0 * old * (field[k] - J[k * n + k] * old) - 2.0 * B * old;
    for (std::size_t j = 0; j < n; ++j) field[j] -= 2.0 * old * J[j * n + k];
    sigma[k] = -old;
    s -= 2 * old;
    if ((idx & 0xFFF) == 0) {
      refresh();
      energy = energy_of(sigma);
    }
    bins[static_cast<std::size_t>((s + static_cast<long>(n)) / 2)] += std::exp(energy - shift);
  }

  SpinLaw law;
  law.n = n;
  law.prob.resize(n + 1);
  KahanSum z;
  for (const auto& b : bins) z += b.value();
  for (std::size_t k = 0; k <= n; ++k) law.prob[k] = bins[k].value() / z.value();
  law.log_z = std::log(z.value()) + shift;
  return law;
}

/// 1/2 sum_s |p(s) - q(s)|.
inline double total_variation(const SpinLaw& a, const SpinLaw& b) {
  if (a.n != b.n) throw ConfigError("total variation needs laws of the same n");
  KahanSum acc;
  for (std::size_t k = 0; k <= a.n; ++k) acc += std::abs(a.prob[k] - b.prob[k]);
  return 0.5 * acc.value();
}

/// Empirical law of a sample of S_N values.
inline SpinLaw empirical_spin_law(std::size_t n, const std::vector<long>& samples) {
  if (samples.empty()) throw ConfigError("empirical law needs at least one sample");
  SpinLaw law;
  law.n = n;
  law.prob.assign(n + 1, 0.0);
  for (long s : samples) {
    const long k2 = s + static_cast<long>(n);
    if (k2 < 0 || k2 % 2 != 0 || k2 / 2 > static_cast<long>(n)) {
      throw ConfigError("sample " + std::to_string(s) + " is not a spin sum for n = " + std::to_string(n));
    }
    law.prob[static_cast<std::size_t>(k2 / 2)] += 1.0;
  }
  for (double& p : law.prob) p /= static_cast<double>(samples.size());
  return law;
}

/// E[exp(r S_N / N^lambda)].
inline double spin_law_mgf(const SpinLaw& law, double r, double lambda) {
  const double scale = r / std::pow(static_cast<double>(law.n), lambda);
  KahanSum acc;
  for (std::size_t k = 0; k <= law.n; ++k) {
    acc += law.prob[k] * std::exp(scale * static_cast<double>(law.spin_at(k)));
  }
  return acc.value();
}

inline void write_spin_law_csv(std::ostream& os, const SpinLaw& law) {
  os << "s,probability\n";
  os.precision(17);
  for (std::size_t k = 0; k <= law.n; ++k) os << law.spin_at(k) << ',' << law.prob[k] << '\n';
}

inline SpinLaw read_spin_law_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || (line != "s,probability" && line != "s,probability\r")) {
    throw ConfigError("spin-law CSV must start with header 's,probability'");
  }
  std::vector<std::pair<long, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed spin-law row: " + line);
    try {
      rows.emplace_back(std::stol(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError("malformed spin-law row: " + line);
    }
  }
  if (rows.empty()) throw ConfigError("spin-law CSV has no rows");
  SpinLaw law;
  law.n = rows.size() - 1;
  law.prob.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].first != law.spin_at(k)) throw ConfigError("spin-law rows must list s = -n, -n+2, ..., n");
    law.prob[k] = rows[k].second;
  }
  return law;
}

}  // namespace ising

#endif  // ANNEALED_ISING_ENUMERATE_HPP
