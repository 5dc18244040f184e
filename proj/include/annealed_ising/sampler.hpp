#ifndef ANNEALED_ISING_SAMPLER_HPP
#define ANNEALED_ISING_SAMPLER_HPP

// Exact sampling of S_N under the rank-1 Curie-Weiss measure P~_N at B = 0.
//
// Hubbard-Stratonovich: with Z ~ N(0,1),
//   exp{theta/(2 l_N) M^2} = E_Z exp{sqrt(theta/l_N) M Z},  M = sum_i w_i sigma_i,
// so (Z, sigma) has a joint law under which, given Z, the spins are independent
// with P(sigma_i = +1) = e^{a_i} / (2 cosh a_i), a_i = sqrt(theta/l_N) w_i Z.
// The sampler draws z = Z / sqrt(N), whose marginal density is proportional
// to exp(-N G_N(z; 0)); in that variable a_i = alpha_N w_i z with
// alpha_N = sqrt(theta / E[W_N]), since sqrt(theta / l_N) sqrt(N) = alpha_N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "annealed_ising/errors.hpp"
#include "annealed_ising/hubbard_stratonovich.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"

namespace ising {

class ExactSampler {
 public:
  using Engine = std::mt19937_64;

  ExactSampler(const WeightSequence& ws, const ModelSpec& spec, int grid_nodes = 4096)
      : gn_(ws, spec.theta(), 1.0) {
    if (spec.b_field() != 0.0) throw ConfigError("exact sampling is implemented for B = 0 only");
    if (grid_nodes < 16) throw ConfigError("sampler grid needs at least 16 nodes");
    build_blocks();
    if (gn_.alpha() > 0.0) build_grid(grid_nodes);
  }

  std::size_t n() const noexcept { return gn_.n(); }
  /// Quantiles of the auxiliary variable at j / grid_nodes.
  const std::vector<double>& grid() const noexcept { return nodes_; }

  /// Auxiliary variable z with density proportional to exp(-N G_N(z; 0)).
  double draw_auxiliary(Engine& rng) const {
    if (cdf_.empty()) return 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double target = unif(rng) * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const auto k = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    const double below = k > 0 ? cdf_[k - 1] : 0.0;
    const double mass = cdf_[k] - below;
    const double t = mass > 0.0 ? std::clamp((target - below) / mass, 0.0, 1.0) : 0.5;
    return cell_lo_[k] + t * cell_width_[k];
  }

  /// S_N given z.
  long draw_spin_sum(double z, Engine& rng) const {
    const double az = gn_.alpha() * std::abs(z);
    const auto& w = gn_.sorted_weights();
    long long plus = 0;
    for (const auto& blk : blocks_) {
      const auto m = static_cast<long long>(blk.end - blk.begin);
      const double p_lo = up_probability(az * w[blk.end - 1]);
      const double p_hi = up_probability(az * w[blk.begin]);
      if (p_hi == p_lo) {
        plus += std::binomial_distribution<long long>(m, p_lo)(rng);
        continue;
      }
      if (m <= 4) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::size_t i = blk.begin; i < blk.end; ++i) {
          if (unif(rng) < up_probability(az * w[i])) ++plus;
        }
        continue;
      }
      // sigma_i = +1 iff A_i or B_i with A_i ~ Bern(p_lo) and
      // B_i ~ Bern((p_i - p_lo) / (1 - p_lo)); the B_i are found by geometric
      // skipping at the block's largest rate followed by thinning.
      const double q_max = (p_hi - p_lo) / (1.0 - p_lo);
      std::geometric_distribution<long long> skip(q_max);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      long long extra = 0;
      long long pos = static_cast<long long>(blk.begin) - 1;
      while (true) {
        pos += 1 + skip(rng);
        if (pos >= static_cast<long long>(blk.end)) break;
        const double q = (up_probability(az * w[static_cast<std::size_t>(pos)]) - p_lo) / (1.0 - p_lo);
        if (unif(rng) * q_max < q) ++extra;
      }
      plus += extra + std::binomial_distribution<long long>(m - extra, p_lo)(rng);
    }
    const long s = static_cast<long>(2 * plus - static_cast<long long>(n()));
    return z < 0.0 ? -s : s;
  }

  std::vector<long> sample(std::size_t count, std::uint64_t seed) const {
    Engine rng(seed);
    std::vector<long> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(draw_spin_sum(draw_auxiliary(rng), rng));
    return out;
  }

 private:
  struct Block {
    std::size_t begin;
    std::size_t end;
  };

  static double up_probability(double a) { return 1.0 / (1.0 + std::exp(-2.0 * a)); }

  void build_blocks() {
    const auto& w = gn_.sorted_weights();
    std::size_t i = 0;
    while (i < w.size()) {
      std::size_t len = i < 64 ? 1 : std::max<std::size_t>(1, i / 20);
      // Runs of equal weights always go into one block.
      std::size_t end = std::min(w.size(), i + len);
      if (w[i] == w[end - 1]) {
        while (end < w.size() && w[end] == w[i]) ++end;
      }
      blocks_.push_back({i, end});
      i = end;
    }
  }

  // Cell masses of exp(-N G_N) over each region (3-point Gauss-Legendre per
  // cell); draws interpolate linearly inside a cell, so gaps between wells
  // carry no mass. nodes_ holds the quantiles at j / nodes for reporting.
  void build_grid(int nodes) {
    const auto regions = gn_.regions(0.0);
    const double f_min = regions.front().f_min;
    const int per_region = std::max(64, 8 * nodes / static_cast<int>(regions.size()));
    const double g = std::sqrt(0.6);
    auto dens = [&](double z) { return std::exp(-(gn_.scaled(z, 0.0) - f_min)); };
    KahanSum acc;
    for (const auto& win : regions) {
      const double h = (win.hi - win.lo) / per_region;
      for (int i = 0; i < per_region; ++i) {
        const double lo = win.lo + h * i;
        const double mid = lo + 0.5 * h;
        acc += h / 18.0 * (5.0 * dens(mid - 0.5 * g * h) + 8.0 * dens(mid) + 5.0 * dens(mid + 0.5 * g * h));
        cdf_.push_back(acc.value());
        cell_lo_.push_back(lo);
        cell_width_.push_back(h);
      }
    }
    const double total = acc.value();
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw NumericalError("auxiliary density underflows on the whole grid", 0.0);
    }
    nodes_.resize(static_cast<std::size_t>(nodes) + 1);
    std::size_t c = 0;
    for (int j = 0; j <= nodes; ++j) {
      const double target = total * j / nodes;
      while (c + 1 < cdf_.size() && cdf_[c] < target) ++c;
      const double below = c > 0 ? cdf_[c - 1] : 0.0;
      const double mass = cdf_[c] - below;
      const double t = mass > 0.0 ? std::clamp((target - below) / mass, 0.0, 1.0) : 0.0;
      nodes_[static_cast<std::size_t>(j)] = cell_lo_[c] + t * cell_width_[c];
    }
  }

  GnFunction gn_;
  std::vector<Block> blocks_;
  std::vector<double> nodes_;
  std::vector<double> cdf_;
  std::vector<double> cell_lo_;
  std::vector<double> cell_width_;
};

/// Draws `count` values of S_N under P~_N.
inline std::vector<long> exact_sample(const WeightSequence& ws, const ModelSpec& spec,
                                      std::size_t count, std::uint64_t seed) {
  return ExactSampler(ws, spec).sample(count, seed);
}

}  // namespace ising

#endif  // ANNEALED_ISING_SAMPLER_HPP
