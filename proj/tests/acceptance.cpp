// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "annealed_ising.hpp"

using namespace ising;

namespace {

int failures = 0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "!") << what << "; ";
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  out.detail.precision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << "exception: " << e.what() << "; ";
  }
  const double elapsed = seconds_since(t0);
  if (budget_s > 0.0 && elapsed > budget_s) {
    out.pass = false;
    out.detail << "!runtime " << elapsed << " s > " << budget_s << " s; ";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] C%02d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", id, name, elapsed,
              out.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(8);
  os << x;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

WeightSequence critical_weights(bool powerlaw, std::size_t n) {
  return powerlaw ? make_powerlaw_weights(n, 4.0, 1.0) : make_homogeneous_weights(n);
}

ExponentTable table_for(bool powerlaw) {
  return powerlaw ? exponent_table_for_tau(4.0) : exponent_table(Regime::finite_fourth);
}

std::vector<double> logspace(double lo, double hi, int per_decade) { return geometric_grid(lo, hi, per_decade); }

}  // namespace

int main() {
  const WeightSequence unit = make_homogeneous_weights(1);
  const PowerLawLimit tau4(4.0, 1.0);
  const PowerLawLimit tau5(5.0, 1.0);

  run(1, "HS quadrature matches 2^n enumeration", 10.0, [](Outcome& o) {
    double worst = 0.0;
    for (std::size_t n : {2, 8, 12}) {
      for (bool pl : {false, true}) {
        const auto ws = critical_weights(pl, n);
        const double nu = empirical_moments(ws).nu;
        for (double theta : {0.3, 1.0 / nu}) {
          const auto spec = ModelSpec::from_coupling(ModelKind::rank_one_icw, theta);
          const auto law = enumerate_spin_law(ws, spec, Measure::tilde);
          const GnFunction gn(ws, theta, table_for(pl).lambda);
          worst = std::max(worst, std::abs(log_partition(gn) - law.log_z) / std::abs(law.log_z));
          for (double r : {0.0, 0.5, -0.5, 2.0, -2.0}) {
            worst = std::max(worst, rel(mgf_ratio(r, gn), spin_law_mgf(law, r, gn.lambda())));
          }
        }
      }
    }
    o.require(worst < 1e-10, "max relative error " + fmt(worst) + " < 1e-10");
  });

  run(2, "exact sampler vs enumerated law", 30.0, [](Outcome& o) {
    for (bool pl : {false, true}) {
      const auto ws = critical_weights(pl, 10);
      const auto spec = ModelSpec::from_coupling(ModelKind::rank_one_icw, 1.0 / empirical_moments(ws).nu);
      const auto exact = enumerate_spin_law(ws, spec, Measure::tilde);
      const auto emp = empirical_spin_law(10, exact_sample(ws, spec, 1'000'000, 20240611));
      const double tv = total_variation(exact, emp);
      o.require(tv < 5e-3, std::string(pl ? "tau=4" : "w=1") + " TV " + fmt(tv) + " < 5e-3");
    }
  });

  run(3, "critical values", 0.0, [&](Outcome& o) {
    const double icw = critical_beta(ModelKind::rank_one_icw, empirical_moments(unit).nu);
    const double grg = critical_beta(ModelKind::annealed_grg, empirical_moments(unit).nu);
    const double icw_n = critical_beta(ModelKind::rank_one_icw, empirical_powerlaw_moments(1'000'000, 4.0, 1.0).nu);
    o.require(icw == 1.0, "beta_c(ICW, w=1) = " + fmt(icw));
    o.require(std::abs(grg - std::asinh(1.0)) < 1e-12, "beta_c(GRG, w=1) = " + fmt(grg));
    o.require(std::abs(icw_n - 0.5) < 1e-2, "beta_c,N(ICW, tau=4, 1e6) = " + fmt(icw_n));
  });

  const auto fields = logspace(1e-6, 1e-3, 8);
  const auto offsets = logspace(1e-5, 1e-2, 8);

  run(4, "exponent delta", 5.0, [&](Outcome& o) {
    for (ModelKind kind : {ModelKind::annealed_grg, ModelKind::rank_one_icw}) {
      const auto k = std::string(to_string(kind));
      const double s1 = fit_exponent(critical_isotherm(kind, unit, fields)).slope;
      const double s4 = fit_exponent(critical_isotherm(kind, tau4, fields)).slope;
      o.require(std::abs(s1 - 1.0 / 3.0) <= 0.02, k + " w=1 slope " + fmt(s1));
      o.require(std::abs(s4 - 0.5) <= 0.05, k + " tau=4 slope " + fmt(s4));
    }
  });

  run(5, "exponent beta", 5.0, [&](Outcome& o) {
    for (ModelKind kind : {ModelKind::annealed_grg, ModelKind::rank_one_icw}) {
      const auto k = std::string(to_string(kind));
      const double s1 = fit_exponent(spontaneous_magnetization(kind, unit, offsets)).slope;
      const double s4 = fit_exponent(spontaneous_magnetization(kind, tau4, offsets)).slope;
      o.require(std::abs(s1 - 0.5) <= 0.03, k + " w=1 slope " + fmt(s1));
      o.require(std::abs(s4 - 1.0) <= 0.05, k + " tau=4 slope " + fmt(s4));
    }
  });

  run(6, "gamma amplitude", 0.0, [&](Outcome& o) {
    const double off = 1e-4;
    const std::vector<double> d{off};
    const auto c1 = zero_field_susceptibility(ModelKind::annealed_grg, unit, d, -1);
    const auto c4 = zero_field_susceptibility(ModelKind::annealed_grg, tau4, d, -1);
    const double a1 = off * c1[0].y;
    const double a4 = off * c4[0].y;
    const double e1 = gamma_amplitude(ModelKind::annealed_grg, empirical_moments(unit));
    const double e4 = gamma_amplitude(ModelKind::annealed_grg, tau4.moments());
    o.require(std::abs(e1 - 1.0 / std::sqrt(2.0)) < 1e-15, "w=1 amplitude formula " + fmt(e1));
    o.require(std::abs(e4 - 0.33541) < 1e-5, "tau=4 amplitude formula " + fmt(e4));
    o.require(rel(a1, e1) < 0.01, "w=1 (beta_c-beta) chi " + fmt(a1));
    o.require(rel(a4, e4) < 0.01, "tau=4 (beta_c-beta) chi " + fmt(a4));
  });

  run(7, "gamma' boundedness", 0.0, [&](Outcome& o) {
    const auto d = logspace(1e-4, 1e-2, 8);
    for (bool pl : {false, true}) {
      const auto pts = pl ? zero_field_susceptibility(ModelKind::annealed_grg, tau4, d, +1)
                          : zero_field_susceptibility(ModelKind::annealed_grg, unit, d, +1);
      double lo = 1e300, hi = 0.0;
      for (const auto& p : pts) {
        lo = std::min(lo, p.x * p.y);
        hi = std::max(hi, p.x * p.y);
      }
      o.require(lo > 0.0 && hi / lo < 10.0,
                std::string(pl ? "tau=4" : "w=1") + " band [" + fmt(lo) + ", " + fmt(hi) + "]");
    }
  });

  run(8, "tau=5 log correction", 0.0, [&](Outcome& o) {
    const auto pts = critical_isotherm(ModelKind::annealed_grg, tau5, fields);
    const double s = fit_exponent(pts, FitTransform::logcorrected(1.0 / 3.0)).slope;
    o.require(std::abs(s - 1.0) <= 0.1, "log-corrected slope " + fmt(s));
  });

  run(9, "G_N limit, finite fourth moment", 10.0, [](Outcome& o) {
    const auto ws = make_homogeneous_weights(1'000'000);
    const auto table = exponent_table(Regime::finite_fourth);
    const GnFunction gn(ws, 1.0 / empirical_moments(ws).nu, table.lambda);
    const auto law = LimitLaw::finite_fourth(empirical_moments(ws));
    const auto c0 = gn_limit_check(gn, 1.0, 0.0, law, table);
    const auto c1 = gn_limit_check(gn, 1.0, 1.0, law, table);
    const double linear = c1.lhs - c0.lhs;
    const double expected = -std::sqrt(gn.moments().m1() / gn.moments().nu);
    o.require(std::abs(c0.lhs - 1.0 / 12.0) < 1e-2, "N G_N(N^-1/4; 0) = " + fmt(c0.lhs));
    o.require(std::abs(linear - expected) < 1e-2, "linear term " + fmt(linear) + " vs " + fmt(expected));
  });

  run(10, "G_N limit, tau=4", 30.0, [](Outcome& o) {
    const auto ws = make_powerlaw_weights(1'000'000, 4.0, 1.0);
    const auto table = exponent_table_for_tau(4.0);
    const GnFunction gn(ws, 1.0 / empirical_moments(ws).nu, table.lambda);
    const auto law = LimitLaw::powerlaw(4.0);
    for (double z : {0.5, 1.0, 2.0}) {
      const auto c = gn_limit_check(gn, z, 0.0, law, table);
      o.require(std::abs(c.lhs - c.rhs) < 2e-2, "z=" + fmt(z) + " lhs " + fmt(c.lhs) + " rhs " + fmt(c.rhs));
    }
  });

  run(11, "finite-N MGF vs limiting MGF", 60.0, [](Outcome& o) {
    for (bool pl : {false, true}) {
      const auto ws = critical_weights(pl, 1'000'000);
      const auto mom = empirical_moments(ws);
      const GnFunction gn(ws, 1.0 / mom.nu, table_for(pl).lambda);
      const auto law = pl ? LimitLaw::powerlaw(4.0) : LimitLaw::finite_fourth(mom);
      for (double r : {0.5, 1.0}) {
        const double finite = mgf_ratio(r, gn);
        const double limit = limiting_mgf(r, law);
        o.require(rel(finite, limit) < 0.02, std::string(pl ? "tau=4" : "w=1") + " r=" + fmt(r) + " " +
                                                 fmt(finite) + " vs " + fmt(limit));
      }
    }
  });

  run(12, "tail constant", 0.0, [](Outcome& o) {
    for (double tau : {3.5, 4.0, 4.5}) {
      const auto law = LimitLaw::powerlaw(tau);
      const double ratio = limit_density_f(100.0, law) / std::pow(100.0, tau - 1.0);
      const double c = limit_constant_C(law);
      o.require(rel(ratio, c) < 0.02, "tau=" + fmt(tau) + " f(100)/100^(tau-1) " + fmt(ratio) + " vs C " + fmt(c) +
                                          " (gap " + fmt(100.0 * (ratio / c - 1.0)) + "%)");
    }
    const auto ff = LimitLaw::finite_fourth(1.0, 1.0);
    bool exact = true;
    for (double x : {0.5, 1.0, 3.0, 100.0}) {
      exact = exact && std::abs(limit_density_f(x, ff) / std::pow(x, 4.0) - limit_constant_C(ff)) <=
                           4.0 * std::numeric_limits<double>::epsilon() * limit_constant_C(ff);
    }
    o.require(exact, "finite_fourth ratio equals C to machine precision");
  });

  run(13, "partition asymptotics", 0.0, [](Outcome& o) {
    for (bool pl : {false, true}) {
      const auto table = table_for(pl);
      std::vector<double> quoted, jacobian;
      for (std::size_t n : {1'000, 10'000, 100'000, 1'000'000}) {
        const auto ws = critical_weights(pl, n);
        const GnFunction gn(ws, 1.0 / empirical_moments(ws).nu, table.lambda);
        const double lz = log_partition(gn);
        const double ln = std::log(static_cast<double>(n));
        const double base = lz - static_cast<double>(n) * std::numbers::ln2;
        quoted.push_back(base - quoted_partition_exponent(table.delta_exp) * ln);
        jacobian.push_back(base - jacobian_partition_exponent(table.delta_exp) * ln);
      }
      auto check = [&](const std::vector<double>& seq, const std::string& label, bool gate) {
        std::string diffs;
        bool decreasing = true;
        double last = 0.0;
        for (std::size_t i = 1; i < seq.size(); ++i) {
          const double d = seq[i] - seq[i - 1];
          diffs += fmt(d) + (i + 1 < seq.size() ? "," : "");
          if (i > 1 && std::abs(d) >= std::abs(last)) decreasing = false;
          last = d;
        }
        const bool ok = decreasing && std::abs(last) < 1e-2;
        if (gate) {
          o.require(ok, label + " diffs [" + diffs + "]");
        } else {
          o.detail << "info " << label << " diffs [" << diffs << "] " << (ok ? "converging" : "not converging") << "; ";
        }
      };
      const std::string reg = pl ? "tau=4" : "w=1";
      check(quoted, reg + " exponent 1/2+1/(delta+1)", true);
      check(jacobian, reg + " exponent 1/2-1/(delta+1)", false);
    }
  });

  run(14, "scaling window", 0.0, [](Outcome& o) {
    const auto base = LimitLaw::finite_fourth(1.0, 1.0);
    const auto pl = LimitLaw::powerlaw(4.0);
    double worst = 0.0;
    for (const auto& law : {base, pl}) {
      const auto w0 = law.with_window(0.0, 1.7);
      for (int i = 0; i < 100; ++i) {
        const double x = -6.0 + 12.0 * i / 99.0;
        worst = std::max(worst, rel(window_density(x, w0), std::exp(-limit_density_f(x, law))));
      }
    }
    o.require(worst == 0.0, "b=0 max relative deviation " + fmt(worst));
    for (bool powerlaw : {false, true}) {
      const std::size_t n = 1'000'000;
      const auto ws = critical_weights(powerlaw, n);
      const auto mom = empirical_moments(ws);
      const auto table = table_for(powerlaw);
      const double beta = critical_beta(ModelKind::annealed_grg, mom.nu) +
                          std::pow(static_cast<double>(n), -(table.delta_exp - 1.0) / (table.delta_exp + 1.0));
      const GnFunction gn(ws, effective_coupling(ModelKind::annealed_grg, beta), table.lambda);
      const auto law = (powerlaw ? LimitLaw::powerlaw(4.0) : LimitLaw::finite_fourth(mom))
                           .with_window(1.0, window_coefficient(ModelKind::annealed_grg, mom));
      const double finite = mgf_ratio(1.0, gn);
      const double limit = limiting_mgf(1.0, law);
      o.require(rel(finite, limit) < 0.05, std::string(powerlaw ? "tau=4" : "w=1") + " b=1 r=1 " + fmt(finite) +
                                               " vs " + fmt(limit));
    }
  });

  run(15, "normalizer closed form", 0.0, [](Outcome& o) {
    const double z = density_normalizer(LimitLaw::finite_fourth(1.0, 1.0));
    const double expected = 2.0 * std::pow(12.0, 0.25) * std::tgamma(1.25);
    o.require(std::abs(z - expected) < 1e-8, fmt(z) + " vs " + fmt(expected));
  });

  run(16, "derivative and consistency suite", 0.0, [&](Outcome& o) {
    double worst_dz = 0.0, worst_chi = 0.0, worst_res = 0.0;
    bool kind_equal = true;
    auto sweep = [&](const auto& law) {
      const double bc = critical_beta(ModelKind::annealed_grg, moments_of(law).nu);
      for (int i = 0; i < 10; ++i) {
        const double beta = bc * (0.5 + 0.1 * i);
        for (int j = 0; j < 10; ++j) {
          const double B = 1e-3 * std::pow(10.0, 0.3 * j);
          const ModelSpec spec(ModelKind::annealed_grg, beta, B);
          const auto fp = solve_fixed_point(spec, law);
          worst_res = std::max(worst_res, fp.residual);
          const auto icw = ModelSpec::from_coupling(ModelKind::rank_one_icw, spec.theta(), B);
          const auto fq = solve_fixed_point(icw, law);
          kind_equal = kind_equal && fq.z_star == fp.z_star &&
                       magnetization(icw, law, fq.z_star) == magnetization(spec, law, fp.z_star);
          const double h = 1e-6 * B;
          const auto up = solve_fixed_point(spec.with_field(B + h), law);
          const auto dn = solve_fixed_point(spec.with_field(B - h), law);
          const double fd = (up.z_star - dn.z_star) / (2.0 * h);
          worst_dz = std::max(worst_dz, rel(*fp.dz_dB, fd));
          const double chi_fd = (magnetization(spec.with_field(B + h), law, up.z_star) -
                                 magnetization(spec.with_field(B - h), law, dn.z_star)) /
                                (2.0 * h);
          worst_chi = std::max(worst_chi, rel(susceptibility(spec, law, fp), chi_fd));
        }
      }
    };
    sweep(unit);
    sweep(make_powerlaw_weights(1000, 4.0, 1.0));
    sweep(tau4);
    o.require(worst_dz < 1e-4, "dz/dB vs FD " + fmt(worst_dz));
    o.require(worst_chi < 1e-4, "chi vs FD " + fmt(worst_chi));
    o.require(kind_equal, "GRG(beta) == ICW(sinh beta) bit-exact");
    o.require(worst_res <= kDefaultFixedPointTol, "max residual " + fmt(worst_res));
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
