#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "annealed_ising/limit_law.hpp"

using namespace ising;

namespace {

struct PowerLawOracle {
  double tau;
  double C;
  double f100_scaled;  // f(100) / 100^{tau-1}
  double f05, f2, f10;
  double I025, I1, Iinf;  // int_0^Y h(y) y^{-tau} dy
};

// Independent float64 head sums plus a Hurwitz-zeta tail (mpmath), and
// mpmath quadrature for the constants.
const PowerLawOracle kOracles[] = {
    {3.5, 0.44243299951548426, 0.36323472096378157, 0.0015209845127218393, 0.32700135283972187,
     66.496120798154124, 0.0068954314187711553, 0.050201882835678444, 0.63464282923557951},
    {4.0, 0.25260942152148491, 0.24723489732837658, 0.0036558050457937115, 0.80086597414380589,
     204.36123324753049, 0.020718891415839087, 0.077026796025770841, 0.28418559921167053},
    {4.5, 0.28935326840479862, 0.28890332945656788, 0.010195969191155856, 2.3601244458387636,
     875.31698023934746, 0.083058443101231362, 0.15900846513244342, 0.2684160449529212},
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(PowerLawDensity, FrozenValues) {
  for (const auto& o : kOracles) {
    const auto law = LimitLaw::powerlaw(o.tau);
    EXPECT_NEAR(limit_density_f(0.5, law) / o.f05, 1.0, 1e-11) << o.tau;
    EXPECT_NEAR(limit_density_f(2.0, law) / o.f2, 1.0, 1e-11) << o.tau;
    EXPECT_NEAR(limit_density_f(10.0, law) / o.f10, 1.0, 1e-11) << o.tau;
    EXPECT_NEAR(limit_density_f(100.0, law) / std::pow(100.0, o.tau - 1.0) / o.f100_scaled, 1.0, 1e-11)
        << o.tau;
  }
}

TEST(PowerLawDensity, LimitConstant) {
  for (const auto& o : kOracles) {
    EXPECT_NEAR(limit_constant_C(LimitLaw::powerlaw(o.tau)) / o.C, 1.0, 1e-12) << o.tau;
  }
}

TEST(PowerLawDensity, DeficitPowerIntegral) {
  for (const auto& o : kOracles) {
    EXPECT_NEAR(detail::deficit_power_integral(o.tau, 0.25) / o.I025, 1.0, 1e-12) << o.tau;
    EXPECT_NEAR(detail::deficit_power_integral(o.tau, 1.0) / o.I1, 1.0, 1e-12) << o.tau;
    EXPECT_NEAR(detail::deficit_power_integral(o.tau, kInf) / o.Iinf, 1.0, 1e-12) << o.tau;
    EXPECT_EQ(detail::deficit_power_integral(o.tau, 0.0), 0.0);
  }
}

TEST(PowerLawDensity, EvenPositiveIncreasing) {
  const auto law = LimitLaw::powerlaw(3.7);
  EXPECT_EQ(limit_density_f(0.0, law), 0.0);
  double prev = 0.0;
  for (double x = 0.1; x < 30.0; x *= 1.7) {
    const double f = limit_density_f(x, law);
    EXPECT_EQ(f, limit_density_f(-x, law));
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(PowerLawDensity, GrowthApproachesConstant) {
  const auto law = LimitLaw::powerlaw(4.0);
  const double C = limit_constant_C(law);
  const double r1 = limit_density_f(1e2, law) / std::pow(1e2, 3.0) / C;
  const double r2 = limit_density_f(1e4, law) / std::pow(1e4, 3.0) / C;
  EXPECT_LT(std::abs(r2 - 1.0), std::abs(r1 - 1.0));
  EXPECT_NEAR(r2, 1.0, 1e-3);
}

TEST(PowerLawDensity, ToleranceContract) {
  for (double tau : {3.3, 4.0, 4.8}) {
    const auto ref = LimitLaw::powerlaw(tau);
    for (double tol : {1e-4, 1e-8}) {
      const auto loose = ref.with_tolerance(tol);
      for (double x : {0.3, 3.0, 40.0}) {
        const double f = limit_density_f(x, ref);
        EXPECT_LE(std::abs(limit_density_f(x, loose) - f), tol * std::max(1.0, f)) << tau << ' ' << x;
      }
    }
  }
}

TEST(FiniteFourth, QuarticDensity) {
  const auto law = LimitLaw::finite_fourth(2.0, 48.0);
  EXPECT_DOUBLE_EQ(law.quartic, 3.0);
  EXPECT_DOUBLE_EQ(limit_density_f(2.0, law), 3.0 / 12.0 * 16.0);
  EXPECT_DOUBLE_EQ(limit_constant_C(law), 0.25);
  EXPECT_THROW(LimitLaw::finite_fourth(0.0, 1.0), ConfigError);
}

TEST(Normalizer, QuarticClosedForm) {
  // int exp(-x^4/12) dx = Gamma(1/4)/2 * 12^{1/4}
  EXPECT_NEAR(density_normalizer(LimitLaw::finite_fourth(1.0, 1.0)), 3.37401019780002, 1e-12);
}

TEST(Window, ZeroFieldReducesToBareDensity) {
  const auto base = LimitLaw::powerlaw(4.0);
  const auto win = base.with_window(0.0, 3.0);
  for (double x : {0.0, 0.7, -2.0}) {
    EXPECT_EQ(window_density(x, win), std::exp(-limit_density_f(x, base)));
  }
  EXPECT_NEAR(density_normalizer(win), density_normalizer(base), 1e-14);
}

TEST(Window, PositiveFieldBroadensDensity) {
  const auto base = LimitLaw::finite_fourth(1.0, 1.0);
  EXPECT_GT(density_normalizer(base.with_window(1.0, 1.0)), density_normalizer(base));
  EXPECT_LT(density_normalizer(base.with_window(-1.0, 1.0)), density_normalizer(base));
  EXPECT_THROW(base.with_window(1.0, -1.0), ConfigError);
}

TEST(Window, Coefficient) {
  const auto hom = empirical_moments(make_homogeneous_weights(4));
  EXPECT_NEAR(window_coefficient(ModelKind::annealed_grg, hom), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(window_coefficient(ModelKind::rank_one_icw, hom), 1.0);
}

TEST(LimitingMgf, BasicProperties) {
  for (const auto& law : {LimitLaw::finite_fourth(1.0, 1.0), LimitLaw::powerlaw(4.0).with_window(0.5, 1.0)}) {
    EXPECT_NEAR(limiting_mgf(0.0, law), 1.0, 1e-13);
    EXPECT_NEAR(limiting_mgf(0.8, law), limiting_mgf(-0.8, law), 1e-11);
    EXPECT_GT(limiting_mgf(0.8, law), 1.0);
  }
}

TEST(LimitingMgf, MatchesDirectQuadrature) {
  const auto law = LimitLaw::finite_fourth(1.0, 1.0);
  auto num = integrate_smooth([](double x) { return std::exp(0.5 * x - x * x * x * x / 12.0); }, -12.0, 12.0);
  auto den = integrate_smooth([](double x) { return std::exp(-x * x * x * x / 12.0); }, -12.0, 12.0);
  EXPECT_NEAR(limiting_mgf(0.5, law), num.value / den.value, 1e-12);
}

TEST(LimitCdf, MedianAndMonotone) {
  const LimitCdf cdf(LimitLaw::powerlaw(3.5));
  EXPECT_NEAR(cdf(0.0), 0.5, 1e-12);
  EXPECT_EQ(cdf(-1e6), 0.0);
  EXPECT_EQ(cdf(1e6), 1.0);
  double prev = 0.0;
  for (double x = -cdf.support_bound(); x <= cdf.support_bound(); x += 0.1) {
    EXPECT_GE(cdf(x), prev);
    prev = cdf(x);
  }
  EXPECT_NEAR(cdf(1.0) + cdf(-1.0), 1.0, 1e-10);
}

TEST(LimitCdf, MatchesQuadrature) {
  const auto law = LimitLaw::finite_fourth(1.0, 1.0);
  const LimitCdf cdf(law);
  const auto part = integrate_smooth([](double x) { return std::exp(-x * x * x * x / 12.0); }, -12.0, 1.0);
  EXPECT_NEAR(cdf(1.0), part.value / density_normalizer(law), 1e-7);
}

TEST(TabulateDensity, NormalizedIntegratesToOne) {
  const auto law = LimitLaw::powerlaw(4.0);
  std::vector<double> xs;
  for (double x = -8.0; x <= 8.0 + 1e-12; x += 0.01) xs.push_back(x);
  const auto rows = tabulate_density(law, xs);
  double sum = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) sum += 0.005 * (rows[i].normalized + rows[i - 1].normalized);
  EXPECT_NEAR(sum, 1.0, 1e-4);
  std::ostringstream os;
  write_density_csv(os, rows);
  EXPECT_EQ(os.str().rfind("x,f,unnormalized_density,normalized_density\n", 0), 0u);
}

TEST(LimitLawFor, PicksRegime) {
  EXPECT_EQ(limit_law_for(make_homogeneous_weights(5)).regime, Regime::finite_fourth);
  EXPECT_DOUBLE_EQ(limit_law_for(make_homogeneous_weights(5)).quartic, 1.0);
  const auto pl = limit_law_for(make_powerlaw_weights(5, 4.2, 1.0));
  EXPECT_EQ(pl.regime, Regime::powerlaw);
  EXPECT_EQ(pl.tau, 4.2);
  EXPECT_THROW(LimitLaw::powerlaw(5.0), ConfigError);
}

TEST(GnLimitCheck, HomogeneousConverges) {
  const auto law = LimitLaw::finite_fourth(1.0, 1.0);
  const auto table = exponent_table(Regime::finite_fourth);
  double prev_gap = kInf;
  for (std::size_t n : {1000u, 100000u}) {
    const GnFunction gn(make_homogeneous_weights(n), 1.0, table.lambda);
    const auto c = gn_limit_check(gn, 1.2, 0.5, law, table);
    const double gap = std::abs(c.lhs - c.rhs);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 5e-3);
}
