#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "annealed_ising/meanfield.hpp"

using namespace ising;

namespace {
const auto kOnes = make_homogeneous_weights(10);
}

// Homogeneous weights reduce to the Curie-Weiss equation m = tanh(theta m + B).
TEST(FixedPoint, CurieWeissSpontaneous) {
  const ModelSpec spec(ModelKind::rank_one_icw, 2.0);
  const auto fp = solve_fixed_point(spec, kOnes);
  EXPECT_EQ(fp.branch, Branch::positive);
  // mpmath root of m = tanh(2m)
  EXPECT_NEAR(magnetization(spec, kOnes, fp.z_star), 0.957504024077268740676501530502, 1e-12);
}

TEST(FixedPoint, CurieWeissInField) {
  const ModelSpec spec(ModelKind::rank_one_icw, 1.0, 0.1);
  const auto fp = solve_fixed_point(spec, kOnes);
  EXPECT_NEAR(magnetization(spec, kOnes, fp.z_star), 0.611811554865308954942775589182, 1e-12);
  EXPECT_LE(fp.residual, kDefaultFixedPointTol);
}

TEST(FixedPoint, ZeroBranchBelowCritical) {
  const ModelSpec spec(ModelKind::annealed_grg, 0.5);
  const auto fp = solve_fixed_point(spec, kOnes);
  EXPECT_EQ(fp.branch, Branch::zero);
  EXPECT_EQ(fp.z_star, 0.0);
  EXPECT_FALSE(fp.critical);
}

TEST(FixedPoint, CriticalPointFlaggedAndChiDiverges) {
  const auto spec = ModelSpec::from_coupling(ModelKind::rank_one_icw, 1.0);
  const auto fp = solve_fixed_point(spec, kOnes);
  EXPECT_TRUE(fp.critical);
  EXPECT_FALSE(fp.dz_dB);
  EXPECT_THROW(susceptibility(spec, kOnes, fp), CriticalDivergence);
  EXPECT_TRUE(std::isinf(thermo_point(spec, kOnes).susceptibility));
}

TEST(FixedPoint, ZeroCoupling) {
  const ModelSpec spec(ModelKind::annealed_grg, 0.0, 0.3);
  const auto tp = thermo_point(spec, make_powerlaw_weights(100, 4.0, 1.0));
  EXPECT_NEAR(tp.magnetization, std::tanh(0.3), 1e-15);
  EXPECT_NEAR(tp.susceptibility, 1.0 - std::tanh(0.3) * std::tanh(0.3), 1e-15);
}

TEST(FixedPoint, RejectsBadTolerance) {
  EXPECT_THROW(solve_fixed_point(ModelSpec(ModelKind::annealed_grg, 0.5), kOnes, 0.0), ConfigError);
}

TEST(Susceptibility, CurieWeissClosedForm) {
  // chi = (1 - m^2) / (1 - theta (1 - m^2))
  for (double theta : {0.5, 1.5}) {
    const ModelSpec spec(ModelKind::rank_one_icw, theta, 0.05);
    const auto tp = thermo_point(spec, kOnes);
    const double q = 1.0 - tp.magnetization * tp.magnetization;
    EXPECT_NEAR(tp.susceptibility, q / (1.0 - theta * q), 1e-10);
  }
}

TEST(Susceptibility, MatchesFieldDerivative) {
  const PowerLawLimit law(4.0, 1.0);
  const double beta = 0.3;
  const double B = 0.01;
  const double h = 1e-6;
  auto m_at = [&](double b) {
    const ModelSpec s(ModelKind::annealed_grg, beta, b);
    return magnetization(s, law, solve_fixed_point(s, law).z_star);
  };
  const double fd = (m_at(B + h) - m_at(B - h)) / (2.0 * h);
  const double chi = thermo_point(ModelSpec(ModelKind::annealed_grg, beta, B), law).susceptibility;
  EXPECT_NEAR(chi / fd, 1.0, 1e-6);
}

TEST(Magnetization, MonotoneAndBounded) {
  const auto ws = make_powerlaw_weights(2000, 3.5, 1.0);
  double prev = 0.0;
  for (double B : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
    const auto tp = thermo_point(ModelSpec(ModelKind::annealed_grg, 0.4, B), ws);
    EXPECT_GT(tp.magnetization, prev);
    EXPECT_LT(tp.magnetization, 1.0);
    prev = tp.magnetization;
  }
}

TEST(Magnetization, FiniteSequenceApproachesLimit) {
  const PowerLawLimit law(4.5, 1.0);
  const ModelSpec spec(ModelKind::annealed_grg, 0.5, 0.05);
  const double lim = thermo_point(spec, law).magnetization;
  const double gap_small = std::abs(thermo_point(spec, make_powerlaw_weights(1000, 4.5, 1.0)).magnetization - lim);
  const double gap_big = std::abs(thermo_point(spec, make_powerlaw_weights(300000, 4.5, 1.0)).magnetization - lim);
  EXPECT_LT(gap_big, gap_small);
  EXPECT_LT(gap_big, 1e-3);
}

TEST(CurveCsv, WritesInfAtCriticalPoint) {
  const auto spec = ModelSpec::from_coupling(ModelKind::rank_one_icw, 1.0);
  std::ostringstream os;
  write_curve_csv(os, {curve_row(spec, kOnes)});
  EXPECT_NE(os.str().find(",inf\n"), std::string::npos);
  EXPECT_EQ(os.str().rfind("beta,B,z_star,magnetization,susceptibility\n", 0), 0u);
}
