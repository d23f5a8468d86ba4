#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fatiguecz/analysis.hpp"
#include "fatiguecz/tangent_audit.hpp"

using namespace fatiguecz;

TEST(CrackLength, Examples) {
  // Two 1 mm interface elements, three Newton-Cotes points each: J w = 1/6, 2/3, 1/6.
  const std::vector<double> jw{1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 6};
  EXPECT_DOUBLE_EQ(crack_length(std::vector<double>(6, 0.0), jw, 51.2), 51.2);
  EXPECT_NEAR(crack_length(std::vector<double>(6, 1.0), jw, 51.2), 53.2, 1e-12);
  EXPECT_NEAR(crack_length(std::vector<double>(6, 0.5), jw, 51.2), 52.2, 1e-12);
  EXPECT_THROW(crack_length(std::vector<double>(5, 0.5), jw, 51.2), Error);
}

TEST(GrowthRate, Examples) {
  const std::vector<double> N{0, 10, 20, 20, 50};
  EXPECT_EQ(growth_rate(N, std::vector<double>(5, 3.0)), std::vector<double>(5, 0.0));
  std::vector<double> a;
  for (double n : N) a.push_back(51.2 + 0.01 * n);
  const auto r = growth_rate(N, a);
  EXPECT_DOUBLE_EQ(r[0], 0.0);
  EXPECT_NEAR(r[1], 0.01, 1e-15);
  EXPECT_NEAR(r[2], 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(r[3], 0.0);  // dN = 0
  EXPECT_NEAR(r[4], 0.01, 1e-15);
}

TEST(ErrAstm, Examples) {
  EXPECT_NEAR(err_astm(60.0, 5.0, 25.0, 53.8, 6.2), 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(err_astm(0.0, 5.0, 25.0, 53.8, 6.2), 0.0);
  EXPECT_NEAR(err_astm(60.0, 5.0, 50.0, 53.8, 6.2), 0.15, 1e-15);
  EXPECT_THROW(err_astm(60.0, 5.0, 0.0, 53.8, 6.2), Error);
}

TEST(AnalyticalCycles, Examples) {
  const double E = relative_endurance(0.0, 0.1, 0.2);
  const double beta = sn_exponent(E, 0.8);
  EXPECT_NEAR(E, 0.357142857142857, 1e-12);
  EXPECT_DOUBLE_EQ(analytical_cycles_to_failure(1.0, E, beta, beta, 1e7), 0.0);
  EXPECT_NEAR(analytical_cycles_to_failure(0.6, E, beta, beta, 1e7), 15062.48, 0.01);
  EXPECT_NEAR(analytical_cycles_to_failure(0.9, E, beta, beta, 1e7), 71.375, 1e-3);
  // At the endurance limit the bracket is nearly one: N = gamma (1 - E^(p+1)).
  EXPECT_NEAR(analytical_cycles_to_failure(E, E, beta, beta, 1e7), 1e7 * (1 - std::pow(E, beta + 1)), 1e-3);
  double prev = std::numeric_limits<double>::infinity();
  for (double s = E + 0.01; s <= 1.0; s += 0.01) {
    const double n = analytical_cycles_to_failure(s, E, beta, beta, 1e7);
    EXPECT_LT(n, prev);
    prev = n;
  }
  EXPECT_THROW(analytical_cycles_to_failure(1.1, E, beta, beta, 1e7), Error);
  EXPECT_THROW(analytical_cycles_to_failure(0.0, E, beta, beta, 1e7), Error);
}

TEST(AnalyticalDamage, ReachesFailureStateAtNfail) {
  const double E = relative_endurance(0.0, 0.1, 0.2);
  const double beta = sn_exponent(E, 0.8);
  for (double s : {0.5, 0.6, 0.9}) {
    const double Nf = analytical_cycles_to_failure(s, E, beta, beta, 1e7);
    EXPECT_NEAR(analytical_damage(Nf, s, E, beta, beta, 1e7), 1.0 - s, 1e-9) << s;
    EXPECT_DOUBLE_EQ(analytical_damage(0.0, s, E, beta, beta, 1e7), 0.0);
  }
}

// Dense RK4 integration (dN = 0.1) of the damage rate at constant stress, where the
// opening relative to the envelope is s / (1 - D).
double integrate_damage(double N_end, double s, double E, double beta, double p, double gamma) {
  auto f = [&](double D) { return damage_rate_cf20(s / (1.0 - D), 1.0, D, E, beta, p, gamma); };
  const double h = 0.1;
  double D = 0.0;
  const long steps = std::lround(N_end / h);
  for (long i = 0; i < steps; ++i) {
    const double k1 = f(D), k2 = f(D + 0.5 * h * k1), k3 = f(D + 0.5 * h * k2), k4 = f(D + h * k3);
    D += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return D;
}

TEST(AnalyticalDamage, MatchesDenseIntegration) {
  const double E = relative_endurance(0.0, 0.1, 0.2);
  const double beta = sn_exponent(E, 0.8);
  for (double p : {beta, beta + 0.915}) {
    const double s = 0.6;
    const double Nf = analytical_cycles_to_failure(s, E, beta, p, 1e7);
    EXPECT_NEAR(analytical_damage(Nf, s, E, beta, p, 1e7), 1.0 - s, 1e-9) << p;
    for (double frac : {0.25, 0.5, 0.9, 0.99}) {
      const double N = std::round(frac * Nf * 10.0) / 10.0;
      EXPECT_NEAR(analytical_damage(N, s, E, beta, p, 1e7), integrate_damage(N, s, E, beta, p, 1e7), 1e-8)
          << p << " " << frac;
    }
  }
}

TEST(LinearFit, ExactLine) {
  const auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_EQ(f.n, 4);
}

TEST(CrackHistory, UsesMeasuredForceAndDisplacement) {
  std::vector<StepRecord> steps(4);
  steps[0].ramp = true;
  steps[0].force = 10.0;
  for (int i = 1; i < 4; ++i) {
    steps[i].N = 100.0 * i;
    steps[i].force = 60.0;
    steps[i].displacement = 5.0;
    steps[i].damaged_length = 0.5 * i;
    steps[i].max_damage = i >= 2 ? 1.0 : 0.9;
  }
  steps[3].damaged_length = 2.6;  // a + delta_cor = 60
  const auto h = crack_history(steps, 51.2, 25.0, 6.2);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h[0].a, 51.7);
  EXPECT_DOUBLE_EQ(h[0].dadN, 0.0);
  EXPECT_NEAR(h[1].dadN, 0.005, 1e-15);
  EXPECT_NEAR(h[2].G_Imax, 0.3, 1e-15);
  EXPECT_FALSE(h[0].propagating);
  EXPECT_TRUE(h[1].propagating);
}

TEST(ParisData, DropsOnsetAndFits) {
  std::vector<CrackHistoryRecord> h;
  for (int i = 0; i < 8; ++i) {
    CrackHistoryRecord r;
    r.G_Imax = 0.3 - 0.02 * i;
    r.dadN = 1e-3 * std::pow(r.G_Imax * 0.9 / 0.305, 5.0);
    r.propagating = i >= 2;
    h.push_back(r);
  }
  h[0].dadN = 1.0;  // onset outlier, dropped
  const auto d = paris_data(h, 0.1, 0.305);
  EXPECT_EQ(d.x.size(), 6u);
  EXPECT_TRUE(d.monotone);
  EXPECT_NEAR(d.fit.slope, 5.0, 1e-10);
  EXPECT_NEAR(d.fit.r2, 1.0, 1e-12);
  h[5].dadN *= 0.1;
  EXPECT_FALSE(paris_data(h, 0.1, 0.305).monotone);
}

TEST(TangentAudit, AllBranchesWithinTolerance) {
  const auto p = CohesiveProperties::from_shear_stiffness(22000, 80, 100, 0.969, 1.719, 2.284);
  FatigueProperties f;
  f.eta_brittle = 0.95;
  f.epsilon = 0.25;
  f.p_rule = PRule::coupled(0.0);
  const auto rep = audit_tangent(p, f);
  ASSERT_EQ(rep.entries.size(), 12u);
  for (const auto& e : rep.entries) {
    EXPECT_EQ(e.samples, 100) << branch_name(e.branch) << " B=" << e.B;
    EXPECT_TRUE(e.pass()) << branch_name(e.branch) << " B=" << e.B << " err=" << e.max_error;
  }
  EXPECT_LE(rep.max_error(DamageBranch::unloading), 1e-12);
}

TEST(TangentAudit, DetectsAWrongTangent) {
  const auto p = CohesiveProperties::from_shear_stiffness(22000, 80, 100, 0.969, 1.719, 2.284);
  const auto k = equivalent_kinematics(jump_at_mixity(1.0, 0.3, p), p, 0.0);
  const Vec3 u = jump_at_mixity(0.5 * (k.Delta0 + k.Deltaf), 0.3, p);
  const CohesivePointState s;
  const FatigueProperties f;
  const auto tt = update_traction(u, s, 0.0, 0.5, p, f);
  ASSERT_EQ(tt.branch, DamageBranch::static_loading);
  const Mat3 fd = fd_tangent(u, s, 0.0, 0.5, p, f, Vec3::Constant(1e-5 * u.norm()));
  EXPECT_LT(relative_frobenius(tt.tangent, fd), 1e-4);
  // The secant misses the damage growth with the jump and must be rejected.
  EXPECT_GT(relative_frobenius(secant_stiffness(u, tt.d, p), fd), 1e-2);
}

TEST(ParisData, FixedIncrementsRemoveElementOscillation) {
  // a(N) = smooth power-law growth plus a ripple with the element length as period in a.
  const double L = 0.2;
  std::vector<CrackHistoryRecord> h;
  double a = 52.0, N = 0.0;
  while (a < 56.0) {
    CrackHistoryRecord r;
    r.N = N;
    r.a = a;
    r.G_Imax = 0.3 * 52.0 / a;
    r.propagating = true;
    h.push_back(r);
    const double smooth = 1e-3 * std::pow(r.G_Imax / 0.3, 6.0);
    const double ripple = 1.0 + 0.4 * std::sin(2.0 * M_PI * (a - 52.0) / L);
    a += smooth * ripple * 0.5;
    N += 0.5;
  }
  std::vector<double> Ns, as;
  for (const auto& r : h) {
    Ns.push_back(r.N);
    as.push_back(r.a);
  }
  const auto rate = growth_rate(Ns, as);
  for (size_t i = 0; i < h.size(); ++i) h[i].dadN = rate[i];
  EXPECT_FALSE(paris_data(h, 0.1, 0.305).monotone);
  const auto d = paris_data(h, 0.1, 0.305, L);
  EXPECT_TRUE(d.monotone);
  EXPECT_GT(d.fit.r2, 0.999);
  EXPECT_NEAR(d.fit.slope, 6.0, 0.1);
  EXPECT_THROW(paris_data(h, 0.1, 0.305, -1.0), Error);
}
