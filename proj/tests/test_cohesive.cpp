#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fatiguecz/cohesive.hpp"

using namespace fatiguecz;

namespace {

// Example A interface: f_t = 10 MPa, G_Ic = 0.1 N/mm, K = 1e4 N/mm^3.
CohesiveProperties example_a_props() {
  return CohesiveProperties::from_normal_stiffness(1e4, 10.0, 10.0, 0.1, 0.1, 1.0);
}

FatigueProperties example_a_fatigue() {
  FatigueProperties f;
  f.eta_brittle = 0.8;
  f.epsilon = 0.2;
  f.p_rule = PRule::coupled(0.0);
  f.gamma = 1e7;
  f.R = 0.1;
  return f;
}

// Open-hole matrix crack properties (mixed mode, K_sh != K_n).
CohesiveProperties mixed_props() {
  return CohesiveProperties::from_normal_stiffness(1e5, 80.0, 100.0, 0.969, 1.719, 2.284);
}

FatigueProperties mixed_fatigue(PRule rule) {
  FatigueProperties f;
  f.eta_brittle = 0.95;
  f.epsilon = 0.25;
  f.p_rule = rule;
  f.R = 0.1;
  return f;
}

// Central finite differences of update_traction at fixed history and dN.
Mat3 fd_tangent(const Vec3& u, const CohesivePointState& prev, double dN, double theta,
                const CohesiveProperties& props, const FatigueProperties& fat, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 up = u, um = u;
    up[j] += h;
    um[j] -= h;
    J.col(j) = (update_traction(up, prev, dN, theta, props, fat).traction -
                update_traction(um, prev, dN, theta, props, fat).traction) /
               (2.0 * h);
  }
  return J;
}

double rel_frobenius(const Mat3& a, const Mat3& ref) { return (a - ref).norm() / ref.norm(); }

// Jump of equivalent length Delta at mode-mixity B (u_s2 = 0).
Vec3 jump_at(double Delta, double B, const CohesiveProperties& p) {
  // Direction (c_n, c_s) with K_s c_s^2 / (K_n c_n^2 + K_s c_s^2) = B.
  if (B >= 1.0) return Vec3(0.0, Delta, 0.0);
  const double cn = 1.0;
  const double cs = std::sqrt(B * p.K_n / ((1.0 - B) * p.K_sh));
  Vec3 dir(cn, cs, 0.0);
  const double a = p.K_n * cn * cn, b = p.K_sh * cs * cs;
  const double unit = (a + b) / std::sqrt(p.K_n * a + p.K_sh * b);
  return dir * (Delta / unit);
}

}  // namespace

TEST(ShearStiffness, OpenHoleTableValues) {
  // Direct evaluation: 1e5 * (0.969/1.719) * (100/80)^2.
  EXPECT_NEAR(derive_shear_stiffness(1e5, 80, 100, 0.969, 1.719), 88078.0977312391, 1e-6);
}

TEST(ShearStiffness, IdenticalModesKeepStiffness) {
  EXPECT_DOUBLE_EQ(derive_shear_stiffness(3.3e4, 12.0, 12.0, 0.4, 0.4), 3.3e4);
  EXPECT_DOUBLE_EQ(derive_shear_stiffness(2e5, 30, 30, 0.305, 0.305), 2e5);
}

TEST(ShearStiffness, RejectsNonPositiveInput) {
  EXPECT_THROW(derive_shear_stiffness(0.0, 30, 30, 0.3, 0.3), Error);
  EXPECT_THROW(derive_shear_stiffness(1e5, -1, 30, 0.3, 0.3), Error);
  try {
    derive_shear_stiffness(1e5, 30, 30, 0.0, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::invalid_property);
  }
}

TEST(ShearStiffness, PropertiesEnforceConstraint) {
  auto p = mixed_props();
  p.K_sh *= 1.01;
  EXPECT_THROW(p.validate(), Error);
  const auto q = CohesiveProperties::from_shear_stiffness(22000.0, 80, 100, 0.969, 1.719, 2.284);
  EXPECT_NEAR(q.K_sh, 22000.0, 1e-9);
  EXPECT_NEAR(derive_shear_stiffness(q.K_n, 80, 100, 0.969, 1.719), 22000.0, 1e-7);
}

TEST(ModeMixity, PureModesAndSymmetry) {
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3(1e-3, 0, 0), 1e4, 2e4), 0.0);
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3(-1e-3, 2e-3, 0), 1e4, 2e4), 1.0);
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3(0.0, 0.0, 2e-3), 1e4, 2e4), 1.0);
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3(1e-3, 1e-3, 0), 1e4, 1e4), 0.5);
}

TEST(ModeMixity, DegenerateUsesFallback) {
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3::Zero(), 1e4, 1e4, 0.37), 0.37);
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3(-1.0, 0, 0), 1e4, 1e4, 0.2), 0.2);
  EXPECT_DOUBLE_EQ(mode_mixity_from_jump(Vec3::Zero(), 1e4, 1e4), 0.0);
}

TEST(EquivalentKinematics, ExampleAPureModeI) {
  const auto p = example_a_props();
  const auto k = equivalent_kinematics(Vec3(5e-3, 0, 0), p, 0.0);
  EXPECT_NEAR(k.Delta0, 1e-3, 1e-15);
  EXPECT_NEAR(k.Deltaf, 0.02, 1e-14);
  EXPECT_NEAR(k.Delta, 5e-3, 1e-15);
  EXPECT_DOUBLE_EQ(k.B, 0.0);
  EXPECT_NEAR(k.f_B, 10.0, 1e-10);
}

TEST(EquivalentKinematics, PureModeCollapse) {
  const auto p = mixed_props();
  const auto k0 = equivalent_kinematics(Vec3(1e-4, 0, 0), p, 0.0);
  EXPECT_NEAR(k0.Delta0, p.u0_n(), 1e-15);
  EXPECT_NEAR(k0.Deltaf, p.uf_n(), 1e-14);
  const auto k1 = equivalent_kinematics(Vec3(0, 1e-4, 0), p, 0.0);
  EXPECT_NEAR(k1.Delta0, p.u0_sh(), 1e-15);
  EXPECT_NEAR(k1.Deltaf, p.uf_sh(), 1e-14);
  const auto k = equivalent_kinematics(Vec3(1e-4, 1e-4, 0), p, 0.3);
  EXPECT_NEAR(k.DeltaStar, 0.3 * (k.Deltaf - k.Delta0) + k.Delta0, 1e-16);
  EXPECT_GT(k.Deltaf, k.Delta0);
}

TEST(EquivalentKinematics, EquivalentTractionMatchesTractionNorm) {
  const auto p = mixed_props();
  const Vec3 u(3e-4, -2e-4, 1e-4);
  CohesivePointState s;
  s.D = 0.2;
  const auto tt = update_traction(u, s, 0.0, 0.5, p, mixed_fatigue(PRule::coupled(0.0)));
  const double tn = std::max(tt.traction[0], 0.0);
  const double norm = std::sqrt(tn * tn + tt.traction[1] * tt.traction[1] +
                                tt.traction[2] * tt.traction[2]);
  EXPECT_NEAR(tt.kinematics.sigma_eq, norm, 1e-10 * norm);
}

// The 1D law integrated along a proportional path dissipates the B-K energy.
TEST(EquivalentKinematics, EnergyMatchesBenzeggaghKenane) {
  const auto p = mixed_props();
  for (double B : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    const auto k = equivalent_kinematics(jump_at(1e-6, B, p), p, 0.0);
    ASSERT_NEAR(k.B, B, 1e-12);
    auto envelope = [&](double Delta) {
      const double Ds = static_damage(Delta, k.Delta0, k.Deltaf);
      return (1.0 - stiffness_damage(Ds, k.Delta0, k.Deltaf)) * k.K_B * Delta;
    };
    // Composite Simpson on the two smooth branches.
    auto simpson = [&](double a, double b, int n) {
      const double h = (b - a) / n;
      double s = envelope(a) + envelope(b);
      for (int i = 1; i < n; ++i) s += envelope(a + i * h) * (i % 2 ? 4.0 : 2.0);
      return s * h / 3.0;
    };
    const double work = simpson(0.0, k.Delta0, 2000) + simpson(k.Delta0, k.Deltaf, 2000);
    const double Gc = p.G_Ic + (p.G_IIc - p.G_Ic) * std::pow(B, p.eta_bk);
    EXPECT_NEAR(work, Gc, 1e-6 * Gc) << "B=" << B;
    EXPECT_NEAR(0.5 * k.f_B * k.Deltaf, Gc, 1e-12 * Gc);
  }
}

TEST(StaticDamage, Anchors) {
  EXPECT_DOUBLE_EQ(static_damage(1e-3, 1e-3, 0.02), 0.0);
  EXPECT_DOUBLE_EQ(static_damage(0.02, 1e-3, 0.02), 1.0);
  EXPECT_NEAR(static_damage(0.5 * (1e-3 + 0.02), 1e-3, 0.02), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(static_damage(1e-4, 1e-3, 0.02), 0.0);
  EXPECT_DOUBLE_EQ(static_damage(1.0, 1e-3, 0.02), 1.0);
}

TEST(StiffnessDamage, ExampleAFailureState) {
  // d = 1 - 0.6e-3 / (0.4*0.02 + 0.6e-3)
  EXPECT_NEAR(stiffness_damage(0.4, 1e-3, 0.02), 0.930232558139535, 1e-12);
  EXPECT_DOUBLE_EQ(stiffness_damage(0.0, 1e-3, 0.02), 0.0);
  EXPECT_DOUBLE_EQ(stiffness_damage(1.0, 1e-3, 0.02), kMaxStiffnessDamage);
}

TEST(RelativeEndurance, Goodman) {
  EXPECT_NEAR(relative_endurance(0.0, -1.0, 0.2), 0.2, 1e-15);
  EXPECT_NEAR(relative_endurance(0.0, -1.0, 0.37), 0.37, 1e-15);
  EXPECT_NEAR(relative_endurance(0.0, 0.1, 0.2), 0.357142857142857, 1e-12);
  EXPECT_NEAR(relative_endurance(1.0, -1.0, 0.2), 0.116, 1e-12);
}

TEST(RelativeEndurance, RejectsOutOfRange) {
  // R close to 1 drives E to 1.
  EXPECT_THROW(relative_endurance(0.0, 1.0, 0.2), Error);
  EXPECT_THROW(relative_endurance(0.0, 0.5, 1.5), Error);
}

TEST(SnExponent, Values) {
  EXPECT_NEAR(sn_exponent(0.1, 1.0), 7.0, 1e-12);
  EXPECT_NEAR(sn_exponent(0.357142857142857, 0.8), 12.52353666373982, 1e-9);
  EXPECT_DOUBLE_EQ(sn_exponent(0.357142857142857, 0.0), 0.0);
  EXPECT_THROW(sn_exponent(1.0, 0.8), Error);
}

TEST(DamageRate, Cf20Anchors) {
  const double E = 0.357142857142857, beta = 12.52353666373982, gamma = 1e7;
  EXPECT_DOUBLE_EQ(damage_rate_cf20(0.0, 1e-3, 0.1, E, beta, beta, gamma), 0.0);
  // p = beta: (1-D)^0 drops out.
  const double a = damage_rate_cf20(7e-4, 1e-3, 0.1, E, beta, beta, gamma);
  const double b = damage_rate_cf20(7e-4, 1e-3, 0.6, E, beta, beta, gamma);
  EXPECT_NEAR(a, b, 1e-15 * a);
  EXPECT_NEAR(a, std::pow(0.7, beta) / (gamma * std::pow(E, beta) * (beta + 1.0)), 1e-12 * a);
  // Delta = E * Delta*, D = 0: f = 1/(gamma (beta+1)).
  EXPECT_NEAR(damage_rate_cf20(E * 2e-3, 2e-3, 0.0, E, beta, beta, gamma),
              1.0 / (gamma * (beta + 1.0)), 1e-20);
  EXPECT_DOUBLE_EQ(damage_rate_cf20(1e-3, 1e-3, 1.0, E, beta, beta + 0.9, gamma), 0.0);
}

// Independent scalar bisection on r(D) for the implicit update.
static double bisection_root(const std::function<double(double)>& r, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (r(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(ImplicitUpdate, ZeroIncrementReturnsPrevious) {
  const auto p = example_a_props();
  const auto kin = equivalent_kinematics(Vec3(8e-4, 0, 0), p, 0.2);
  CohesivePointState s;
  s.D = 0.2;
  s.rate_prev = 1e-4;
  const auto r = update_fatigue_damage_implicit(s, kin, 0.0, 0.5, example_a_fatigue());
  EXPECT_DOUBLE_EQ(r.D, 0.2);
}

TEST(ImplicitUpdate, BackwardEulerMatchesBisectionOracle) {
  const auto p = example_a_props();
  const auto fat = example_a_fatigue();
  const double E = relative_endurance(0.0, fat.R, fat.epsilon);
  const double beta = sn_exponent(E, fat.eta_brittle);
  for (double D_prev : {0.0, 0.1, 0.3}) {
    for (double dN : {1.0, 10.0, 200.0}) {
      const Vec3 u(1.5e-3, 0, 0);
      const auto kin = equivalent_kinematics(u, p, D_prev);
      CohesivePointState s;
      s.D = D_prev;
      auto r = [&](double D) {
        const double star = D * (kin.Deltaf - kin.Delta0) + kin.Delta0;
        const double f = std::pow(1.0 - D, 0.0) / (fat.gamma * std::pow(E, beta) * (beta + 1.0)) *
                         std::pow(kin.Delta / star, beta);
        return D - D_prev - dN * f;
      };
      const auto res = update_fatigue_damage_implicit(s, kin, dN, 1.0, fat);
      ASSERT_FALSE(res.no_root);
      EXPECT_NEAR(res.D, bisection_root(r, D_prev, 1.0 - 1e-12), 1e-10);
      EXPECT_LT(std::abs(r(res.D)), 1e-10);
    }
  }
}

TEST(ImplicitUpdate, NoRootFallsBackToFullDamage) {
  // p > beta makes f blow up as D -> 1; a large increment leaves no root.
  const auto p = mixed_props();
  const auto fat = mixed_fatigue(PRule::coupled(0.915));
  CohesivePointState s;
  s.D = 0.1;
  const double star = s.D * (p.uf_n() - p.u0_n()) + p.u0_n();
  const Vec3 u(star * (1.0 - 1e-9), 0, 0);
  const auto kin = equivalent_kinematics(u, p, s.D);
  const auto par = fatigue_parameters(0.0, fat);
  s.rate_prev = damage_rate_cf20(kin.Delta, kin.DeltaStar, s.D, par.E, par.beta, par.p, fat.gamma);
  const auto res = update_fatigue_damage_implicit(s, kin, 1e45, 0.5, fat);
  EXPECT_TRUE(res.no_root);
  EXPECT_DOUBLE_EQ(res.D, 1.0);
}

TEST(ImplicitUpdate, RootsSatisfyResidualTolerance) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto p = mixed_props();
  for (auto rule : {PRule::coupled(0.0), PRule::coupled(0.915), PRule::fixed(8.0)}) {
    const auto fat = mixed_fatigue(rule);
    for (int i = 0; i < 300; ++i) {
      const double B = U(gen);
      const Vec3 u = jump_at(1e-4 + 2e-3 * U(gen), B, p);
      CohesivePointState s;
      s.D = 0.9 * U(gen);
      s.B_last = B;
      auto kin = equivalent_kinematics(u, p, s.D);
      const auto par = fatigue_parameters(kin.B, fat);
      s.rate_prev = damage_rate_cf20(kin.Delta, kin.DeltaStar, s.D, par.E, par.beta, par.p, fat.gamma);
      const double dN = std::pow(10.0, 6.0 * U(gen));
      const double theta = 0.25 + 0.75 * U(gen);
      const auto res = update_fatigue_damage_implicit(s, kin, dN, theta, fat);
      EXPECT_GE(res.D, s.D);
      EXPECT_LE(res.D, 1.0);
      if (!res.no_root) {
        const double star = res.D * (kin.Deltaf - kin.Delta0) + kin.Delta0;
        const double f =
            damage_rate_cf20(kin.Delta, star, res.D, par.E, par.beta, par.p, fat.gamma);
        const double r = res.D - s.D - dN * ((1.0 - theta) * s.rate_prev + theta * f);
        EXPECT_LT(std::abs(r), 1e-10);
      }
    }
  }
}

TEST(UpdateTraction, UndamagedIsElastic) {
  const auto p = mixed_props();
  const Vec3 u(1e-4, -3e-5, 0);
  const auto tt = update_traction(u, {}, 0.0, 0.5, p, mixed_fatigue(PRule::coupled(0.0)));
  EXPECT_NEAR(tt.traction[0], p.K_n * u[0], 1e-12);
  EXPECT_NEAR(tt.traction[1], p.K_sh * u[1], 1e-12);
  EXPECT_EQ(tt.branch, DamageBranch::unloading);
  EXPECT_TRUE(tt.tangent.isApprox(secant_stiffness(u, 0.0, p)));
}

TEST(UpdateTraction, CompressionKeepsFullNormalStiffness) {
  const auto p = example_a_props();
  CohesivePointState s;
  s.D = 0.7;
  for (double dN : {0.0, 100.0}) {
    const auto tt = update_traction(Vec3(-2e-3, 0, 0), s, dN, 0.5, p, example_a_fatigue());
    EXPECT_DOUBLE_EQ(tt.traction[0], p.K_n * -2e-3);
    EXPECT_DOUBLE_EQ(tt.state_new.D, 0.7);
  }
}

TEST(UpdateTraction, DamageNeverDecreasesAndStaysInEnvelope) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto p = mixed_props();
  const auto fat = mixed_fatigue(PRule::coupled(0.915));
  for (int path = 0; path < 40; ++path) {
    CohesivePointState s;
    for (int step = 0; step < 60; ++step) {
      const Vec3 u((U(gen) - 0.3) * 3e-3, (U(gen) - 0.5) * 3e-3, 0.0);
      const double dN = U(gen) < 0.5 ? 0.0 : std::pow(10.0, 4.0 * U(gen));
      const auto tt = update_traction(u, s, dN, 0.5, p, fat);
      EXPECT_GE(tt.state_new.D, s.D);
      EXPECT_LE(tt.state_new.D, 1.0);
      const auto& k = tt.kinematics;
      EXPECT_GE(tt.state_new.D, static_damage(k.Delta, k.Delta0, k.Deltaf));
      if (u[0] <= 0.0) EXPECT_DOUBLE_EQ(tt.traction[0], p.K_n * u[0]);
      s = tt.state_new;
    }
  }
}

TEST(ConsistentTangent, UnloadingPureModeIsSecant) {
  const auto p = example_a_props();
  CohesivePointState s;
  s.D = 0.4;
  const Vec3 u(2e-3, 0, 0);  // below the static line for D = 0.4
  const auto tt = update_traction(u, s, 0.0, 0.5, p, example_a_fatigue());
  ASSERT_EQ(tt.branch, DamageBranch::unloading);
  EXPECT_EQ(tt.tangent, secant_stiffness(u, tt.d, p));
}

TEST(ConsistentTangent, StaticModeIMatchesBilinearSlope) {
  const auto p = example_a_props();
  // On the softening branch t = f (u_f - u) / (u_f - u_0) with slope -f/(u_f - u_0).
  const double slope = -p.f_n / (p.uf_n() - p.u0_n());
  for (double u : {1.5e-3, 5e-3, 1e-2, 1.9e-2}) {
    const auto tt = update_traction(Vec3(u, 0, 0), {}, 0.0, 0.5, p, example_a_fatigue());
    ASSERT_EQ(tt.branch, DamageBranch::static_loading);
    EXPECT_NEAR(tt.traction[0], p.f_n * (p.uf_n() - u) / (p.uf_n() - p.u0_n()), 1e-10);
    EXPECT_NEAR(tt.tangent(0, 0), slope, 1e-10 * std::abs(slope));
  }
}

class TangentAudit : public ::testing::TestWithParam<int> {};

TEST_P(TangentAudit, MatchesFiniteDifferences) {
  const int rule_id = GetParam();
  const PRule rule = rule_id == 0 ? PRule::coupled(0.0)
                     : rule_id == 1 ? PRule::coupled(0.915)
                                    : PRule::fixed(9.0);
  const auto p = mixed_props();
  const auto fat = mixed_fatigue(rule);
  std::mt19937 gen(100 + rule_id);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int static_count = 0, fatigue_count = 0;
  for (int i = 0; i < 4000 && (static_count < 100 || fatigue_count < 100); ++i) {
    const double B = 0.02 + 0.96 * U(gen);
    CohesivePointState s;
    s.D = 0.8 * U(gen);
    s.B_last = B;
    const auto k0 = equivalent_kinematics(jump_at(1.0, B, p), p, s.D);
    const bool want_fatigue = U(gen) < 0.5;
    const double Delta = want_fatigue ? k0.DeltaStar * (0.5 + 0.45 * U(gen))
                                      : k0.DeltaStar + (k0.Deltaf - k0.DeltaStar) * (0.05 + 0.9 * U(gen));
    const Vec3 u = jump_at(Delta, B, p);
    const auto kin = equivalent_kinematics(u, p, s.D);
    const auto par = fatigue_parameters(kin.B, fat);
    s.rate_prev = damage_rate_cf20(kin.Delta, kin.DeltaStar, s.D, par.E, par.beta, par.p, fat.gamma);
    const double dN = want_fatigue ? 0.05 * (1.0 - s.D) / std::max(s.rate_prev, 1e-300) * U(gen) : 0.0;
    const auto tt = update_traction(u, s, dN, 0.5, p, fat);
    if (tt.branch == DamageBranch::unloading || tt.no_root) continue;
    const Mat3 fd = fd_tangent(u, s, dN, 0.5, p, fat, 1e-8 * u.norm());
    // Skip samples whose perturbation crosses a branch switch.
    bool same_branch = true;
    for (int j = 0; j < 3; ++j) {
      Vec3 up = u, um = u;
      up[j] += 1e-8 * u.norm();
      um[j] -= 1e-8 * u.norm();
      same_branch &= update_traction(up, s, dN, 0.5, p, fat).branch == tt.branch;
      same_branch &= update_traction(um, s, dN, 0.5, p, fat).branch == tt.branch;
    }
    if (!same_branch) continue;
    EXPECT_LT(rel_frobenius(tt.tangent, fd), 1e-4)
        << "branch=" << static_cast<int>(tt.branch) << " B=" << B << " D=" << s.D;
    (tt.branch == DamageBranch::static_loading ? static_count : fatigue_count)++;
  }
  EXPECT_GE(static_count, 100);
  EXPECT_GE(fatigue_count, 100);
}

INSTANTIATE_TEST_SUITE_P(PRules, TangentAudit, ::testing::Values(0, 1, 2));

TEST(ConsistentTangent, ExplicitFatigueHasNoDamageDerivative) {
  const auto p = example_a_props();
  CohesivePointState s;
  s.D = 0.2;
  s.rate_prev = 1e-4;
  const Vec3 u(1e-3, 0, 0);
  const auto tt = update_traction(u, s, 100.0, 0.0, p, example_a_fatigue());
  ASSERT_EQ(tt.branch, DamageBranch::fatigue_loading);
  EXPECT_NEAR(tt.state_new.D, 0.21, 1e-15);
  EXPECT_TRUE(tt.tangent.isApprox(secant_stiffness(u, tt.d, p), 1e-14));
}
