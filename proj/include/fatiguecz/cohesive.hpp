#pragma once

// Integration-point cohesive law: mixed-mode bilinear softening with
// mode-dependent dummy stiffness, CF20 fatigue damage rate integrated with the
// generalized trapezoidal rule, and the consistent material tangent.
//
// Vectors and matrices are ordered (normal, shear-1, shear-2). Units: N, mm, MPa.

#include <Eigen/Core>

#include "fatiguecz/error.hpp"

namespace fatiguecz {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Shear dummy stiffness that makes the mixed-mode dissipation follow the B-K law.
double derive_shear_stiffness(double K_n, double f_n, double f_sh, double G_Ic, double G_IIc);

struct CohesiveProperties {
  double K_n = 0.0;    // N/mm^3
  double K_sh = 0.0;   // N/mm^3, always consistent with derive_shear_stiffness
  double f_n = 0.0;    // MPa
  double f_sh = 0.0;   // MPa
  double G_Ic = 0.0;   // N/mm
  double G_IIc = 0.0;  // N/mm
  double eta_bk = 1.0;

  /// Builds from the normal stiffness; K_sh is derived.
  static CohesiveProperties from_normal_stiffness(double K_n, double f_n, double f_sh, double G_Ic,
                                                  double G_IIc, double eta_bk);
  /// Builds from a prescribed shear stiffness (ply interfaces); K_n is back-computed.
  static CohesiveProperties from_shear_stiffness(double K_sh, double f_n, double f_sh, double G_Ic,
                                                 double G_IIc, double eta_bk);

  void validate() const;

  double u0_n() const { return f_n / K_n; }
  double uf_n() const { return 2.0 * G_Ic / f_n; }
  double u0_sh() const { return f_sh / K_sh; }
  double uf_sh() const { return 2.0 * G_IIc / f_sh; }

  /// B-K critical energy release rate at mode-mixity B.
  double critical_err(double B) const;
};

/// Either a fixed exponent p or p = beta + offset.
struct PRule {
  enum class Kind { fixed, coupled };
  Kind kind = Kind::coupled;
  double value = 0.0;  // p for fixed, offset for coupled

  static PRule fixed(double p) { return {Kind::fixed, p}; }
  static PRule coupled(double offset) { return {Kind::coupled, offset}; }

  double p(double beta) const { return kind == Kind::fixed ? value : beta + value; }
  double dp_dbeta() const { return kind == Kind::fixed ? 0.0 : 1.0; }
};

struct FatigueProperties {
  double eta_brittle = 1.0;
  double epsilon = 0.2;  // relative endurance at R = -1
  PRule p_rule = PRule::coupled(0.0);
  double gamma = 1.0e7;  // cycles to failure at the endurance limit
  double R = 0.1;

  void validate() const;
};

struct CohesivePointState {
  double D = 0.0;  // energy-based damage
  Vec3 jump_prev = Vec3::Zero();
  double rate_prev = 0.0;  // f_D at the last converged state, 1/cycle
  double B_last = 0.0;     // last non-degenerate mode-mixity
  double local_residual = 0.0;  // |r| of the implicit update that produced D
};

struct EquivalentKinematics {
  double Delta = 0.0;
  double Delta0 = 0.0;
  double Deltaf = 0.0;
  double DeltaStar = 0.0;
  double B = 0.0;
  double K_B = 0.0;
  double sigma_eq = 0.0;  // equivalent traction at the damage level D
  double f_B = 0.0;
  bool degenerate_B = false;
};

/// Threshold on K_n<u_n>^2 + K_sh u_sh^2 below which B falls back to history.
inline constexpr double kDegenerateMixity = 1e-30;
/// Upper bound on the stiffness damage d.
inline constexpr double kMaxStiffnessDamage = 1.0 - 1e-12;

double mode_mixity_from_jump(const Vec3& jump, double K_n, double K_sh, double B_fallback = 0.0);

EquivalentKinematics equivalent_kinematics(const Vec3& jump, const CohesiveProperties& props,
                                           double D, double B_fallback = 0.0);

double static_damage(double Delta, double Delta0, double Deltaf);

/// d(D) relation, clamped to kMaxStiffnessDamage.
double stiffness_damage(double D, double Delta0, double Deltaf);

double relative_endurance(double B, double R, double epsilon);

double sn_exponent(double E, double eta_brittle);

double damage_rate_cf20(double Delta, double DeltaStar, double D, double E, double beta, double p,
                        double gamma);

/// S-N parameters evaluated at mode-mixity B.
struct FatigueParameters {
  double C_l = 1.0;
  double E = 0.0;
  double beta = 0.0;
  double p = 0.0;
};

FatigueParameters fatigue_parameters(double B, const FatigueProperties& fat);

struct ImplicitUpdateResult {
  double D = 0.0;
  double residual = 0.0;  // r(D) at return; 0 for the explicit and no-root paths
  int iterations = 0;
  bool no_root = false;
};

/// Solves r(D) = D - D_prev - dN[(1-theta) f_prev + theta f(D)] = 0 for the smallest
/// root in [D_prev, 1). Returns exactly 1 when no root exists there.
ImplicitUpdateResult update_fatigue_damage_implicit(const CohesivePointState& state_prev,
                                                    const EquivalentKinematics& kinematics,
                                                    double dN, double theta,
                                                    const FatigueProperties& fat);

enum class DamageBranch { unloading, static_loading, fatigue_loading };

struct TractionAndTangent {
  Vec3 traction = Vec3::Zero();
  Mat3 tangent = Mat3::Zero();
  CohesivePointState state_new;
  DamageBranch branch = DamageBranch::unloading;
  EquivalentKinematics kinematics;
  double d = 0.0;
  bool no_root = false;
};

TractionAndTangent update_traction(const Vec3& jump, const CohesivePointState& state_prev, double dN,
                                   double theta, const CohesiveProperties& props,
                                   const FatigueProperties& fat);

/// Material tangent dt/djump at the (already updated) state. The branch selects
/// dD/djump: frozen, chained through the static damage, or from the consistency
/// condition of the implicit update.
Mat3 consistent_tangent(const Vec3& jump, const CohesivePointState& state, DamageBranch branch,
                        double dN, double theta, const CohesiveProperties& props,
                        const FatigueProperties& fat);

/// Secant stiffness (I - dP)K.
Mat3 secant_stiffness(const Vec3& jump, double d, const CohesiveProperties& props);

}  // namespace fatiguecz
