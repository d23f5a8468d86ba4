#include "fatiguecz/cohesive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fatiguecz {

namespace {

constexpr double kLocalTolerance = 1e-10;
constexpr int kLocalMaxIterations = 50;
constexpr int kNonProductiveLimit = 5;
constexpr double kDamageCeiling = 1.0 - 1e-12;
constexpr int kScanPoints = 400;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "cohesive property " << name << " must be positive and finite (got " << v << ")";
    throw invalid_property(os.str());
  }
}

double macaulay(double x) { return x > 0.0 ? x : 0.0; }

// Evaluates the fatigue residual of the trapezoidal update and its D-derivative at
// fixed jump.
struct FatigueResidual {
  const EquivalentKinematics& kin;
  FatigueParameters par;
  double D_prev;
  double rate_prev;
  double dN;
  double theta;
  double gamma;

  double rate(double D) const {
    const double star = D * (kin.Deltaf - kin.Delta0) + kin.Delta0;
    return damage_rate_cf20(kin.Delta, star, D, par.E, par.beta, par.p, gamma);
  }

  double value(double D) const {
    return D - D_prev - dN * ((1.0 - theta) * rate_prev + theta * rate(D));
  }

  double derivative(double D) const {
    const double f = rate(D);
    if (f == 0.0) return 1.0;
    const double star = D * (kin.Deltaf - kin.Delta0) + kin.Delta0;
    const double df_dD = (par.p - par.beta) / (1.0 - D) * f;
    const double df_dstar = -par.beta / star * f;
    return 1.0 - dN * theta * (df_dD + df_dstar * (kin.Deltaf - kin.Delta0));
  }
};

}  // namespace

double derive_shear_stiffness(double K_n, double f_n, double f_sh, double G_Ic, double G_IIc) {
  require_positive(K_n, "K_n");
  require_positive(f_n, "f_n");
  require_positive(f_sh, "f_sh");
  require_positive(G_Ic, "G_Ic");
  require_positive(G_IIc, "G_IIc");
  const double ratio = f_sh / f_n;
  return K_n * (G_Ic / G_IIc) * ratio * ratio;
}

CohesiveProperties CohesiveProperties::from_normal_stiffness(double K_n, double f_n, double f_sh,
                                                             double G_Ic, double G_IIc,
                                                             double eta_bk) {
  CohesiveProperties p;
  p.K_n = K_n;
  p.K_sh = derive_shear_stiffness(K_n, f_n, f_sh, G_Ic, G_IIc);
  p.f_n = f_n;
  p.f_sh = f_sh;
  p.G_Ic = G_Ic;
  p.G_IIc = G_IIc;
  p.eta_bk = eta_bk;
  p.validate();
  return p;
}

CohesiveProperties CohesiveProperties::from_shear_stiffness(double K_sh, double f_n, double f_sh,
                                                            double G_Ic, double G_IIc,
                                                            double eta_bk) {
  require_positive(K_sh, "K_sh");
  // Inverse of derive_shear_stiffness.
  const double K_n = K_sh / derive_shear_stiffness(1.0, f_n, f_sh, G_Ic, G_IIc);
  auto p = from_normal_stiffness(K_n, f_n, f_sh, G_Ic, G_IIc, eta_bk);
  p.K_sh = K_sh;
  return p;
}

void CohesiveProperties::validate() const {
  require_positive(K_n, "K_n");
  require_positive(K_sh, "K_sh");
  require_positive(f_n, "f_n");
  require_positive(f_sh, "f_sh");
  require_positive(G_Ic, "G_Ic");
  require_positive(G_IIc, "G_IIc");
  require_positive(eta_bk, "eta_bk");
  const double expected = derive_shear_stiffness(K_n, f_n, f_sh, G_Ic, G_IIc);
  if (std::abs(K_sh - expected) > 1e-9 * expected) {
    std::ostringstream os;
    os << "K_sh = " << K_sh << " is inconsistent with the dummy-stiffness constraint (expected "
       << expected << ")";
    throw invalid_property(os.str());
  }
}

double CohesiveProperties::critical_err(double B) const {
  return G_Ic + (G_IIc - G_Ic) * std::pow(std::clamp(B, 0.0, 1.0), eta_bk);
}

void FatigueProperties::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw invalid_property("fatigue property epsilon must lie in (0,1)");
  }
  if (!(gamma >= 1.0)) throw invalid_property("fatigue property gamma must be >= 1");
  if (!(R < 1.0)) throw invalid_property("stress ratio R must be < 1");
  if (!(eta_brittle >= 0.0) || !std::isfinite(eta_brittle)) {
    throw invalid_property("brittleness eta_brittle must be non-negative");
  }
  if (p_rule.kind == PRule::Kind::fixed && !(p_rule.value > -1.0)) {
    throw invalid_property("fixed exponent p must be > -1");
  }
}

double mode_mixity_from_jump(const Vec3& jump, double K_n, double K_sh, double B_fallback) {
  const double m = macaulay(jump[0]);
  const double ush2 = jump[1] * jump[1] + jump[2] * jump[2];
  const double den = K_n * m * m + K_sh * ush2;
  if (den < kDegenerateMixity) return B_fallback;
  return K_sh * ush2 / den;
}

EquivalentKinematics equivalent_kinematics(const Vec3& jump, const CohesiveProperties& props,
                                           double D, double B_fallback) {
  EquivalentKinematics k;
  const double m = macaulay(jump[0]);
  const double ush2 = jump[1] * jump[1] + jump[2] * jump[2];
  const double a = props.K_n * m * m;
  const double b = props.K_sh * ush2;
  k.degenerate_B = (a + b) < kDegenerateMixity;
  k.B = k.degenerate_B ? B_fallback : b / (a + b);
  const double q = props.K_n * a + props.K_sh * b;
  k.Delta = q > 0.0 ? (a + b) / std::sqrt(q) : 0.0;

  k.K_B = props.K_n * (1.0 - k.B) + k.B * props.K_sh;
  const double u0n = props.u0_n();
  const double ufn = props.uf_n();
  const double u0s = props.u0_sh();
  const double ufs = props.uf_sh();
  const double Bpow = std::pow(k.B, props.eta_bk);
  const double num0 =
      props.K_n * u0n * u0n + (props.K_sh * u0s * u0s - props.K_n * u0n * u0n) * Bpow;
  k.Delta0 = std::sqrt(num0 / k.K_B);
  const double numf =
      props.K_n * u0n * ufn + (props.K_sh * u0s * ufs - props.K_n * u0n * ufn) * Bpow;
  k.Deltaf = numf / (k.K_B * k.Delta0);
  k.DeltaStar = D * (k.Deltaf - k.Delta0) + k.Delta0;
  k.f_B = k.K_B * k.Delta0;
  const double d = stiffness_damage(D, k.Delta0, k.Deltaf);
  k.sigma_eq = (1.0 - d) * k.K_B * k.Delta;
  return k;
}

double static_damage(double Delta, double Delta0, double Deltaf) {
  return std::clamp((Delta - Delta0) / (Deltaf - Delta0), 0.0, 1.0);
}

namespace {

// 1 - d, evaluated without cancellation so tractions keep full relative precision near d = 1.
double stiffness_integrity(double D, double Delta0, double Deltaf) {
  if (D <= 0.0) return 1.0;
  if (D >= 1.0) return 1.0 - kMaxStiffnessDamage;
  const double g = (1.0 - D) * Delta0 / (D * Deltaf + (1.0 - D) * Delta0);
  return std::max(g, 1.0 - kMaxStiffnessDamage);
}

}  // namespace

double stiffness_damage(double D, double Delta0, double Deltaf) {
  if (D <= 0.0) return 0.0;
  if (D >= 1.0) return kMaxStiffnessDamage;
  return std::min(1.0 - stiffness_integrity(D, Delta0, Deltaf), kMaxStiffnessDamage);
}

double relative_endurance(double B, double R, double epsilon) {
  const double C_l = 1.0 - 0.42 * B;
  const double E = 2.0 * C_l * epsilon / (C_l * epsilon + 1.0 + R * (C_l * epsilon - 1.0));
  if (!(E > 0.0 && E < 1.0)) {
    std::ostringstream os;
    os << "relative endurance E = " << E << " outside (0,1) for B=" << B << ", R=" << R
       << ", epsilon=" << epsilon;
    throw invalid_property(os.str());
  }
  return E;
}

double sn_exponent(double E, double eta_brittle) {
  if (!(E > 0.0 && E < 1.0)) {
    throw invalid_property("S-N exponent requires 0 < E < 1");
  }
  return -7.0 * eta_brittle / std::log10(E);
}

double damage_rate_cf20(double Delta, double DeltaStar, double D, double E, double beta, double p,
                        double gamma) {
  if (Delta <= 0.0 || D >= 1.0) return 0.0;
  // Log form keeps large exponents finite until the final exp.
  const double log_f = -std::log(gamma) + (beta - p) * std::log1p(-D) - beta * std::log(E) -
                       std::log(p + 1.0) + beta * std::log(Delta / DeltaStar);
  return std::exp(log_f);
}

FatigueParameters fatigue_parameters(double B, const FatigueProperties& fat) {
  FatigueParameters par;
  par.C_l = 1.0 - 0.42 * B;
  par.E = relative_endurance(B, fat.R, fat.epsilon);
  par.beta = sn_exponent(par.E, fat.eta_brittle);
  par.p = fat.p_rule.p(par.beta);
  return par;
}

ImplicitUpdateResult update_fatigue_damage_implicit(const CohesivePointState& state_prev,
                                                    const EquivalentKinematics& kinematics,
                                                    double dN, double theta,
                                                    const FatigueProperties& fat) {
  ImplicitUpdateResult out;
  const double D_prev = state_prev.D;
  out.D = D_prev;
  if (dN <= 0.0 || D_prev >= 1.0) return out;

  const double explicit_part = dN * (1.0 - theta) * state_prev.rate_prev;
  if (theta <= 0.0 || kinematics.Delta <= 0.0) {
    // Rate vanishes at the new state (or is not sampled there): closed form.
    out.D = std::min(1.0, D_prev + explicit_part);
    out.no_root = out.D >= 1.0;
    return out;
  }

  const FatigueResidual res{kinematics, fatigue_parameters(kinematics.B, fat), D_prev,
                            state_prev.rate_prev, dN, theta, fat.gamma};

  double lo = D_prev;
  double hi = std::numeric_limits<double>::quiet_NaN();
  double D = D_prev;
  double r = res.value(D);
  if (r >= 0.0) {
    out.residual = std::abs(r);
    return out;
  }

  // One extra Newton step once converged pushes the root to machine precision, so
  // the tangent and finite-difference audits see a smooth D(jump).
  auto polish = [&](double x, double rx) {
    const double rp = res.derivative(x);
    if (rp > 0.0) {
      const double xn = x - rx / rp;
      if (xn >= D_prev && xn < 1.0) {
        const double rn = res.value(xn);
        if (std::abs(rn) <= std::abs(rx)) {
          out.D = xn;
          out.residual = std::abs(rn);
          return;
        }
      }
    }
    out.D = x;
    out.residual = std::abs(rx);
  };

  int nonproductive = 0;
  double prev_abs = std::abs(r);
  bool bracket_phase = false;
  for (int it = 1; it <= kLocalMaxIterations; ++it) {
    out.iterations = it;
    if (std::abs(r) < kLocalTolerance) {
      polish(D, r);
      return out;
    }
    const double rp = res.derivative(D);
    if (!(rp > 0.0)) {
      bracket_phase = true;
      break;
    }
    double Dn = D - r / rp;
    const double upper = std::isnan(hi) ? kDamageCeiling : hi;
    if (!(Dn > lo && Dn < upper)) {
      if (std::isnan(hi)) {
        bracket_phase = true;
        break;
      }
      Dn = 0.5 * (lo + hi);
    }
    D = Dn;
    r = res.value(D);
    if (r < 0.0) {
      lo = D;
    } else if (r > 0.0) {
      hi = D;
    }
    if (std::abs(r) >= prev_abs && ++nonproductive >= kNonProductiveLimit) {
      bracket_phase = true;
      break;
    }
    prev_abs = std::abs(r);
  }
  if (!bracket_phase && std::abs(r) < kLocalTolerance) {
    polish(D, r);
    return out;
  }

  if (std::isnan(hi)) {
    // Look for the first sign change on [lo, ceiling], clustered toward the ceiling
    // where the residual varies fastest.
    double prev_x = lo;
    for (int k = 1; k <= kScanPoints; ++k) {
      const double s = static_cast<double>(k) / kScanPoints;
      const double x = lo + (kDamageCeiling - lo) * (1.0 - std::pow(1.0 - s, 3));
      const double rx = res.value(x);
      if (rx >= 0.0) {
        hi = x;
        lo = prev_x;
        break;
      }
      prev_x = x;
    }
    if (std::isnan(hi)) {
      out.D = 1.0;
      out.no_root = true;
      out.residual = 0.0;
      return out;
    }
  }

  // Safeguarded Newton inside [lo, hi].
  D = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    r = res.value(D);
    ++out.iterations;
    if (std::abs(r) < kLocalTolerance) {
      polish(D, r);
      return out;
    }
    if (r < 0.0) {
      lo = D;
    } else {
      hi = D;
    }
    const double rp = res.derivative(D);
    double Dn = rp > 0.0 ? D - r / rp : 0.5 * (lo + hi);
    if (!(Dn > lo && Dn < hi)) Dn = 0.5 * (lo + hi);
    if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon()) {
      out.D = D;
      out.residual = std::abs(r);
      return out;
    }
    D = Dn;
  }
  std::ostringstream os;
  os << "implicit fatigue update did not converge (D_prev=" << D_prev << ", dN=" << dN
     << ", |r|=" << std::abs(r) << ")";
  throw Error(ErrorCategory::local_solver_failure, os.str());
}

Mat3 secant_stiffness(const Vec3& jump, double d, const CohesiveProperties& props) {
  const double P_nn = jump[0] > 0.0 ? 1.0 : 0.0;
  Mat3 S = Mat3::Zero();
  S(0, 0) = (1.0 - d * P_nn) * props.K_n;
  S(1, 1) = (1.0 - d) * props.K_sh;
  S(2, 2) = (1.0 - d) * props.K_sh;
  return S;
}

TractionAndTangent update_traction(const Vec3& jump, const CohesivePointState& state_prev, double dN,
                                   double theta, const CohesiveProperties& props,
                                   const FatigueProperties& fat) {
  TractionAndTangent out;
  auto kin = equivalent_kinematics(jump, props, state_prev.D, state_prev.B_last);
  const double Ds = static_damage(kin.Delta, kin.Delta0, kin.Deltaf);

  double Df = state_prev.D;
  double residual = 0.0;
  if (dN > 0.0) {
    const auto upd = update_fatigue_damage_implicit(state_prev, kin, dN, theta, fat);
    Df = upd.D;
    residual = upd.residual;
    out.no_root = upd.no_root;
  }

  const double D = std::max({state_prev.D, Ds, Df});
  if (D > state_prev.D) {
    out.branch = (Ds >= Df) ? DamageBranch::static_loading : DamageBranch::fatigue_loading;
  } else {
    out.branch = DamageBranch::unloading;
  }
  if (out.branch == DamageBranch::fatigue_loading && out.no_root) {
    // D = 1 from the no-root fallback carries no dependence on the jump.
    out.branch = DamageBranch::unloading;
  }

  kin.DeltaStar = D * (kin.Deltaf - kin.Delta0) + kin.Delta0;
  out.d = stiffness_damage(D, kin.Delta0, kin.Deltaf);
  kin.sigma_eq = (1.0 - out.d) * kin.K_B * kin.Delta;

  const double g = stiffness_integrity(D, kin.Delta0, kin.Deltaf);
  out.traction = Vec3((jump[0] > 0.0 ? g : 1.0) * props.K_n * jump[0], g * props.K_sh * jump[1],
                      g * props.K_sh * jump[2]);

  auto& s = out.state_new;
  s.D = D;
  s.jump_prev = jump;
  s.B_last = kin.degenerate_B ? state_prev.B_last : kin.B;
  s.local_residual = out.branch == DamageBranch::fatigue_loading ? residual : 0.0;
  if (D < 1.0 && kin.Delta > 0.0) {
    const auto par = fatigue_parameters(kin.B, fat);
    s.rate_prev = damage_rate_cf20(kin.Delta, kin.DeltaStar, D, par.E, par.beta, par.p, fat.gamma);
  } else {
    s.rate_prev = 0.0;
  }
  out.kinematics = kin;
  out.tangent = consistent_tangent(jump, s, out.branch, dN, theta, props, fat);
  return out;
}

Mat3 consistent_tangent(const Vec3& jump, const CohesivePointState& state, DamageBranch branch,
                        double dN, double theta, const CohesiveProperties& props,
                        const FatigueProperties& fat) {
  const double D = state.D;
  const auto kin = equivalent_kinematics(jump, props, D, state.B_last);
  const double d = stiffness_damage(D, kin.Delta0, kin.Deltaf);
  const Mat3 secant = secant_stiffness(jump, d, props);
  if (D <= 0.0 && branch == DamageBranch::unloading) return secant;
  if (d >= kMaxStiffnessDamage) return secant;

  const double Kn = props.K_n;
  const double Ks = props.K_sh;
  const double m = macaulay(jump[0]);
  const double us1 = jump[1];
  const double us2 = jump[2];
  const double ush2 = us1 * us1 + us2 * us2;
  const double den = Kn * m * m + Ks * ush2;

  Vec3 dB_du = Vec3::Zero();
  if (!kin.degenerate_B) {
    dB_du << -ush2 * m, us1 * m * m, us2 * m * m;
    dB_du *= 2.0 * Kn * Ks / (den * den);
  }

  const double B = kin.B;
  const double KB = kin.K_B;
  const double D0 = kin.Delta0;
  const double Df = kin.Deltaf;
  const double eta = props.eta_bk;
  const double Bc = std::clamp(B, 1e-12, 1.0 - 1e-12);
  const double Bpow = eta * std::pow(Bc, eta - 1.0);

  const double u0n = props.u0_n();
  const double ufn = props.uf_n();
  const double u0s = props.u0_sh();
  const double ufs = props.uf_sh();
  const double C0 = Ks * u0s * u0s - Kn * u0n * u0n;
  const double Cf = Ks * u0s * ufs - Kn * u0n * ufn;

  const double dD0_dB = C0 * Bpow / (2.0 * D0 * KB);
  const double dD0_dKB = -D0 / (2.0 * KB);
  const double dKB_dB = Ks - Kn;
  const double dDf_dB = Cf * Bpow / (KB * D0);
  const double dDf_dKB = -Df / KB;
  const double dDf_dD0 = -Df / D0;

  const Vec3 dD0_du = (dD0_dB + dD0_dKB * dKB_dB) * dB_du;
  const Vec3 dDf_du = (dDf_dB + dDf_dKB * dKB_dB) * dB_du + dDf_dD0 * dD0_du;

  const double S = D * Df + (1.0 - D) * D0;
  const double dd_dD = D0 * Df / (S * S);
  const double dd_dD0 = (D - 1.0) * D * Df / (S * S);
  const double dd_dDf = (1.0 - D) * D * D0 / (S * S);

  Vec3 dDelta_du = Vec3::Zero();
  const double q = Kn * Kn * m * m + Ks * Ks * ush2;
  if (q > 0.0) {
    const double shear_factor = 2.0 * Kn * Kn * m * m - Kn * Ks * m * m + Ks * Ks * ush2;
    dDelta_du << Kn * m * (Kn * Kn * m * m + (2.0 * Ks * Ks - Kn * Ks) * ush2),
        Ks * us1 * shear_factor, Ks * us2 * shear_factor;
    dDelta_du /= std::pow(q, 1.5);
  }

  Vec3 dDam_du = Vec3::Zero();
  if (branch == DamageBranch::static_loading) {
    const double span = Df - D0;
    dDam_du = dDelta_du / span + (kin.Delta - Df) / (span * span) * dD0_du +
              (D0 - kin.Delta) / (span * span) * dDf_du;
  } else if (branch == DamageBranch::fatigue_loading && dN > 0.0 && theta > 0.0) {
    const auto par = fatigue_parameters(B, fat);
    const double star = kin.DeltaStar;
    const double f = damage_rate_cf20(kin.Delta, star, D, par.E, par.beta, par.p, fat.gamma);
    if (f > 0.0) {
      const double beta = par.beta;
      const double p = par.p;
      const double E = par.E;
      const double df_dDelta = beta / kin.Delta * f;
      const double df_dstar = -beta / star * f;
      const double df_dD = (p - beta) / (1.0 - D) * f;
      const double df_dE = -beta / E * f;
      const double df_dbeta = (std::log(kin.Delta / star) + std::log1p(-D) - std::log(E)) * f;
      const double df_dp = -f / (p + 1.0) * (1.0 + (p + 1.0) * std::log1p(-D));
      const double R = fat.R;
      const double eps = fat.epsilon;
      const double Cl = par.C_l;
      const double g = Cl * eps * (R + 1.0) - R + 1.0;
      const double dE_dCl = 2.0 * eps * (1.0 - R) / (g * g);
      const double dCl_dB = -0.42;
      const double lnE = std::log(E);
      const double dbeta_dE = 7.0 * fat.eta_brittle * std::log(10.0) / (lnE * lnE * E);
      const double dp_dbeta = fat.p_rule.dp_dbeta();

      const double dr_dD = 1.0 - dN * theta * (df_dD + df_dstar * (Df - D0));
      const Vec3 dstar_du = (1.0 - D) * dD0_du + D * dDf_du;
      const double sumP = (df_dE + (df_dbeta + df_dp * dp_dbeta) * dbeta_dE) * dE_dCl * dCl_dB;
      const Vec3 dr_du = -dN * theta * (df_dDelta * dDelta_du + df_dstar * dstar_du + sumP * dB_du);
      dDam_du = -dr_du / dr_dD;
    }
  }

  const Vec3 dd_du = dd_dD * dDam_du + dd_dD0 * dD0_du + dd_dDf * dDf_du;
  const Vec3 PKu(Kn * m, Ks * us1, Ks * us2);
  return secant - PKu * dd_du.transpose();
}

}  // namespace fatiguecz
