#include "fatiguecz/tangent_audit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fatiguecz {

const char* branch_name(DamageBranch branch) {
  switch (branch) {
    case DamageBranch::unloading: return "unloading";
    case DamageBranch::static_loading: return "static";
    case DamageBranch::fatigue_loading: return "fatigue";
  }
  return "unknown";
}

bool TangentAuditReport::pass() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass(); });
}

double TangentAuditReport::max_error(DamageBranch branch) const {
  double m = 0.0;
  for (const auto& e : entries)
    if (e.branch == branch) m = std::max(m, e.max_error);
  return m;
}

Vec3 jump_at_mixity(double Delta, double B, const CohesiveProperties& p) {
  if (B >= 1.0) return Vec3(-0.5 * Delta, Delta, 0.0);
  // Direction (1, c) with K_sh c^2 / (K_n + K_sh c^2) = B, scaled to the opening Delta.
  const double c = std::sqrt(B * p.K_n / ((1.0 - B) * p.K_sh));
  const double a = p.K_n, b = p.K_sh * c * c;
  const double unit = (a + b) / std::sqrt(p.K_n * a + p.K_sh * b);
  return Vec3(1.0, c, 0.0) * (Delta / unit);
}

Mat3 fd_tangent(const Vec3& u, const CohesivePointState& prev, double dN, double theta,
                const CohesiveProperties& props, const FatigueProperties& fat, const Vec3& h) {
  auto central = [&](int j, double step) {
    Vec3 up = u, um = u;
    up[j] += step;
    um[j] -= step;
    return Vec3((update_traction(up, prev, dN, theta, props, fat).traction -
                 update_traction(um, prev, dN, theta, props, fat).traction) /
                (2.0 * step));
  };
  // Richardson table on the central difference, whose error expands in even powers of h.
  constexpr int levels = 3;
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 T[levels];
    double step = h[j];
    for (int k = 0; k < levels; ++k, step *= 0.5) {
      T[k] = central(j, step);
      double f = 4.0;
      for (int m = k - 1; m >= 0; --m, f *= 4.0) T[m] = (f * T[m + 1] - T[m]) / (f - 1.0);
    }
    J.col(j) = T[0];
  }
  return J;
}

double relative_frobenius(const Mat3& a, const Mat3& ref) { return (a - ref).norm() / ref.norm(); }

namespace {

// True when every finite-difference evaluation stays on the sample's branch.
bool same_branch(const Vec3& u, const CohesivePointState& s, double dN, double theta,
                 const CohesiveProperties& p, const FatigueProperties& fat, const Vec3& h, DamageBranch branch) {
  for (int j = 0; j < 3; ++j)
    for (double sign : {-1.0, 1.0}) {
      Vec3 v = u;
      v[j] += sign * h[j];
      const auto tt = update_traction(v, s, dN, theta, p, fat);
      if (tt.branch != branch || tt.no_root) return false;
    }
  return true;
}

}  // namespace

TangentAuditReport audit_tangent(const CohesiveProperties& p, const FatigueProperties& fat,
                                 const TangentAuditOptions& opt) {
  TangentAuditReport report;
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const DamageBranch branches[] = {DamageBranch::static_loading, DamageBranch::fatigue_loading,
                                   DamageBranch::unloading};
  for (DamageBranch branch : branches) {
    for (double B : opt.mixities) {
      TangentAuditEntry entry;
      entry.branch = branch;
      entry.B = B;
      entry.tolerance = branch == DamageBranch::unloading ? opt.unloading_tolerance : opt.loading_tolerance;
      for (int attempt = 0; entry.samples < opt.samples && attempt < 50 * opt.samples; ++attempt) {
        CohesivePointState s;
        s.D = branch == DamageBranch::unloading ? 0.05 + 0.85 * U(gen) : 0.9 * U(gen);
        s.B_last = B;
        const auto k0 = equivalent_kinematics(jump_at_mixity(1.0, B, p), p, s.D);
        double Delta = 0.0, dN = 0.0, h_rel = 1e-5;
        switch (branch) {
          case DamageBranch::static_loading:
            Delta = k0.DeltaStar + (k0.Deltaf - k0.DeltaStar) * (0.05 + 0.9 * U(gen));
            break;
          case DamageBranch::fatigue_loading:
            Delta = k0.DeltaStar * (0.5 + 0.45 * U(gen));
            break;
          case DamageBranch::unloading:
            Delta = k0.DeltaStar * (0.2 + 0.7 * U(gen));
            h_rel = 5e-2;
            break;
        }
        const Vec3 u = jump_at_mixity(Delta, B, p);
        if (branch == DamageBranch::fatigue_loading) {
          const auto kin = equivalent_kinematics(u, p, s.D);
          const auto par = fatigue_parameters(kin.B, fat);
          s.rate_prev = damage_rate_cf20(kin.Delta, kin.DeltaStar, s.D, par.E, par.beta, par.p, fat.gamma);
          if (!(s.rate_prev > 0.0)) continue;
          dN = 0.05 * (1.0 - s.D) / s.rate_prev * (0.1 + 0.9 * U(gen));
        }
        const auto tt = update_traction(u, s, dN, opt.theta, p, fat);
        if (tt.branch != branch || tt.no_root) continue;
        const Vec3 h = Vec3::Constant(h_rel * u.norm());
        if (!same_branch(u, s, dN, opt.theta, p, fat, h, branch)) continue;
        const Mat3 fd = fd_tangent(u, s, dN, opt.theta, p, fat, h);
        entry.max_error = std::max(entry.max_error, relative_frobenius(tt.tangent, fd));
        ++entry.samples;
      }
      report.entries.push_back(entry);
    }
  }
  return report;
}

}  // namespace fatiguecz
