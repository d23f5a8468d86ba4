#pragma once

// Finite-difference audit of the cohesive material tangent on randomized states
// of the static-loading, fatigue-loading and unloading branches.

#include <string>
#include <vector>

#include "fatiguecz/cohesive.hpp"

namespace fatiguecz {

struct TangentAuditOptions {
  int samples = 100;  // accepted states per branch and mode-mixity
  std::vector<double> mixities{0.0, 0.3, 0.7, 1.0};
  double theta = 0.5;
  unsigned seed = 12345;
  double loading_tolerance = 1e-4;
  double unloading_tolerance = 1e-12;
};

struct TangentAuditEntry {
  DamageBranch branch = DamageBranch::unloading;
  double B = 0.0;
  int samples = 0;
  double max_error = 0.0;  // relative Frobenius error against finite differences
  double tolerance = 0.0;
  bool pass() const { return samples > 0 && max_error <= tolerance; }
};

struct TangentAuditReport {
  std::vector<TangentAuditEntry> entries;
  bool pass() const;
  double max_error(DamageBranch branch) const;
};

/// Jump of equivalent opening Delta at mode-mixity B, with u_s2 = 0. At B = 1 the
/// normal jump is compressive so the sample stays off the Macaulay kink.
Vec3 jump_at_mixity(double Delta, double B, const CohesiveProperties& props);

/// Central differences of the traction, Richardson-extrapolated over h, h/2, h/4.
Mat3 fd_tangent(const Vec3& jump, const CohesivePointState& prev, double dN, double theta,
                const CohesiveProperties& props, const FatigueProperties& fat, const Vec3& h);

double relative_frobenius(const Mat3& a, const Mat3& ref);

TangentAuditReport audit_tangent(const CohesiveProperties& props, const FatigueProperties& fat,
                                 const TangentAuditOptions& options = {});

const char* branch_name(DamageBranch branch);

}  // namespace fatiguecz
