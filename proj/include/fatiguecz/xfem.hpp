#pragma once

// Phantom-node cracks in bulk plies: insertion criterion, shifted cohesive law and
// crack placement with a minimum spacing.

#include <string>
#include <vector>

#include "fatiguecz/model.hpp"

namespace fatiguecz {

/// How the stress-based mode-mixity is formed from the bulk traction.
enum class MixityRule {
  linear,   // B = (t_sh/K_sh) / (<t_n>/K_n + t_sh/K_sh)
  squared,  // B = (t_sh^2/K_sh) / (<t_n>^2/K_n + t_sh^2/K_sh), matches the jump-based form
};

struct InsertionCandidate {
  int element = -1;
  Eigen::Vector3d sigma = Eigen::Vector3d::Zero();
  double f_index = 0.0;
  double sigma_eq = 0.0;
  double sigma_end = 0.0;
};

/// Fatigue insertion index sigma_eq / sigma_end for a bulk stress (Voigt xx, yy, xy)
/// and the unit crack normal.
double insertion_index(const Eigen::Vector3d& sigma, const Vec2& normal, const CohesiveProperties& props,
                       const FatigueProperties& fat, MixityRule rule = MixityRule::linear,
                       double* sigma_eq = nullptr, double* sigma_end = nullptr);

/// Jump offset K^-1 sigma n in the crack frame (normal, tangent, 0).
Vec3 compute_shift(const Eigen::Vector3d& sigma, const Vec2& normal, const CohesiveProperties& props);

/// Candidate data of every uncracked XFEM element.
std::vector<InsertionCandidate> insertion_candidates(const Model& model, MixityRule rule = MixityRule::linear);

struct InsertionOptions {
  double l_c = 0.0;
  int max_per_step = 100;
};

struct InsertionReport {
  std::vector<int> inserted;  // crack indices
  std::vector<std::string> diagnostics;
};

/// Inserts cracks for candidates with f_I > 1, highest index first.
InsertionReport insert_cracks(Model& model, std::vector<InsertionCandidate> candidates,
                              const InsertionOptions& opt, double N = 0.0, int step = 0);

/// Cuts element e by the line through `origin` with unit `normal`. Returns false
/// (with a reason) when the line does not split the element into two proper parts.
bool build_crack_geometry(const Mesh& mesh, int e, const Vec2& origin, const Vec2& normal,
                          CrackSegment& out, std::string& reason);

struct CrackedFields {
  std::array<Vec2, 2> points;       // physical segment integration points
  std::array<Vec3, 2> jump;         // N (u_A - u_B) in the crack frame, without shift
  std::array<Eigen::Vector2d, 2> u_a, u_b;
};

CrackedFields cracked_element_fields(const Model& model, int crack);

/// Displacement of the sub-element owning a physical point of a cracked element.
Eigen::Vector2d cracked_displacement(const Model& model, int crack, const Vec2& parent_xi, bool side_a);

}  // namespace fatiguecz
