#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fatiguecz/cohesive.hpp"
#include "fatiguecz/elasticity.hpp"
#include "fatiguecz/mesh.hpp"

namespace fatiguecz {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct CohesiveMaterial {
  CohesiveProperties props;
  FatigueProperties fatigue;
  double thickness = 1.0;  // out-of-plane width of line interfaces, mm
};

enum class PointOwner { interface, surface, crack };

/// One cohesive integration point with its committed and trial history.
struct CohesivePoint {
  PointOwner owner = PointOwner::interface;
  int owner_index = 0;  // interface, surface or crack index
  int local = 0;        // point number inside the owner
  int material = 0;
  double weight = 0.0;  // J * w * thickness, mm^2
  Vec3 shift = Vec3::Zero();
  CohesivePointState state;
  CohesivePointState trial;
  Vec3 traction = Vec3::Zero();  // trial traction in the crack frame
  DamageBranch branch = DamageBranch::unloading;
  bool no_root = false;
};

/// Phantom-node crack through one bulk element.
struct CrackSegment {
  int element = -1;
  int crack_id = -1;
  int ply = 0;
  Vec2 normal = Vec2::Zero();  // fixed, points from the B side to the A side
  Vec2 origin = Vec2::Zero();  // a point on the crack line
  Vec2 x0 = Vec2::Zero(), x1 = Vec2::Zero();    // physical end points on the element edges
  Vec2 xi0 = Vec2::Zero(), xi1 = Vec2::Zero();  // the same points in parent coordinates
  std::array<int, 4> nodes_a{-1, -1, -1, -1};   // sub-element on the positive side
  std::array<int, 4> nodes_b{-1, -1, -1, -1};   // sub-element on the negative side
  std::vector<std::array<Vec2, 3>> tris_a, tris_b;  // parent-space sub-domains
  std::array<int, 2> points{-1, -1};                // cohesive points on the segment
  Vec3 shift = Vec3::Zero();
  double f_index = 0.0;
  double N_inserted = 0.0;
  int step_inserted = 0;

  Vec2 tangent() const { return {normal.y(), -normal.x()}; }
};

/// Prescribed value per DOF at load factor 1.
struct Prescribed {
  int dof = -1;
  double value = 0.0;
};

struct SolveOptions {
  int max_iterations = 10;
  double tol_rel = 1e-6;
  double tol_abs = 1e-8;
  int line_search = 0;  // max step halvings when an iterate increases the residual
};

struct SolveResult {
  bool converged = false;
  int iterations = 0;  // number of linear solves
  double residual = 0.0;
  double tolerance = 0.0;
  std::string message;
  std::vector<double> history;  // free residual norm per evaluation
};

struct Assembly {
  Vector f_int;
  Vector residual;  // f_int - load_factor * f_ext
  SparseMatrix K;
};

class LinearSolver;
struct AssemblyCache;

class Model {
 public:
  Model();
  ~Model();
  Model(const Model&);
  Model& operator=(const Model&);

  Mesh mesh;
  std::vector<BulkMaterial> bulk_materials;
  std::vector<CohesiveMaterial> cohesive_materials;
  double theta = 0.5;
  int threads = 1;

  // Loads at load factor 1.
  std::vector<Prescribed> prescribed;
  std::vector<Prescribed> forces;

  // State.
  Vector u;
  std::vector<CohesivePoint> points;
  std::vector<std::array<int, 3>> interface_points;
  std::vector<std::array<int, 3>> surface_points;
  std::vector<CrackSegment> cracks;
  std::vector<int> element_crack;  // crack index per bulk element or -1
  std::map<std::pair<int, int>, int> phantom_nodes;  // (crack id, real node) -> node
  int num_real_nodes = 0;
  int next_crack_id = 0;
  double reference_force = 0.0;
  double load_factor = 0.0;
  Vector f_int;  // internal force at the last evaluation

  /// Sets up integration points and DOF vectors; call after mesh and materials are set.
  void initialize();

  int num_dofs() const { return 2 * static_cast<int>(mesh.nodes.size()); }
  void prescribe(const std::string& group, int component, double value);
  void apply_force(const std::string& group, int component, double total);

  /// Internal force, residual and tangent at the current displacement. Evaluates
  /// trial states of all cohesive points from the committed ones with dN cycles.
  Assembly assemble(double load_factor, double dN);

  /// Trial -> committed for all cohesive points.
  void commit();

  /// Bulk stress (Voigt xx, yy, xy) at the element centroid.
  Eigen::Vector3d element_stress(int e) const;

  /// External force vector at load factor 1.
  Vector external_force() const;
  std::vector<bool> constrained_mask() const;

  /// Displacement jump in the crack frame of a cohesive point, including any shift.
  Vec3 point_jump(int point) const;

  int add_phantom_node(int crack_id, int node);
  void invalidate_pattern();

  std::unique_ptr<LinearSolver> solver;
  std::unique_ptr<AssemblyCache> assembly_cache;  // element stiffness and sparsity pattern
  long topology_version = 0;
};

SolveResult newton_solve(Model& model, double load_factor, double dN, const SolveOptions& opt);

/// Sum of internal forces on the constrained DOFs (component 0 = x, 1 = y) of a group.
double reaction_force(const Model& model, const std::string& group, int component);

/// Dissipated energy estimate sum(w * D * G_c(B)) over all cohesive points, N*mm.
double dissipated_energy(const Model& model);

int configured_threads();

}  // namespace fatiguecz
