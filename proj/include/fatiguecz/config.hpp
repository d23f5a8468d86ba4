#pragma once

// Analysis configuration: a YAML document with fixed sections. Unknown keys are
// rejected with file:line diagnostics. Units: N, mm, MPa, cycles.

#include <optional>
#include <string>
#include <vector>

#include "fatiguecz/analysis.hpp"
#include "fatiguecz/driver.hpp"
#include "fatiguecz/mesh.hpp"
#include "fatiguecz/model.hpp"

namespace fatiguecz {

struct NamedBulkMaterial {
  std::string name;
  BulkMaterial material;
  std::string crack_material;  // name of a cohesive material, empty = no cracking
};

struct NamedCohesiveMaterial {
  std::string name;
  bool shear_stiffness_given = false;  // stiffness is K_sh instead of K_n
  double stiffness = 0.0;
  double f_n = 0.0, f_sh = 0.0, G_Ic = 0.0, G_IIc = 0.0, eta_bk = 1.0;
  double thickness = 1.0;
  FatigueProperties fatigue;  // R comes from the load section

  CohesiveMaterial build(double R) const;
};

struct MeshConfig {
  std::string generator = "file";  // file, bar, dcb, open_hole
  std::string file;                // relative paths resolve against the config directory
  int bar_elements = 3;
  double bar_length = 1.0;
  double bar_height = 1.0;
  int bar_xfem_element = -1;
  double bar_fiber_angle = 0.0;
  DcbGeometry dcb;
  OpenHoleGeometry open_hole;
  std::string interface_material;  // assigned to all interfaces and surfaces of a generated mesh
};

struct BoundaryCondition {
  std::string group;
  int component = 0;
  double value = 0.0;  // displacement (mm) or total force (N) at maximum load
};

struct DcbConfig {
  double b = 25.0;
  double delta_cor = 0.0;
  std::vector<double> dn_values;  // step-size study
  double paris_da = 0.0;          // crack increment of the Paris rates, mm; 0 = per step
};

struct SnConfig {
  std::vector<double> factors;
};

struct TangentCheckConfig {
  int samples = 100;
  double tolerance = 1e-4;
};

struct OutputConfig {
  std::string dir = "out";
  int vtk_every = 0;  // 0 = no field output
};

struct AnalysisConfig {
  std::string source;  // path of the parsed file
  std::string name = "analysis";
  double theta = 0.5;
  MixityRule mixity = MixityRule::linear;
  unsigned seed = 12345;
  MeshConfig mesh;
  std::vector<NamedBulkMaterial> bulk_materials;
  std::vector<NamedCohesiveMaterial> cohesive_materials;
  std::vector<BoundaryCondition> displacements;
  std::vector<BoundaryCondition> forces;
  LoadProgram load;
  CycleStepController controller;
  OutputConfig output;
  std::optional<DcbConfig> dcb;
  std::optional<SnConfig> sn;
  std::optional<TangentCheckConfig> tangent_check;

  int cohesive_index(const std::string& name) const;
  void validate() const;
};

AnalysisConfig parse_config(const std::string& path);
AnalysisConfig parse_config_string(const std::string& text, const std::string& source = "<string>");
std::string serialize_config(const AnalysisConfig& cfg);

Mesh build_mesh(const AnalysisConfig& cfg);

/// Model with materials, mesh and boundary conditions; forces are scaled by `load_scale`.
Model build_model(const AnalysisConfig& cfg, double load_scale = 1.0);

}  // namespace fatiguecz
