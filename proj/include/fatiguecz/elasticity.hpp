#pragma once

#include <Eigen/Core>

namespace fatiguecz {

enum class Formulation { plane_stress, plane_strain };

/// Orthotropic ply. Axis 1 is the fiber direction, 2 the in-plane transverse
/// direction and 3 the out-of-plane direction. Moduli in MPa.
struct BulkMaterial {
  double E1 = 0.0;
  double E2 = 0.0;
  double E3 = 0.0;  // plane strain only
  double G12 = 0.0;
  double nu12 = 0.0;
  double nu13 = 0.0;  // plane strain only
  double nu23 = 0.0;  // plane strain only
  Formulation formulation = Formulation::plane_stress;
  double thickness = 1.0;   // out-of-plane size, mm
  int crack_material = -1;  // cohesive material of XFEM cracks, -1 = no cracking

  static BulkMaterial isotropic(double E, double nu, Formulation f, double thickness = 1.0);

  void validate() const;

  /// 3x3 Voigt stiffness (xx, yy, xy engineering shear) in material axes.
  Eigen::Matrix3d stiffness_material() const;
  /// Stiffness rotated to global axes for a fiber angle in degrees (from x, counter-clockwise).
  Eigen::Matrix3d stiffness(double fiber_angle_deg) const;
};

/// Unit vector along the fibers and the in-plane crack normal (perpendicular to them).
Eigen::Vector2d fiber_direction(double fiber_angle_deg);
Eigen::Vector2d crack_normal(double fiber_angle_deg);

}  // namespace fatiguecz
