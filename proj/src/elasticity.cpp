#include "fatiguecz/elasticity.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "fatiguecz/error.hpp"

namespace fatiguecz {

BulkMaterial BulkMaterial::isotropic(double E, double nu, Formulation f, double thickness) {
  BulkMaterial m;
  m.E1 = m.E2 = m.E3 = E;
  m.nu12 = m.nu13 = m.nu23 = nu;
  m.G12 = E / (2.0 * (1.0 + nu));
  m.formulation = f;
  m.thickness = thickness;
  return m;
}

void BulkMaterial::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "bulk property " << name << " must be positive (got " << v << ")";
      throw invalid_property(os.str());
    }
  };
  positive(E1, "E1");
  positive(E2, "E2");
  positive(G12, "G12");
  positive(thickness, "thickness");
  if (formulation == Formulation::plane_strain) positive(E3, "E3");
  const Eigen::Matrix3d C = stiffness_material();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(C);
  if (!C.allFinite() || es.eigenvalues().minCoeff() <= 0.0)
    throw invalid_property("bulk elasticity matrix is not positive definite");
}

Eigen::Matrix3d BulkMaterial::stiffness_material() const {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  if (formulation == Formulation::plane_stress) {
    Eigen::Matrix2d S;
    S << 1.0 / E1, -nu12 / E1, -nu12 / E1, 1.0 / E2;
    C.topLeftCorner<2, 2>() = S.inverse();
  } else {
    Eigen::Matrix3d S;
    S << 1.0 / E1, -nu12 / E1, -nu13 / E1,
         -nu12 / E1, 1.0 / E2, -nu23 / E2,
         -nu13 / E1, -nu23 / E2, 1.0 / E3;
    C.topLeftCorner<2, 2>() = S.inverse().topLeftCorner<2, 2>();
  }
  C(2, 2) = G12;
  return C;
}

Eigen::Matrix3d BulkMaterial::stiffness(double fiber_angle_deg) const {
  const double a = fiber_angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  // Engineering-strain transformation global -> material axes.
  Eigen::Matrix3d T;
  T << c * c, s * s, c * s,
       s * s, c * c, -c * s,
       -2.0 * c * s, 2.0 * c * s, c * c - s * s;
  return T.transpose() * stiffness_material() * T;
}

Eigen::Vector2d fiber_direction(double fiber_angle_deg) {
  const double a = fiber_angle_deg * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

Eigen::Vector2d crack_normal(double fiber_angle_deg) {
  const Eigen::Vector2d f = fiber_direction(fiber_angle_deg);
  return {-f.y(), f.x()};
}

}  // namespace fatiguecz
