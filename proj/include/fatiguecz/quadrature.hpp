#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace fatiguecz {

using Vec2 = Eigen::Vector2d;

struct QuadPoint1D {
  double xi;  // in [-1, 1]
  double w;
};

struct QuadPoint2D {
  Vec2 xi;
  double w;
};

/// Gauss-Legendre rule on [-1, 1] with n = 1, 2 or 3 points.
std::vector<QuadPoint1D> gauss_line(int n);

/// Closed Newton-Cotes rule on [-1, 1]; n = 2 (trapezoid) or 3 (Simpson).
std::vector<QuadPoint1D> newton_cotes_line(int n);

/// 2x2 Gauss on the reference square [-1, 1]^2.
std::vector<QuadPoint2D> gauss_quad_2x2();

/// Reference triangle (0,0)-(1,0)-(0,1): centroid rule (degree 1) or the
/// three-point interior rule (degree 2).
std::vector<QuadPoint2D> triangle_rule(int degree);

}  // namespace fatiguecz
