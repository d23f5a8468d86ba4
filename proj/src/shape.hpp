#pragma once

// Linear triangle and bilinear quadrilateral shape functions on their parent domains.

#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

#include "fatiguecz/mesh.hpp"

namespace fatiguecz::detail {

struct Shape {
  Eigen::Vector4d N = Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 4, 2> dN = Eigen::Matrix<double, 4, 2>::Zero();  // d/dxi, d/deta
};

inline Shape shape(BulkType type, const Vec2& xi) {
  Shape s;
  if (type == BulkType::tri3) {
    s.N << 1.0 - xi.x() - xi.y(), xi.x(), xi.y(), 0.0;
    s.dN << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  } else {
    static const double sx[4] = {-1, 1, 1, -1}, sy[4] = {-1, -1, 1, 1};
    for (int i = 0; i < 4; ++i) {
      s.N[i] = 0.25 * (1.0 + sx[i] * xi.x()) * (1.0 + sy[i] * xi.y());
      s.dN(i, 0) = 0.25 * sx[i] * (1.0 + sy[i] * xi.y());
      s.dN(i, 1) = 0.25 * sy[i] * (1.0 + sx[i] * xi.x());
    }
  }
  return s;
}

/// Parent coordinates of the element vertices.
inline Vec2 parent_vertex(BulkType type, int i) {
  if (type == BulkType::tri3) {
    static const Vec2 v[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    return v[i];
  }
  static const Vec2 v[4] = {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
  return v[i];
}

inline Vec2 parent_centroid(BulkType type) {
  return type == BulkType::tri3 ? Vec2(1.0 / 3.0, 1.0 / 3.0) : Vec2(0.0, 0.0);
}

/// Position in [0, 1] of the k-th two-point Gauss point along a crack segment.
inline double segment_gauss_position(int k) {
  return 0.5 * (1.0 + (k == 0 ? -1.0 : 1.0) / std::sqrt(3.0));
}

/// Strain-displacement matrix (3 x 2n) and Jacobian determinant at xi.
struct BMatrix {
  Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
  double detJ = 0.0;
  Eigen::Vector4d N = Eigen::Vector4d::Zero();
};

inline BMatrix b_matrix(const BulkElement& el, const std::vector<Vec2>& nodes, const Vec2& xi) {
  const Shape s = shape(el.type, xi);
  const int n = el.num_nodes();
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) J += nodes[el.nodes[i]] * s.dN.row(i);
  BMatrix out;
  out.detJ = J.determinant();
  out.N = s.N;
  const Eigen::Matrix2d Jinv = J.inverse();
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVector2d g = s.dN.row(i) * Jinv;
    out.B(0, 2 * i) = g[0];
    out.B(1, 2 * i + 1) = g[1];
    out.B(2, 2 * i) = g[1];
    out.B(2, 2 * i + 1) = g[0];
  }
  return out;
}

}  // namespace fatiguecz::detail
