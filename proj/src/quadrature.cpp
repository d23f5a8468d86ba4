#include "fatiguecz/quadrature.hpp"

#include <cmath>

#include "fatiguecz/error.hpp"

namespace fatiguecz {

std::vector<QuadPoint1D> gauss_line(int n) {
  switch (n) {
    case 1:
      return {{0.0, 2.0}};
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      return {{-a, 1.0}, {a, 1.0}};
    }
    case 3: {
      const double a = std::sqrt(0.6);
      return {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
    }
    default:
      throw Error(ErrorCategory::invalid_property, "unsupported Gauss rule order");
  }
}

std::vector<QuadPoint1D> newton_cotes_line(int n) {
  switch (n) {
    case 2:
      return {{-1.0, 1.0}, {1.0, 1.0}};
    case 3:
      return {{-1.0, 1.0 / 3.0}, {0.0, 4.0 / 3.0}, {1.0, 1.0 / 3.0}};
    default:
      throw Error(ErrorCategory::invalid_property, "unsupported Newton-Cotes rule order");
  }
}

std::vector<QuadPoint2D> gauss_quad_2x2() {
  const double a = 1.0 / std::sqrt(3.0);
  return {{Vec2(-a, -a), 1.0}, {Vec2(a, -a), 1.0}, {Vec2(a, a), 1.0}, {Vec2(-a, a), 1.0}};
}

std::vector<QuadPoint2D> triangle_rule(int degree) {
  if (degree <= 1) return {{Vec2(1.0 / 3.0, 1.0 / 3.0), 0.5}};
  const double w = 1.0 / 6.0;
  return {{Vec2(1.0 / 6.0, 1.0 / 6.0), w}, {Vec2(2.0 / 3.0, 1.0 / 6.0), w},
          {Vec2(1.0 / 6.0, 2.0 / 3.0), w}};
}

}  // namespace fatiguecz
