#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fatiguecz/quadrature.hpp"

namespace fatiguecz {

enum class BulkType { tri3, quad4 };

struct BulkElement {
  BulkType type = BulkType::tri3;
  std::array<int, 4> nodes{-1, -1, -1, -1};  // counter-clockwise
  int material = 0;
  double angle = 0.0;  // fiber angle, degrees
  int ply = 0;
  bool xfem = false;

  int num_nodes() const { return type == BulkType::tri3 ? 3 : 4; }
};

/// Zero-thickness line element. (a, b) is the lower edge, (c, d) the upper edge with
/// c on a and d on b. The normal points from the lower to the upper side.
struct InterfaceElement {
  std::array<int, 4> nodes{-1, -1, -1, -1};
  int material = 0;
};

/// Ply-to-ply interface over a triangle: nodes 0-2 on the lower ply, 3-5 the
/// coincident nodes of the upper ply. The in-plane jump is pure shear.
struct SurfaceInterface {
  std::array<int, 6> nodes{-1, -1, -1, -1, -1, -1};
  int material = 0;
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<BulkElement> elements;
  std::vector<InterfaceElement> interfaces;
  std::vector<SurfaceInterface> surfaces;
  std::map<std::string, std::vector<int>> groups;

  /// Index ranges, positive element areas, coincident interface pairs.
  void validate() const;

  const std::vector<int>& group(const std::string& name) const;
  double element_area(int e) const;
  Vec2 element_centroid(int e) const;
};

Mesh read_mesh(const std::string& path);
Mesh parse_mesh(const std::string& text, const std::string& source = "<string>");
void write_mesh(const Mesh& mesh, const std::string& path);
std::string format_mesh(const Mesh& mesh);

/// Straight bar of n quads (length x height each) along x. Groups: left, right,
/// origin (lower-left node). Only element `xfem_element` is XFEM-enabled.
Mesh make_bar_mesh(int n, double length, double height, int xfem_element, double fiber_angle);

struct DcbGeometry {
  double length = 100.0;   // mm
  double h = 1.472;        // arm thickness, mm
  double a0 = 51.2;        // initial crack length, mm
  int layers = 4;          // elements across each arm (even)
  double fine_size = 0.2;  // interface element length in the refined zone, mm
  double fine_length = 30.0;
  double coarse_size = 1.0;
};

/// Two arms joined by interface elements over [a0, length]. Groups: load_top and
/// load_bottom (mid-height node of each arm at x = 0).
Mesh make_dcb_mesh(const DcbGeometry& g);

struct OpenHoleGeometry {
  double length = 38.0;
  double width = 16.0;
  double hole_diameter = 6.4;
  int n_circ = 12;  // divisions per quarter of the hole
  int n_radial = 6;
  int n_side = 12;  // divisions along x of each side block
  double angle_lower = 45.0;
  double angle_upper = -45.0;
};

/// Two coincident triangulated plies tied by surface interfaces. Groups: left,
/// right (both plies), hole.
Mesh make_open_hole_mesh(const OpenHoleGeometry& g);

}  // namespace fatiguecz
