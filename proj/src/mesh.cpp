#include "fatiguecz/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "fatiguecz/error.hpp"

namespace fatiguecz {

namespace {

double signed_area(const std::vector<Vec2>& nodes, const BulkElement& el) {
  double a = 0.0;
  const int n = el.num_nodes();
  for (int i = 0; i < n; ++i) {
    const Vec2& p = nodes[el.nodes[i]];
    const Vec2& q = nodes[el.nodes[(i + 1) % n]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

std::string topology_message(const std::string& what, size_t index) {
  std::ostringstream os;
  os << what << " " << index;
  return os.str();
}

// Deduplicating node builder on a 1e-9 mm grid.
class NodeBuilder {
 public:
  explicit NodeBuilder(std::vector<Vec2>& nodes) : nodes_(nodes) {}
  int add(double x, double y) {
    const auto key = std::make_pair(std::llround(x * 1e9), std::llround(y * 1e9));
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    nodes_.emplace_back(x, y);
    const int id = static_cast<int>(nodes_.size()) - 1;
    index_.emplace(key, id);
    return id;
  }

 private:
  std::vector<Vec2>& nodes_;
  std::map<std::pair<long long, long long>, int> index_;
};

}  // namespace

const std::vector<int>& Mesh::group(const std::string& name) const {
  auto it = groups.find(name);
  if (it == groups.end()) throw Error(ErrorCategory::lookup, "unknown node group '" + name + "'");
  return it->second;
}

double Mesh::element_area(int e) const { return signed_area(nodes, elements[e]); }

Vec2 Mesh::element_centroid(int e) const {
  const auto& el = elements[e];
  if (el.type == BulkType::tri3)
    return (nodes[el.nodes[0]] + nodes[el.nodes[1]] + nodes[el.nodes[2]]) / 3.0;
  // Area centroid of the quadrilateral from its two triangles.
  const Vec2 &a = nodes[el.nodes[0]], &b = nodes[el.nodes[1]], &c = nodes[el.nodes[2]],
             &d = nodes[el.nodes[3]];
  auto tri = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return 0.5 * ((q - p).x() * (r - p).y() - (q - p).y() * (r - p).x());
  };
  const double A1 = tri(a, b, c), A2 = tri(a, c, d);
  return (A1 * (a + b + c) / 3.0 + A2 * (a + c + d) / 3.0) / (A1 + A2);
}

void Mesh::validate() const {
  const int n = static_cast<int>(nodes.size());
  auto in_range = [n](int id) { return id >= 0 && id < n; };
  for (size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    for (int i = 0; i < el.num_nodes(); ++i)
      if (!in_range(el.nodes[i]))
        throw Error(ErrorCategory::topology, topology_message("node index out of range in element", e));
    if (signed_area(nodes, el) <= 0.0)
      throw Error(ErrorCategory::topology,
                  topology_message("non-positive area (clockwise ordering?) in element", e));
  }
  for (size_t e = 0; e < interfaces.size(); ++e) {
    const auto& ie = interfaces[e];
    for (int id : ie.nodes)
      if (!in_range(id))
        throw Error(ErrorCategory::topology, topology_message("node index out of range in interface", e));
    if ((nodes[ie.nodes[0]] - nodes[ie.nodes[2]]).norm() > 1e-9 ||
        (nodes[ie.nodes[1]] - nodes[ie.nodes[3]]).norm() > 1e-9)
      throw Error(ErrorCategory::topology, topology_message("non-coincident node pair in interface", e));
    if ((nodes[ie.nodes[1]] - nodes[ie.nodes[0]]).norm() <= 0.0)
      throw Error(ErrorCategory::topology, topology_message("zero-length interface", e));
  }
  for (size_t e = 0; e < surfaces.size(); ++e) {
    const auto& s = surfaces[e];
    for (int id : s.nodes)
      if (!in_range(id))
        throw Error(ErrorCategory::topology, topology_message("node index out of range in surface", e));
    for (int k = 0; k < 3; ++k)
      if ((nodes[s.nodes[k]] - nodes[s.nodes[k + 3]]).norm() > 1e-9)
        throw Error(ErrorCategory::topology, topology_message("non-coincident node pair in surface", e));
  }
  for (const auto& [name, ids] : groups)
    for (int id : ids)
      if (!in_range(id)) throw Error(ErrorCategory::topology, "node index out of range in group " + name);
}

// Grammar (one record per line, '#' starts a comment):
//   nodes <n>          followed by n lines "x y"
//   elements <m>       followed by m lines "tri3|quad4 material angle ply xfem n..."
//   interfaces <k>     followed by k lines "material a b c d"
//   surfaces <k>       followed by k lines "material n0 .. n5"
//   group <name> <k>   followed by k node ids (any line layout)
Mesh parse_mesh(const std::string& text, const std::string& source) {
  Mesh mesh;
  std::vector<std::pair<int, std::string>> lines;
  {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      lines.emplace_back(no, line);
    }
  }
  size_t cur = 0;
  auto fail = [&](int line_no, const std::string& msg) -> Error {
    std::ostringstream os;
    os << source << ":" << line_no << ": " << msg;
    return Error(ErrorCategory::parse, os.str());
  };
  auto next = [&](const char* what) -> std::pair<int, std::istringstream> {
    if (cur >= lines.size()) {
      const int last = lines.empty() ? 0 : lines.back().first;
      throw fail(last, std::string("unexpected end of file, expected ") + what);
    }
    auto& [no, l] = lines[cur++];
    return {no, std::istringstream(l)};
  };
  auto count_of = [&](std::istringstream& in, int no) {
    long long n = -1;
    if (!(in >> n) || n < 0) throw fail(no, "expected a non-negative count");
    return static_cast<size_t>(n);
  };

  while (cur < lines.size()) {
    auto [no, in] = next("section");
    std::string key;
    in >> key;
    if (key == "nodes") {
      const size_t n = count_of(in, no);
      for (size_t i = 0; i < n; ++i) {
        auto [ln, row] = next("node coordinates");
        double x, y;
        if (!(row >> x >> y)) throw fail(ln, "expected 'x y'");
        mesh.nodes.emplace_back(x, y);
      }
    } else if (key == "elements") {
      const size_t n = count_of(in, no);
      for (size_t i = 0; i < n; ++i) {
        auto [ln, row] = next("element");
        BulkElement el;
        std::string type;
        int xfem = 0;
        row >> type;
        if (type == "tri3") el.type = BulkType::tri3;
        else if (type == "quad4") el.type = BulkType::quad4;
        else throw fail(ln, "unknown element type '" + type + "'");
        if (!(row >> el.material >> el.angle >> el.ply >> xfem)) throw fail(ln, "expected 'material angle ply xfem'");
        el.xfem = xfem != 0;
        for (int k = 0; k < el.num_nodes(); ++k)
          if (!(row >> el.nodes[k])) throw fail(ln, "missing element node id");
        mesh.elements.push_back(el);
      }
    } else if (key == "interfaces") {
      const size_t n = count_of(in, no);
      for (size_t i = 0; i < n; ++i) {
        auto [ln, row] = next("interface");
        InterfaceElement ie;
        if (!(row >> ie.material >> ie.nodes[0] >> ie.nodes[1] >> ie.nodes[2] >> ie.nodes[3]))
          throw fail(ln, "expected 'material a b c d'");
        mesh.interfaces.push_back(ie);
      }
    } else if (key == "surfaces") {
      const size_t n = count_of(in, no);
      for (size_t i = 0; i < n; ++i) {
        auto [ln, row] = next("surface");
        SurfaceInterface s;
        row >> s.material;
        for (int& id : s.nodes)
          if (!(row >> id)) throw fail(ln, "expected 'material n0 n1 n2 n3 n4 n5'");
        mesh.surfaces.push_back(s);
      }
    } else if (key == "group") {
      std::string name;
      if (!(in >> name)) throw fail(no, "expected group name");
      const size_t n = count_of(in, no);
      std::vector<int> ids;
      std::istringstream* src = &in;
      std::pair<int, std::istringstream> holder;
      while (ids.size() < n) {
        int id;
        if (*src >> id) {
          ids.push_back(id);
        } else {
          holder = next("group node ids");
          src = &holder.second;
        }
      }
      mesh.groups[name] = std::move(ids);
    } else {
      throw fail(no, "unknown mesh section '" + key + "'");
    }
  }
  mesh.validate();
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open mesh file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str(), path);
}

std::string format_mesh(const Mesh& mesh) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& p : mesh.nodes) os << p.x() << " " << p.y() << "\n";
  os << "elements " << mesh.elements.size() << "\n";
  for (const auto& el : mesh.elements) {
    os << (el.type == BulkType::tri3 ? "tri3" : "quad4") << " " << el.material << " " << el.angle
       << " " << el.ply << " " << (el.xfem ? 1 : 0);
    for (int k = 0; k < el.num_nodes(); ++k) os << " " << el.nodes[k];
    os << "\n";
  }
  os << "interfaces " << mesh.interfaces.size() << "\n";
  for (const auto& ie : mesh.interfaces)
    os << ie.material << " " << ie.nodes[0] << " " << ie.nodes[1] << " " << ie.nodes[2] << " "
       << ie.nodes[3] << "\n";
  os << "surfaces " << mesh.surfaces.size() << "\n";
  for (const auto& s : mesh.surfaces) {
    os << s.material;
    for (int id : s.nodes) os << " " << id;
    os << "\n";
  }
  for (const auto& [name, ids] : mesh.groups) {
    os << "group " << name << " " << ids.size() << "\n";
    for (size_t i = 0; i < ids.size(); ++i) os << ids[i] << ((i + 1) % 16 == 0 || i + 1 == ids.size() ? "\n" : " ");
  }
  return os.str();
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, "cannot write mesh file " + path);
  out << format_mesh(mesh);
}

Mesh make_bar_mesh(int n, double length, double height, int xfem_element, double fiber_angle) {
  Mesh m;
  for (int i = 0; i <= n; ++i) {
    m.nodes.emplace_back(i * length, 0.0);
    m.nodes.emplace_back(i * length, height);
  }
  for (int i = 0; i < n; ++i) {
    BulkElement el;
    el.type = BulkType::quad4;
    el.nodes = {2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1};
    el.angle = fiber_angle;
    el.xfem = (i == xfem_element);
    m.elements.push_back(el);
  }
  m.groups["left"] = {0, 1};
  m.groups["right"] = {2 * n, 2 * n + 1};
  m.groups["origin"] = {0};
  m.validate();
  return m;
}

namespace {

std::vector<double> graded_axis(double a, double b, double size) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / size - 1e-9)));
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = a + (b - a) * i / n;
  return x;
}

}  // namespace

Mesh make_dcb_mesh(const DcbGeometry& g) {
  if (g.layers < 2 || g.layers % 2 != 0)
    throw invalid_property("DCB mesh needs an even number of layers per arm");
  if (!(g.a0 > 0.0 && g.a0 + g.fine_length <= g.length + 1e-12))
    throw invalid_property("DCB refined zone must fit inside the specimen");
  std::vector<double> xs = graded_axis(0.0, g.a0, g.coarse_size);
  auto fine = graded_axis(g.a0, g.a0 + g.fine_length, g.fine_size);
  xs.insert(xs.end(), fine.begin() + 1, fine.end());
  if (g.a0 + g.fine_length < g.length - 1e-9) {
    auto tail = graded_axis(g.a0 + g.fine_length, g.length, g.coarse_size);
    xs.insert(xs.end(), tail.begin() + 1, tail.end());
  }
  const int nx = static_cast<int>(xs.size());
  const int rows = g.layers + 1;

  Mesh m;
  // arm 0 (lower) occupies y in [-h, 0], arm 1 (upper) y in [0, h].
  auto node_id = [&](int arm, int col, int row) { return (arm * nx + col) * rows + row; };
  for (int arm = 0; arm < 2; ++arm)
    for (int c = 0; c < nx; ++c)
      for (int r = 0; r < rows; ++r) {
        const double y = (arm == 0 ? -g.h : 0.0) + g.h * r / g.layers;
        m.nodes.emplace_back(xs[c], y);
      }
  for (int arm = 0; arm < 2; ++arm)
    for (int c = 0; c + 1 < nx; ++c)
      for (int r = 0; r + 1 < rows; ++r) {
        BulkElement el;
        el.type = BulkType::quad4;
        el.nodes = {node_id(arm, c, r), node_id(arm, c + 1, r), node_id(arm, c + 1, r + 1),
                    node_id(arm, c, r + 1)};
        el.ply = arm;
        m.elements.push_back(el);
      }
  for (int c = 0; c + 1 < nx; ++c) {
    if (xs[c] < g.a0 - 1e-9) continue;
    InterfaceElement ie;
    ie.nodes = {node_id(0, c, rows - 1), node_id(0, c + 1, rows - 1), node_id(1, c, 0),
                node_id(1, c + 1, 0)};
    m.interfaces.push_back(ie);
  }
  m.groups["load_bottom"] = {node_id(0, 0, g.layers / 2)};
  m.groups["load_top"] = {node_id(1, 0, g.layers / 2)};
  m.validate();
  return m;
}

Mesh make_open_hole_mesh(const OpenHoleGeometry& g) {
  const double half_w = 0.5 * g.width, half_l = 0.5 * g.length, r = 0.5 * g.hole_diameter;
  if (!(r < half_w && half_w < half_l)) throw invalid_property("open-hole geometry is inconsistent");
  Mesh ply;
  NodeBuilder nb(ply.nodes);
  std::vector<std::array<int, 4>> quads;

  // Ring between the hole and the central square, mapped per quarter.
  const int nc = 2 * ((g.n_circ + 1) / 2);  // even so the square mid-sides carry a node
  std::vector<std::vector<int>> ring(4 * nc + 1, std::vector<int>(g.n_radial + 1));
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i <= nc; ++i) {
      const double t = static_cast<double>(i) / nc;
      const double th = -std::numbers::pi / 4.0 + std::numbers::pi / 2.0 * t + k * std::numbers::pi / 2.0;
      const Vec2 inner(r * std::cos(th), r * std::sin(th));
      // Point on the square side, right side rotated by k quarter turns.
      const Vec2 side0(half_w, -half_w + 2.0 * half_w * t);
      const double ck = std::cos(k * std::numbers::pi / 2.0), sk = std::sin(k * std::numbers::pi / 2.0);
      const Vec2 outer(ck * side0.x() - sk * side0.y(), sk * side0.x() + ck * side0.y());
      for (int j = 0; j <= g.n_radial; ++j) {
        // Grade toward the hole, where the stress concentrates.
        const double s = std::pow(static_cast<double>(j) / g.n_radial, 1.3);
        const Vec2 p = (1.0 - s) * inner + s * outer;
        ring[k * nc + i][j] = nb.add(p.x(), p.y());
      }
    }
  }
  for (int i = 0; i < 4 * nc; ++i)
    for (int j = 0; j < g.n_radial; ++j)
      quads.push_back({ring[i][j], ring[i][j + 1], ring[i + 1][j + 1], ring[i + 1][j]});

  // Side blocks reuse the square-side node distribution along y.
  for (int side = 0; side < 2; ++side) {
    const double x0 = side == 0 ? half_w : -half_l, x1 = side == 0 ? half_l : -half_w;
    for (int a = 0; a < g.n_side; ++a)
      for (int b = 0; b < nc; ++b) {
        auto id = [&](int ia, int ib) {
          const double x = x0 + (x1 - x0) * ia / g.n_side;
          const double y = -half_w + 2.0 * half_w * ib / nc;
          return nb.add(x, y);
        };
        quads.push_back({id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)});
      }
  }

  // Split quads into triangles; alternate the diagonal to avoid a directional bias.
  size_t q_index = 0;
  for (auto q : quads) {
    BulkElement t1, t2;
    if ((q_index++) % 2 == 0) {
      t1.nodes = {q[0], q[1], q[2], -1};
      t2.nodes = {q[0], q[2], q[3], -1};
    } else {
      t1.nodes = {q[0], q[1], q[3], -1};
      t2.nodes = {q[1], q[2], q[3], -1};
    }
    for (auto* t : {&t1, &t2}) {
      t->type = BulkType::tri3;
      t->xfem = true;
      if (signed_area(ply.nodes, *t) < 0.0) std::swap(t->nodes[1], t->nodes[2]);
      ply.elements.push_back(*t);
    }
  }

  Mesh m;
  const int n = static_cast<int>(ply.nodes.size());
  m.nodes = ply.nodes;
  m.nodes.insert(m.nodes.end(), ply.nodes.begin(), ply.nodes.end());
  for (int p = 0; p < 2; ++p)
    for (const auto& el : ply.elements) {
      BulkElement e = el;
      for (int k = 0; k < 3; ++k) e.nodes[k] += p * n;
      e.ply = p;
      e.angle = p == 0 ? g.angle_lower : g.angle_upper;
      m.elements.push_back(e);
    }
  for (const auto& el : ply.elements) {
    SurfaceInterface s;
    for (int k = 0; k < 3; ++k) {
      s.nodes[k] = el.nodes[k];
      s.nodes[k + 3] = el.nodes[k] + n;
    }
    m.surfaces.push_back(s);
  }
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < n; ++i) {
      const Vec2& x = ply.nodes[i];
      if (std::abs(x.x() + half_l) < 1e-9) m.groups["left"].push_back(i + p * n);
      if (std::abs(x.x() - half_l) < 1e-9) m.groups["right"].push_back(i + p * n);
      if (std::abs(x.norm() - r) < 1e-9) m.groups["hole"].push_back(i + p * n);
    }
  m.validate();
  return m;
}

}  // namespace fatiguecz
