#include "fatiguecz/model.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "fatiguecz/quadrature.hpp"
#include "shape.hpp"

namespace fatiguecz {

class LinearSolver {
 public:
  bool solve(const SparseMatrix& K, const Vector& b, Vector& x, long version, std::string& msg) {
    if (version != version_ || K.nonZeros() != nnz_ || K.rows() != n_) {
      lu_.analyzePattern(K);
      version_ = version;
      nnz_ = K.nonZeros();
      n_ = K.rows();
    }
    lu_.factorize(K);
    if (lu_.info() != Eigen::Success) {
      msg = "sparse factorization failed: " + lu_.lastErrorMessage();
      version_ = -1;
      return false;
    }
    x = lu_.solve(b);
    if (!x.allFinite()) {
      msg = "linear solve produced non-finite values";
      return false;
    }
    return true;
  }

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  long version_ = -1;
  Eigen::Index nnz_ = -1;
  Eigen::Index n_ = -1;
};

// Bulk stiffness matrices of uncracked elements and the sparsity pattern of the
// current topology with the value slot of every element-matrix entry.
struct AssemblyCache {
  std::vector<Eigen::MatrixXd> bulk_K;
  std::vector<char> bulk_ready;
  long version = -1;
  std::vector<bool> mask;
  SparseMatrix pattern;
  std::vector<std::vector<int>> slots;  // per contribution, row-major m x m, -1 = constrained
};

namespace {

struct Contribution {
  std::vector<int> dofs;
  Eigen::VectorXd f;
  Eigen::MatrixXd K;
};

template <class F>
void parallel_for(int n, int threads, F&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Eigen::Vector2d node_u(const Vector& u, int node) { return u.segment<2>(2 * node); }

void set_node_dofs(std::vector<int>& dofs, size_t slot, int node) {
  dofs[2 * slot] = 2 * node;
  dofs[2 * slot + 1] = 2 * node + 1;
}

// Frame rows (normal, tangent) of a line interface element.
Eigen::Matrix2d interface_frame(const Mesh& mesh, const InterfaceElement& ie, double& length) {
  const Vec2 d = mesh.nodes[ie.nodes[1]] - mesh.nodes[ie.nodes[0]];
  length = d.norm();
  const Vec2 s = d / length;
  Eigen::Matrix2d R;
  R << -s.y(), s.x(), s.x(), s.y();
  return R;
}

Eigen::Matrix2d crack_frame(const CrackSegment& c) {
  Eigen::Matrix2d R;
  R.row(0) = c.normal.transpose();
  R.row(1) = c.tangent().transpose();
  return R;
}

// Evaluates one cohesive point at a 2D jump given in its 2-component frame and
// returns the frame traction and tangent (2 x 2 sub-blocks).
struct PointResponse {
  Eigen::Vector2d t;
  Eigen::Matrix2d T;
};

PointResponse evaluate_point(Model& m, int pid, const Vec3& jump, double dN, int first, int second) {
  auto& p = m.points[pid];
  const auto& mat = m.cohesive_materials[p.material];
  const auto r = update_traction(jump + p.shift, p.state, dN, m.theta, mat.props, mat.fatigue);
  p.trial = r.state_new;
  p.traction = r.traction;
  p.branch = r.branch;
  p.no_root = r.no_root;
  PointResponse out;
  out.t << r.traction[first], r.traction[second];
  out.T << r.tangent(first, first), r.tangent(first, second), r.tangent(second, first),
      r.tangent(second, second);
  return out;
}

}  // namespace

Model::Model() : solver(std::make_unique<LinearSolver>()), assembly_cache(std::make_unique<AssemblyCache>()) {}
Model::~Model() = default;

Model::Model(const Model& o)
    : mesh(o.mesh),
      bulk_materials(o.bulk_materials),
      cohesive_materials(o.cohesive_materials),
      theta(o.theta),
      threads(o.threads),
      prescribed(o.prescribed),
      forces(o.forces),
      u(o.u),
      points(o.points),
      interface_points(o.interface_points),
      surface_points(o.surface_points),
      cracks(o.cracks),
      element_crack(o.element_crack),
      phantom_nodes(o.phantom_nodes),
      num_real_nodes(o.num_real_nodes),
      next_crack_id(o.next_crack_id),
      reference_force(o.reference_force),
      load_factor(o.load_factor),
      f_int(o.f_int),
      solver(std::make_unique<LinearSolver>()),
      assembly_cache(std::make_unique<AssemblyCache>()),
      topology_version(o.topology_version) {}

Model& Model::operator=(const Model& o) {
  if (this == &o) return *this;
  mesh = o.mesh;
  bulk_materials = o.bulk_materials;
  cohesive_materials = o.cohesive_materials;
  theta = o.theta;
  threads = o.threads;
  prescribed = o.prescribed;
  forces = o.forces;
  u = o.u;
  points = o.points;
  interface_points = o.interface_points;
  surface_points = o.surface_points;
  cracks = o.cracks;
  element_crack = o.element_crack;
  phantom_nodes = o.phantom_nodes;
  num_real_nodes = o.num_real_nodes;
  next_crack_id = o.next_crack_id;
  reference_force = o.reference_force;
  load_factor = o.load_factor;
  f_int = o.f_int;
  // The factorization is tied to the old pattern; force a fresh analysis.
  solver = std::make_unique<LinearSolver>();
  assembly_cache = std::make_unique<AssemblyCache>();
  topology_version = o.topology_version + 1;
  return *this;
}

int configured_threads() {
  const char* env = std::getenv("FATIGUECZ_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return std::max(1, n);
}

void Model::initialize() {
  mesh.validate();
  for (const auto& b : bulk_materials) b.validate();
  for (const auto& c : cohesive_materials) {
    c.props.validate();
    c.fatigue.validate();
    if (!(c.thickness > 0.0)) throw invalid_property("cohesive material thickness must be positive");
  }
  auto check_index = [](int idx, size_t n, const char* what) {
    if (idx < 0 || static_cast<size_t>(idx) >= n)
      throw Error(ErrorCategory::lookup, std::string("undefined ") + what + " material index");
  };
  for (const auto& el : mesh.elements) {
    check_index(el.material, bulk_materials.size(), "bulk");
    const int cm = bulk_materials[el.material].crack_material;
    if (el.xfem) check_index(cm, cohesive_materials.size(), "crack");
  }
  for (const auto& ie : mesh.interfaces) check_index(ie.material, cohesive_materials.size(), "interface");
  for (const auto& s : mesh.surfaces) check_index(s.material, cohesive_materials.size(), "surface");

  num_real_nodes = static_cast<int>(mesh.nodes.size());
  u = Vector::Zero(num_dofs());
  f_int = Vector::Zero(num_dofs());
  points.clear();
  cracks.clear();
  phantom_nodes.clear();
  element_crack.assign(mesh.elements.size(), -1);
  next_crack_id = 0;
  reference_force = 0.0;
  load_factor = 0.0;
  assembly_cache = std::make_unique<AssemblyCache>();

  const auto nc = newton_cotes_line(3);
  interface_points.resize(mesh.interfaces.size());
  for (size_t e = 0; e < mesh.interfaces.size(); ++e) {
    const auto& ie = mesh.interfaces[e];
    double L = 0.0;
    interface_frame(mesh, ie, L);
    for (int k = 0; k < 3; ++k) {
      CohesivePoint p;
      p.owner = PointOwner::interface;
      p.owner_index = static_cast<int>(e);
      p.local = k;
      p.material = ie.material;
      p.weight = nc[k].w * 0.5 * L * cohesive_materials[ie.material].thickness;
      interface_points[e][k] = static_cast<int>(points.size());
      points.push_back(p);
    }
  }
  surface_points.resize(mesh.surfaces.size());
  for (size_t e = 0; e < mesh.surfaces.size(); ++e) {
    const auto& s = mesh.surfaces[e];
    const Vec2 a = mesh.nodes[s.nodes[1]] - mesh.nodes[s.nodes[0]];
    const Vec2 b = mesh.nodes[s.nodes[2]] - mesh.nodes[s.nodes[0]];
    const double area = 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
    for (int k = 0; k < 3; ++k) {
      CohesivePoint p;
      p.owner = PointOwner::surface;
      p.owner_index = static_cast<int>(e);
      p.local = k;
      p.material = s.material;
      p.weight = area / 3.0;
      p.state.B_last = 1.0;
      p.trial = p.state;
      surface_points[e][k] = static_cast<int>(points.size());
      points.push_back(p);
    }
  }
  threads = configured_threads();
  invalidate_pattern();
}

void Model::invalidate_pattern() { ++topology_version; }

void Model::prescribe(const std::string& group, int component, double value) {
  for (int node : mesh.group(group)) {
    const int dof = 2 * node + component;
    auto it = std::find_if(prescribed.begin(), prescribed.end(), [&](const Prescribed& p) { return p.dof == dof; });
    if (it != prescribed.end()) it->value = value;
    else prescribed.push_back({dof, value});
  }
  invalidate_pattern();
}

void Model::apply_force(const std::string& group, int component, double total) {
  const auto& nodes = mesh.group(group);
  for (int node : nodes) forces.push_back({2 * node + component, total / nodes.size()});
}

Vector Model::external_force() const {
  Vector f = Vector::Zero(num_dofs());
  for (const auto& p : forces) f[p.dof] += p.value;
  return f;
}

std::vector<bool> Model::constrained_mask() const {
  std::vector<bool> mask(num_dofs(), false);
  for (const auto& p : prescribed) mask[p.dof] = true;
  return mask;
}

int Model::add_phantom_node(int crack_id, int node) {
  const auto key = std::make_pair(crack_id, node);
  if (auto it = phantom_nodes.find(key); it != phantom_nodes.end()) return it->second;
  const int id = static_cast<int>(mesh.nodes.size());
  mesh.nodes.push_back(mesh.nodes[node]);
  u.conservativeResize(2 * (id + 1));
  u.segment<2>(2 * id) = u.segment<2>(2 * node);
  f_int.conservativeResize(2 * (id + 1));
  f_int.segment<2>(2 * id).setZero();
  phantom_nodes.emplace(key, id);
  invalidate_pattern();
  return id;
}

namespace {

void bulk_kernel(const Model& m, int e, Contribution& c, AssemblyCache& cache) {
  const auto& el = m.mesh.elements[e];
  const int n = el.num_nodes();
  c.dofs.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) set_node_dofs(c.dofs, i, el.nodes[i]);
  if (!cache.bulk_ready[e]) {
    const auto& mat = m.bulk_materials[el.material];
    const Eigen::Matrix3d D = mat.stiffness(el.angle);
    auto& K = cache.bulk_K[e];
    K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const auto rule = el.type == BulkType::tri3 ? triangle_rule(1) : gauss_quad_2x2();
    for (const auto& q : rule) {
      const auto b = detail::b_matrix(el, m.mesh.nodes, q.xi);
      const auto B = b.B.leftCols(2 * n);
      K.noalias() += B.transpose() * D * B * (q.w * b.detJ * mat.thickness);
    }
    cache.bulk_ready[e] = 1;
  }
  c.K = cache.bulk_K[e];
  Eigen::VectorXd ue(2 * n);
  for (int i = 0; i < 2 * n; ++i) ue[i] = m.u[c.dofs[i]];
  c.f = c.K * ue;
}

void cracked_kernel(Model& m, int ci, double dN, Contribution& c) {
  const auto& cr = m.cracks[ci];
  const auto& el = m.mesh.elements[cr.element];
  const auto& mat = m.bulk_materials[el.material];
  const Eigen::Matrix3d D = mat.stiffness(el.angle);
  const int n = el.num_nodes();
  const int nd = 2 * n;
  c.dofs.assign(2 * nd, 0);
  for (int i = 0; i < n; ++i) {
    set_node_dofs(c.dofs, i, cr.nodes_a[i]);
    set_node_dofs(c.dofs, n + i, cr.nodes_b[i]);
  }
  c.K = Eigen::MatrixXd::Zero(2 * nd, 2 * nd);
  const auto rule = triangle_rule(2);
  auto integrate = [&](const std::vector<std::array<Vec2, 3>>& tris, int offset) {
    for (const auto& t : tris) {
      const Vec2 e1 = t[1] - t[0], e2 = t[2] - t[0];
      const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
      for (const auto& q : rule) {
        const Vec2 xi = t[0] + q.xi.x() * e1 + q.xi.y() * e2;
        const auto b = detail::b_matrix(el, m.mesh.nodes, xi);
        const auto B = b.B.leftCols(nd);
        c.K.block(offset, offset, nd, nd).noalias() +=
            B.transpose() * D * B * (q.w * jac * b.detJ * mat.thickness);
      }
    }
  };
  integrate(cr.tris_a, 0);
  integrate(cr.tris_b, nd);

  Eigen::VectorXd ue(2 * nd);
  for (int i = 0; i < 2 * nd; ++i) ue[i] = m.u[c.dofs[i]];
  c.f = c.K * ue;

  const Eigen::Matrix2d R = crack_frame(cr);
  for (int k = 0; k < 2; ++k) {
    const double s = detail::segment_gauss_position(k);
    const Vec2 xi = cr.xi0 + s * (cr.xi1 - cr.xi0);
    const auto sh = detail::shape(el.type, xi);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2 * nd);
    for (int i = 0; i < n; ++i) {
      G.block<2, 2>(0, 2 * i) = sh.N[i] * Eigen::Matrix2d::Identity();
      G.block<2, 2>(0, nd + 2 * i) = -sh.N[i] * Eigen::Matrix2d::Identity();
    }
    const Eigen::Vector2d jl = R * (G * ue);
    const int pid = cr.points[k];
    const auto resp = evaluate_point(m, pid, Vec3(jl[0], jl[1], 0.0), dN, 0, 1);
    const double w = m.points[pid].weight;
    const Eigen::Vector2d tg = R.transpose() * resp.t;
    const Eigen::Matrix2d Kg = R.transpose() * resp.T * R;
    c.f.noalias() += G.transpose() * tg * w;
    c.K.noalias() += G.transpose() * Kg * G * w;
  }
}

void interface_kernel(Model& m, int e, double dN, Contribution& c) {
  const auto& ie = m.mesh.interfaces[e];
  double L = 0.0;
  const Eigen::Matrix2d R = interface_frame(m.mesh, ie, L);
  c.dofs.assign(8, 0);
  for (int i = 0; i < 4; ++i) set_node_dofs(c.dofs, i, ie.nodes[i]);
  Eigen::Matrix<double, 8, 1> ue;
  for (int i = 0; i < 8; ++i) ue[i] = m.u[c.dofs[i]];
  c.f = Eigen::VectorXd::Zero(8);
  c.K = Eigen::MatrixXd::Zero(8, 8);
  const auto nc = newton_cotes_line(3);
  for (int k = 0; k < 3; ++k) {
    const double Na = 0.5 * (1.0 - nc[k].xi), Nb = 0.5 * (1.0 + nc[k].xi);
    Eigen::Matrix<double, 2, 8> G = Eigen::Matrix<double, 2, 8>::Zero();
    G.block<2, 2>(0, 0) = -Na * Eigen::Matrix2d::Identity();
    G.block<2, 2>(0, 2) = -Nb * Eigen::Matrix2d::Identity();
    G.block<2, 2>(0, 4) = Na * Eigen::Matrix2d::Identity();
    G.block<2, 2>(0, 6) = Nb * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d jl = R * (G * ue);
    const int pid = m.interface_points[e][k];
    const auto resp = evaluate_point(m, pid, Vec3(jl[0], jl[1], 0.0), dN, 0, 1);
    const double w = m.points[pid].weight;
    c.f.noalias() += G.transpose() * (R.transpose() * resp.t) * w;
    c.K.noalias() += G.transpose() * (R.transpose() * resp.T * R) * G * w;
  }
}

void surface_kernel(Model& m, int e, double dN, Contribution& c) {
  const auto& s = m.mesh.surfaces[e];
  c.dofs.assign(12, 0);
  for (int i = 0; i < 6; ++i) set_node_dofs(c.dofs, i, s.nodes[i]);
  c.f = Eigen::VectorXd::Zero(12);
  c.K = Eigen::MatrixXd::Zero(12, 12);
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d j = node_u(m.u, s.nodes[k + 3]) - node_u(m.u, s.nodes[k]);
    const int pid = m.surface_points[e][k];
    // Out-of-plane normal carries no jump; the in-plane components are shear.
    const auto resp = evaluate_point(m, pid, Vec3(0.0, j[0], j[1]), dN, 1, 2);
    const double w = m.points[pid].weight;
    c.f.segment<2>(2 * k) -= resp.t * w;
    c.f.segment<2>(2 * (k + 3)) += resp.t * w;
    c.K.block<2, 2>(2 * k, 2 * k) += resp.T * w;
    c.K.block<2, 2>(2 * (k + 3), 2 * (k + 3)) += resp.T * w;
    c.K.block<2, 2>(2 * k, 2 * (k + 3)) -= resp.T * w;
    c.K.block<2, 2>(2 * (k + 3), 2 * k) -= resp.T * w;
  }
}

}  // namespace

Assembly Model::assemble(double lf, double dN) {
  const int nd = num_dofs();
  const auto mask = constrained_mask();
  std::vector<int> free_index(nd, -1);
  int nf = 0;
  for (int i = 0; i < nd; ++i)
    if (!mask[i]) free_index[i] = nf++;

  const int n_bulk = static_cast<int>(mesh.elements.size());
  const int n_if = static_cast<int>(mesh.interfaces.size());
  const int n_surf = static_cast<int>(mesh.surfaces.size());
  const int total = n_bulk + n_if + n_surf;
  auto& cache = *assembly_cache;
  if (cache.bulk_ready.size() != static_cast<size_t>(n_bulk)) {
    cache.bulk_K.assign(n_bulk, Eigen::MatrixXd());
    cache.bulk_ready.assign(n_bulk, 0);
  }
  std::vector<Contribution> buf(total);
  parallel_for(total, threads, [&](int i) {
    if (i < n_bulk) {
      if (element_crack[i] >= 0) cracked_kernel(*this, element_crack[i], dN, buf[i]);
      else bulk_kernel(*this, i, buf[i], cache);
    } else if (i < n_bulk + n_if) {
      interface_kernel(*this, i - n_bulk, dN, buf[i]);
    } else {
      surface_kernel(*this, i - n_bulk - n_if, dN, buf[i]);
    }
  });

  Assembly A;
  A.f_int = Vector::Zero(nd);
  for (int i = 0; i < total; ++i) {
    const auto& c = buf[i];
    if (!c.f.allFinite() || !c.K.allFinite()) {
      std::ostringstream os;
      if (i < n_bulk) os << "non-finite contribution from bulk element " << i;
      else if (i < n_bulk + n_if) os << "non-finite contribution from interface element " << i - n_bulk;
      else os << "non-finite contribution from surface interface " << i - n_bulk - n_if;
      throw Error(ErrorCategory::assembly, os.str());
    }
    for (size_t a = 0; a < c.dofs.size(); ++a) A.f_int[c.dofs[a]] += c.f[a];
  }

  if (cache.version != topology_version || cache.mask != mask) {
    // New topology or constraints: build the pattern once and record the value slots.
    std::vector<Eigen::Triplet<double>> trip;
    size_t reserve = 0;
    for (const auto& c : buf) reserve += c.dofs.size() * c.dofs.size();
    trip.reserve(reserve);
    for (const auto& c : buf)
      for (int ra : c.dofs)
        for (int cb : c.dofs)
          if (free_index[ra] >= 0 && free_index[cb] >= 0) trip.emplace_back(free_index[ra], free_index[cb], 0.0);
    cache.pattern.resize(nf, nf);
    cache.pattern.setFromTriplets(trip.begin(), trip.end());
    cache.pattern.makeCompressed();
    const int* outer = cache.pattern.outerIndexPtr();
    const int* inner = cache.pattern.innerIndexPtr();
    cache.slots.assign(total, {});
    for (int i = 0; i < total; ++i) {
      const auto& d = buf[i].dofs;
      const int m = static_cast<int>(d.size());
      auto& sl = cache.slots[i];
      sl.assign(m * m, -1);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const int r = free_index[d[a]], col = free_index[d[b]];
          if (r < 0 || col < 0) continue;
          sl[a * m + b] = static_cast<int>(std::lower_bound(inner + outer[col], inner + outer[col + 1], r) - inner);
        }
    }
    cache.version = topology_version;
    cache.mask = mask;
  }
  A.K = cache.pattern;
  double* values = A.K.valuePtr();
  std::fill(values, values + A.K.nonZeros(), 0.0);
  for (int i = 0; i < total; ++i) {
    const auto& c = buf[i];
    const auto& sl = cache.slots[i];
    const int m = static_cast<int>(c.dofs.size());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (sl[a * m + b] >= 0) values[sl[a * m + b]] += c.K(a, b);
  }
  A.residual = A.f_int - lf * external_force();
  f_int = A.f_int;
  return A;
}

void Model::commit() {
  for (auto& p : points) p.state = p.trial;
}

Eigen::Vector3d Model::element_stress(int e) const {
  const auto& el = mesh.elements[e];
  const int n = el.num_nodes();
  std::array<int, 4> nodes = el.nodes;
  if (element_crack[e] >= 0) nodes = cracks[element_crack[e]].nodes_a;
  const auto b = detail::b_matrix(el, mesh.nodes, detail::parent_centroid(el.type));
  Eigen::VectorXd ue(2 * n);
  for (int i = 0; i < n; ++i) ue.segment<2>(2 * i) = node_u(u, nodes[i]);
  return bulk_materials[el.material].stiffness(el.angle) * (b.B.leftCols(2 * n) * ue);
}

Vec3 Model::point_jump(int pid) const {
  const auto& p = points[pid];
  switch (p.owner) {
    case PointOwner::interface: {
      const auto& ie = mesh.interfaces[p.owner_index];
      double L = 0.0;
      const Eigen::Matrix2d R = interface_frame(mesh, ie, L);
      const double xi = newton_cotes_line(3)[p.local].xi;
      const double Na = 0.5 * (1.0 - xi), Nb = 0.5 * (1.0 + xi);
      const Eigen::Vector2d j = Na * (node_u(u, ie.nodes[2]) - node_u(u, ie.nodes[0])) +
                                Nb * (node_u(u, ie.nodes[3]) - node_u(u, ie.nodes[1]));
      const Eigen::Vector2d jl = R * j;
      return Vec3(jl[0], jl[1], 0.0) + p.shift;
    }
    case PointOwner::surface: {
      const auto& s = mesh.surfaces[p.owner_index];
      const Eigen::Vector2d j = node_u(u, s.nodes[p.local + 3]) - node_u(u, s.nodes[p.local]);
      return Vec3(0.0, j[0], j[1]) + p.shift;
    }
    case PointOwner::crack: {
      const auto& cr = cracks[p.owner_index];
      const auto& el = mesh.elements[cr.element];
      const double s = detail::segment_gauss_position(p.local);
      const auto sh = detail::shape(el.type, cr.xi0 + s * (cr.xi1 - cr.xi0));
      Eigen::Vector2d j = Eigen::Vector2d::Zero();
      for (int i = 0; i < el.num_nodes(); ++i)
        j += sh.N[i] * (node_u(u, cr.nodes_a[i]) - node_u(u, cr.nodes_b[i]));
      const Eigen::Vector2d jl = crack_frame(cr) * j;
      return Vec3(jl[0], jl[1], 0.0) + p.shift;
    }
  }
  return Vec3::Zero();
}

SolveResult newton_solve(Model& m, double lf, double dN, const SolveOptions& opt) {
  SolveResult res;
  for (const auto& p : m.prescribed) m.u[p.dof] = lf * p.value;
  const double fext_norm = lf * m.external_force().norm();
  const auto mask = m.constrained_mask();
  const int nd = m.num_dofs();
  std::vector<int> free_dofs;
  for (int i = 0; i < nd; ++i)
    if (!mask[i]) free_dofs.push_back(i);
  const int nf = static_cast<int>(free_dofs.size());

  // Backtracking: a step that increases the residual is halved up to line_search times.
  Vector u_base;
  Vector du;
  double alpha = 1.0, r_base = 0.0;
  int backtracks = 0;
  for (int it = 0;;) {
    Assembly A;
    try {
      A = m.assemble(lf, dN);
    } catch (const Error& e) {
      res.message = e.what();
      res.iterations = it;
      return res;
    }
    Vector r(nf);
    for (int i = 0; i < nf; ++i) r[i] = A.residual[free_dofs[i]];
    double react2 = 0.0;
    for (int i = 0; i < nd; ++i)
      if (mask[i]) react2 += A.f_int[i] * A.f_int[i];
    const double ref = std::max({m.reference_force, std::abs(fext_norm), std::sqrt(react2)});
    res.residual = r.norm();
    res.tolerance = opt.tol_rel * ref + opt.tol_abs;
    res.history.push_back(res.residual);
    res.iterations = it;
    if (!std::isfinite(res.residual) && !(it > 0 && backtracks < opt.line_search)) {
      res.message = "non-finite residual";
      return res;
    }
    if (res.residual <= res.tolerance) {
      res.converged = true;
      m.reference_force = ref;
      m.load_factor = lf;
      return res;
    }
    if (it > 0 && backtracks < opt.line_search && !(res.residual < r_base)) {
      alpha *= 0.5;
      ++backtracks;
      for (int i = 0; i < nf; ++i) m.u[free_dofs[i]] = u_base[i] - alpha * du[i];
      continue;
    }
    if (it >= opt.max_iterations) {
      std::ostringstream os;
      os << "no convergence in " << opt.max_iterations << " iterations (|r| = " << res.residual
         << ", tol = " << res.tolerance << ")";
      res.message = os.str();
      return res;
    }
    std::string msg;
    if (!m.solver->solve(A.K, r, du, m.topology_version, msg)) {
      res.message = msg;
      return res;
    }
    if (opt.line_search > 0) {
      u_base.resize(nf);
      for (int i = 0; i < nf; ++i) u_base[i] = m.u[free_dofs[i]];
      r_base = res.residual;
      alpha = 1.0;
      backtracks = 0;
    }
    for (int i = 0; i < nf; ++i) m.u[free_dofs[i]] -= du[i];
    ++it;
  }
}

double reaction_force(const Model& m, const std::string& group, int component) {
  const auto mask = m.constrained_mask();
  double r = 0.0;
  for (int node : m.mesh.group(group)) {
    const int dof = 2 * node + component;
    if (mask[dof] && dof < m.f_int.size()) r += m.f_int[dof];
  }
  return r;
}

double dissipated_energy(const Model& m) {
  double W = 0.0;
  for (const auto& p : m.points)
    W += p.weight * p.state.D * m.cohesive_materials[p.material].props.critical_err(p.state.B_last);
  return W;
}

}  // namespace fatiguecz
