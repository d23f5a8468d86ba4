#include "fatiguecz/xfem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "shape.hpp"

namespace fatiguecz {

namespace {

constexpr double kMinPartFraction = 0.01;

Eigen::Vector2d traction_on(const Eigen::Vector3d& sigma, const Vec2& n) {
  return {sigma[0] * n.x() + sigma[2] * n.y(), sigma[2] * n.x() + sigma[1] * n.y()};
}

double polygon_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& q = p[i];
    const Vec2& r = p[(i + 1) % p.size()];
    a += q.x() * r.y() - r.x() * q.y();
  }
  return 0.5 * std::abs(a);
}

std::vector<std::array<Vec2, 3>> fan(const std::vector<Vec2>& poly) {
  std::vector<std::array<Vec2, 3>> tris;
  for (size_t i = 1; i + 1 < poly.size(); ++i) tris.push_back({poly[0], poly[i], poly[i + 1]});
  return tris;
}

}  // namespace

double insertion_index(const Eigen::Vector3d& sigma, const Vec2& normal, const CohesiveProperties& props,
                       const FatigueProperties& fat, MixityRule rule, double* sigma_eq_out,
                       double* sigma_end_out) {
  const Eigen::Vector2d t = traction_on(sigma, normal);
  const Vec2 s(normal.y(), -normal.x());
  const double tn = std::max(t.dot(normal), 0.0);
  const double tsh = std::abs(t.dot(s));
  const double sigma_eq = std::sqrt(tn * tn + tsh * tsh);
  if (sigma_eq_out) *sigma_eq_out = sigma_eq;
  if (sigma_end_out) *sigma_end_out = 0.0;
  if (sigma_eq == 0.0) return 0.0;
  double B;
  if (rule == MixityRule::linear) B = (tsh / props.K_sh) / (tn / props.K_n + tsh / props.K_sh);
  else B = (tsh * tsh / props.K_sh) / (tn * tn / props.K_n + tsh * tsh / props.K_sh);
  const double KB = props.K_n * (1.0 - B) + B * props.K_sh;
  const double fn2 = props.f_n * props.f_n / props.K_n;
  const double fs2 = props.f_sh * props.f_sh / props.K_sh;
  const double fB = std::sqrt(KB * (fn2 + (fs2 - fn2) * std::pow(B, props.eta_bk)));
  const double sigma_end = relative_endurance(B, fat.R, fat.epsilon) * fB;
  if (sigma_end_out) *sigma_end_out = sigma_end;
  return sigma_eq / sigma_end;
}

Vec3 compute_shift(const Eigen::Vector3d& sigma, const Vec2& normal, const CohesiveProperties& props) {
  const Eigen::Vector2d t = traction_on(sigma, normal);
  const Vec2 s(normal.y(), -normal.x());
  return Vec3(t.dot(normal) / props.K_n, t.dot(s) / props.K_sh, 0.0);
}

std::vector<InsertionCandidate> insertion_candidates(const Model& model, MixityRule rule) {
  std::vector<InsertionCandidate> out;
  for (size_t e = 0; e < model.mesh.elements.size(); ++e) {
    const auto& el = model.mesh.elements[e];
    if (!el.xfem || model.element_crack[e] >= 0) continue;
    const auto& mat = model.cohesive_materials[model.bulk_materials[el.material].crack_material];
    InsertionCandidate c;
    c.element = static_cast<int>(e);
    c.sigma = model.element_stress(static_cast<int>(e));
    c.f_index = insertion_index(c.sigma, crack_normal(el.angle), mat.props, mat.fatigue, rule, &c.sigma_eq,
                                &c.sigma_end);
    out.push_back(c);
  }
  return out;
}

bool build_crack_geometry(const Mesh& mesh, int e, const Vec2& origin, const Vec2& normal, CrackSegment& out,
                          std::string& reason) {
  const auto& el = mesh.elements[e];
  const int n = el.num_nodes();
  std::array<double, 4> phi{};
  std::array<bool, 4> pos{};
  for (int i = 0; i < n; ++i) {
    phi[i] = (mesh.nodes[el.nodes[i]] - origin).dot(normal);
    pos[i] = phi[i] >= 0.0;
  }
  std::vector<Vec2> cut_x, cut_xi;
  std::vector<Vec2> poly_a, poly_b, phys_a, phys_b;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Vec2& xi_i = detail::parent_vertex(el.type, i);
    const Vec2& x_i = mesh.nodes[el.nodes[i]];
    (pos[i] ? poly_a : poly_b).push_back(xi_i);
    (pos[i] ? phys_a : phys_b).push_back(x_i);
    if (pos[i] != pos[j]) {
      const double t = phi[i] / (phi[i] - phi[j]);
      const Vec2 x = x_i + t * (mesh.nodes[el.nodes[j]] - x_i);
      const Vec2 xi = xi_i + t * (detail::parent_vertex(el.type, j) - xi_i);
      cut_x.push_back(x);
      cut_xi.push_back(xi);
      poly_a.push_back(xi);
      poly_b.push_back(xi);
      phys_a.push_back(x);
      phys_b.push_back(x);
    }
  }
  if (cut_x.size() != 2) {
    reason = "crack line does not cross two element edges";
    return false;
  }
  const double area = polygon_area(phys_a) + polygon_area(phys_b);
  if (std::min(polygon_area(phys_a), polygon_area(phys_b)) < kMinPartFraction * area) {
    reason = "crack line cuts off a sliver of the element";
    return false;
  }
  out.element = e;
  out.normal = normal;
  out.origin = origin;
  const Vec2 tangent(normal.y(), -normal.x());
  const bool forward = (cut_x[1] - cut_x[0]).dot(tangent) >= 0.0;
  out.x0 = forward ? cut_x[0] : cut_x[1];
  out.x1 = forward ? cut_x[1] : cut_x[0];
  out.xi0 = forward ? cut_xi[0] : cut_xi[1];
  out.xi1 = forward ? cut_xi[1] : cut_xi[0];
  out.tris_a = fan(poly_a);
  out.tris_b = fan(poly_b);
  return true;
}

InsertionReport insert_cracks(Model& model, std::vector<InsertionCandidate> candidates,
                              const InsertionOptions& opt, double N, int step) {
  InsertionReport report;
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.f_index != b.f_index) return a.f_index > b.f_index;
    return a.element < b.element;
  });

  // Edge adjacency of bulk elements.
  std::map<std::pair<int, int>, std::vector<int>> edges;
  for (size_t e = 0; e < model.mesh.elements.size(); ++e) {
    const auto& el = model.mesh.elements[e];
    for (int i = 0; i < el.num_nodes(); ++i) {
      int a = el.nodes[i], b = el.nodes[(i + 1) % el.num_nodes()];
      if (a > b) std::swap(a, b);
      edges[{a, b}].push_back(static_cast<int>(e));
    }
  }
  auto neighbours = [&](int e) {
    std::set<int> out;
    const auto& el = model.mesh.elements[e];
    for (int i = 0; i < el.num_nodes(); ++i) {
      int a = el.nodes[i], b = el.nodes[(i + 1) % el.num_nodes()];
      if (a > b) std::swap(a, b);
      for (int f : edges[{a, b}])
        if (f != e) out.insert(f);
    }
    return out;
  };

  int count = 0;
  for (const auto& cand : candidates) {
    if (!(cand.f_index > 1.0)) break;
    if (count >= opt.max_per_step) break;
    const int e = cand.element;
    if (model.element_crack[e] >= 0) continue;
    const auto& el = model.mesh.elements[e];
    const Vec2 n = crack_normal(el.angle);

    CrackSegment seg;
    int crack_id = -1;
    std::string why;
    for (int nb : neighbours(e)) {
      const int ci = model.element_crack[nb];
      if (ci < 0) continue;
      const auto& c = model.cracks[ci];
      if (c.ply != el.ply || std::abs(c.normal.dot(n)) < 1.0 - 1e-9) continue;
      CrackSegment trial;
      if (build_crack_geometry(model.mesh, e, c.origin, c.normal, trial, why)) {
        seg = trial;
        crack_id = c.crack_id;
        break;
      }
    }
    if (crack_id < 0 && !build_crack_geometry(model.mesh, e, model.mesh.element_centroid(e), n, seg, why)) {
      std::ostringstream os;
      os << "element " << e << ": insertion skipped, " << why;
      report.diagnostics.push_back(os.str());
      continue;
    }

    // Spacing to other parallel cracks in the same ply.
    const Vec2 mid = 0.5 * (seg.x0 + seg.x1);
    bool blocked = false;
    for (const auto& c : model.cracks) {
      if (c.ply != el.ply || c.crack_id == crack_id || std::abs(c.normal.dot(n)) < 1.0 - 1e-9) continue;
      const double d_perp = std::abs((mid - c.origin).dot(c.normal));
      const double d_par = std::abs((mid - 0.5 * (c.x0 + c.x1)).dot(c.tangent()));
      if (d_perp < opt.l_c && d_par < opt.l_c) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    if (crack_id < 0) crack_id = model.next_crack_id++;

    seg.crack_id = crack_id;
    seg.ply = el.ply;
    seg.f_index = cand.f_index;
    seg.N_inserted = N;
    seg.step_inserted = step;
    for (int i = 0; i < el.num_nodes(); ++i) {
      const int node = el.nodes[i];
      const bool positive = (model.mesh.nodes[node] - seg.origin).dot(seg.normal) >= 0.0;
      const int phantom = model.add_phantom_node(crack_id, node);
      seg.nodes_a[i] = positive ? node : phantom;
      seg.nodes_b[i] = positive ? phantom : node;
    }
    const int cm = model.bulk_materials[el.material].crack_material;
    const auto& props = model.cohesive_materials[cm].props;
    seg.shift = compute_shift(cand.sigma, seg.normal, props);
    const double half_length = 0.5 * (seg.x1 - seg.x0).norm();
    const int crack_index = static_cast<int>(model.cracks.size());
    for (int k = 0; k < 2; ++k) {
      CohesivePoint p;
      p.owner = PointOwner::crack;
      p.owner_index = crack_index;
      p.local = k;
      p.material = cm;
      p.weight = half_length * model.bulk_materials[el.material].thickness;
      p.shift = seg.shift;
      p.state.B_last = mode_mixity_from_jump(seg.shift, props.K_n, props.K_sh, 0.0);
      p.state.jump_prev = seg.shift;
      p.trial = p.state;
      seg.points[k] = static_cast<int>(model.points.size());
      model.points.push_back(p);
    }
    model.cracks.push_back(std::move(seg));
    model.element_crack[e] = crack_index;
    model.invalidate_pattern();
    report.inserted.push_back(crack_index);
    ++count;
  }
  return report;
}

Eigen::Vector2d cracked_displacement(const Model& model, int crack, const Vec2& xi, bool side_a) {
  const auto& cr = model.cracks[crack];
  const auto& el = model.mesh.elements[cr.element];
  const auto sh = detail::shape(el.type, xi);
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  for (int i = 0; i < el.num_nodes(); ++i)
    u += sh.N[i] * model.u.segment<2>(2 * (side_a ? cr.nodes_a[i] : cr.nodes_b[i]));
  return u;
}

CrackedFields cracked_element_fields(const Model& model, int crack) {
  const auto& cr = model.cracks[crack];
  CrackedFields f;
  for (int k = 0; k < 2; ++k) {
    const double s = detail::segment_gauss_position(k);
    const Vec2 xi = cr.xi0 + s * (cr.xi1 - cr.xi0);
    f.points[k] = cr.x0 + s * (cr.x1 - cr.x0);
    f.u_a[k] = cracked_displacement(model, crack, xi, true);
    f.u_b[k] = cracked_displacement(model, crack, xi, false);
    const Eigen::Vector2d j = f.u_a[k] - f.u_b[k];
    f.jump[k] = Vec3(j.dot(cr.normal), j.dot(cr.tangent()), 0.0);
  }
  return f;
}

}  // namespace fatiguecz
