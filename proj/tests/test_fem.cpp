#include <gtest/gtest.h>

#include <cmath>

#include "fatiguecz/mesh.hpp"
#include "fatiguecz/model.hpp"
#include "fatiguecz/quadrature.hpp"
#include "fatiguecz/xfem.hpp"

using namespace fatiguecz;

namespace {

CohesiveMaterial example_a_crack() {
  CohesiveMaterial c;
  c.props = CohesiveProperties::from_normal_stiffness(1e4, 10.0, 10.0, 0.1, 0.1, 1.0);
  c.fatigue.eta_brittle = 0.8;
  c.fatigue.epsilon = 0.2;
  c.fatigue.R = 0.1;
  return c;
}

// Three-quad bar, unit squares, middle element XFEM, fibers along y.
Model example_a_model() {
  Model m;
  m.mesh = make_bar_mesh(3, 1.0, 1.0, 1, 90.0);
  auto bulk = BulkMaterial::isotropic(1e4, 0.0, Formulation::plane_stress);
  bulk.crack_material = 0;
  m.bulk_materials = {bulk};
  m.cohesive_materials = {example_a_crack()};
  m.initialize();
  m.prescribe("left", 0, 0.0);
  m.prescribe("origin", 1, 0.0);
  return m;
}

double tri_area(const std::array<Vec2, 3>& t) {
  const Vec2 a = t[1] - t[0], b = t[2] - t[0];
  return 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
}

}  // namespace

TEST(Quadrature, NewtonCotesWeights) {
  const auto q = newton_cotes_line(3);
  ASSERT_EQ(q.size(), 3u);
  EXPECT_DOUBLE_EQ(q[0].w, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(q[1].w, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(q[2].w, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(q[0].xi, -1.0);
  EXPECT_DOUBLE_EQ(q[2].xi, 1.0);
}

TEST(Quadrature, TriangleRuleIntegratesQuadratics) {
  const auto q = triangle_rule(2);
  double s = 0.0;
  for (const auto& p : q) s += p.w * p.xi.x() * p.xi.y();
  EXPECT_NEAR(s, 1.0 / 24.0, 1e-15);
}

TEST(Mesh, ParseFormatRoundTrip) {
  const std::string text =
      "# two triangles\n"
      "nodes 4\n0 0\n1 0\n1 1\n0 1\n"
      "elements 2\n"
      "tri3 0 30 0 1 0 1 2\n"
      "tri3 0 30 0 0 0 2 3\n"
      "group left 2\n0 3\n";
  const Mesh m = parse_mesh(text);
  EXPECT_EQ(m.nodes.size(), 4u);
  EXPECT_EQ(m.elements.size(), 2u);
  EXPECT_TRUE(m.elements[0].xfem);
  EXPECT_DOUBLE_EQ(m.elements[1].angle, 30.0);
  const Mesh m2 = parse_mesh(format_mesh(m));
  EXPECT_EQ(format_mesh(m2), format_mesh(m));
  EXPECT_EQ(m2.group("left"), (std::vector<int>{0, 3}));
}

TEST(Mesh, ParseErrorReportsLine) {
  try {
    parse_mesh("nodes 2\n0 0\n1 x\n", "bad.mesh");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::parse);
    EXPECT_NE(std::string(e.what()).find("bad.mesh:3"), std::string::npos) << e.what();
  }
}

TEST(Mesh, UnknownGroupIsLookupError) {
  const Mesh m = make_bar_mesh(1, 1.0, 1.0, -1, 0.0);
  try {
    m.group("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::lookup);
  }
}

TEST(Mesh, GeneratorsValidate) {
  const Mesh dcb = make_dcb_mesh(DcbGeometry{});
  EXPECT_GT(dcb.interfaces.size(), 100u);
  const Mesh oh = make_open_hole_mesh(OpenHoleGeometry{});
  EXPECT_EQ(oh.surfaces.size() * 2, oh.elements.size());
  double area = 0.0;
  for (size_t e = 0; e < oh.elements.size() / 2; ++e) area += oh.element_area(static_cast<int>(e));
  const double hole = M_PI * 3.2 * 3.2;
  EXPECT_NEAR(area, 38.0 * 16.0 - hole, 0.02 * hole);
}

TEST(Model, QuadPatchTestOneIteration) {
  Model m;
  m.mesh = make_bar_mesh(3, 1.0, 1.0, -1, 0.0);
  m.bulk_materials = {BulkMaterial::isotropic(1000.0, 0.3, Formulation::plane_stress)};
  m.initialize();
  m.prescribe("left", 0, 0.0);
  m.prescribe("origin", 1, 0.0);
  m.prescribe("right", 0, 0.03);
  const auto r = newton_solve(m, 1.0, 0.0, SolveOptions{});
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_EQ(r.iterations, 1);
  for (int e = 0; e < 3; ++e) {
    const auto s = m.element_stress(e);
    EXPECT_NEAR(s[0], 10.0, 1e-9);
    EXPECT_NEAR(s[1], 0.0, 1e-9);
    EXPECT_NEAR(s[2], 0.0, 1e-9);
  }
  EXPECT_NEAR(reaction_force(m, "right", 0), 10.0, 1e-9);
  EXPECT_NEAR(reaction_force(m, "left", 0), -10.0, 1e-9);
}

TEST(Model, TriPatchTestRotatedOrthotropic) {
  Mesh mesh = parse_mesh(
      "nodes 5\n0 0\n2 0\n2 1\n0 1\n0.7 0.4\n"
      "elements 4\n"
      "tri3 0 30 0 0 0 1 4\n"
      "tri3 0 30 0 0 1 2 4\n"
      "tri3 0 30 0 0 2 3 4\n"
      "tri3 0 30 0 0 3 0 4\n");
  BulkMaterial mat;
  mat.E1 = 140000.0;
  mat.E2 = 9000.0;
  mat.G12 = 5000.0;
  mat.nu12 = 0.3;
  Model m;
  m.mesh = mesh;
  m.bulk_materials = {mat};
  m.initialize();
  // Linear displacement field on the boundary.
  const Eigen::Matrix2d grad{{1e-3, 2e-4}, {-5e-4, 3e-4}};
  for (int node : {0, 1, 2, 3}) {
    const Vec2 uu = grad * m.mesh.nodes[node];
    m.prescribed.push_back({2 * node, uu.x()});
    m.prescribed.push_back({2 * node + 1, uu.y()});
  }
  const auto r = newton_solve(m, 1.0, 0.0, SolveOptions{});
  ASSERT_TRUE(r.converged) << r.message;
  const Vec2 u4 = grad * m.mesh.nodes[4];
  EXPECT_NEAR(m.u[8], u4.x(), 1e-12);
  EXPECT_NEAR(m.u[9], u4.y(), 1e-12);
  const Eigen::Vector3d eps(grad(0, 0), grad(1, 1), grad(0, 1) + grad(1, 0));
  const Eigen::Vector3d sigma = mat.stiffness(30.0) * eps;
  for (int e = 0; e < 4; ++e) EXPECT_LT((m.element_stress(e) - sigma).norm(), 1e-9 * sigma.norm());
}

TEST(Model, InterfacePointWeightsAndJump) {
  // Two unit quads stacked with an interface of length 2 along y = 0.
  Mesh mesh = parse_mesh(
      "nodes 12\n"
      "0 -1\n1 -1\n2 -1\n0 0\n1 0\n2 0\n"
      "0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n"
      "elements 4\n"
      "quad4 0 0 0 0 0 1 4 3\n"
      "quad4 0 0 0 0 1 2 5 4\n"
      "quad4 0 0 0 0 6 7 10 9\n"
      "quad4 0 0 0 0 7 8 11 10\n"
      "interfaces 2\n"
      "0 3 4 6 7\n"
      "0 4 5 7 8\n");
  Model m;
  m.mesh = mesh;
  m.bulk_materials = {BulkMaterial::isotropic(1000.0, 0.0, Formulation::plane_stress)};
  CohesiveMaterial c = example_a_crack();
  c.thickness = 2.0;
  m.cohesive_materials = {c};
  m.initialize();
  ASSERT_EQ(m.points.size(), 6u);
  EXPECT_NEAR(m.points[0].weight, 1.0 / 3.0 * 0.5 * 1.0 * 2.0, 1e-15);
  EXPECT_NEAR(m.points[1].weight, 4.0 / 3.0 * 0.5 * 1.0 * 2.0, 1e-15);
  // Open the upper nodes by a uniform normal jump and a linear shear jump.
  for (int node : {6, 7, 8}) {
    m.u[2 * node + 1] = 1e-4;
    m.u[2 * node] = 1e-5 * m.mesh.nodes[node].x();
  }
  const Vec3 j = m.point_jump(1);
  EXPECT_NEAR(j[0], 1e-4, 1e-16);
  EXPECT_NEAR(std::abs(j[1]), 0.5e-5, 1e-16);
  // Internal force on the interface nodes integrates t = K jump exactly.
  m.assemble(0.0, 0.0);
  double fy_upper = 0.0;
  for (int node : {6, 7, 8}) fy_upper += m.f_int[2 * node + 1];
  double fy_iface = 0.0;
  for (const auto& p : m.points) fy_iface += p.weight * p.traction[0];
  EXPECT_NEAR(fy_iface, 1e4 * 1e-4 * 2.0 * 2.0, 1e-9);
  EXPECT_GT(fy_upper, 0.0);
}

TEST(Model, SofteningBarOneInterface) {
  // Two quads joined by a vertical interface, pulled in x beyond full decohesion.
  Mesh mesh = parse_mesh(
      "nodes 8\n"
      "0 0\n1 0\n1 1\n0 1\n"
      "1 0\n2 0\n2 1\n1 1\n"
      "elements 2\n"
      "quad4 0 0 0 0 0 1 2 3\n"
      "quad4 0 0 0 0 4 5 6 7\n"
      "interfaces 1\n"
      "0 2 1 7 4\n"
      "group left 2\n0 3\ngroup right 2\n5 6\ngroup origin 1\n0\n");
  Model m;
  m.mesh = mesh;
  m.bulk_materials = {BulkMaterial::isotropic(1e6, 0.0, Formulation::plane_stress)};
  m.cohesive_materials = {example_a_crack()};
  m.initialize();
  m.prescribe("left", 0, 0.0);
  m.prescribe("left", 1, 0.0);
  m.prescribe("right", 1, 0.0);
  m.prescribe("right", 0, 0.03);
  const auto& p = m.cohesive_materials[0].props;
  double peak = 0.0;
  for (int s = 1; s <= 600; ++s) {
    const auto r = newton_solve(m, s / 600.0, 0.0, SolveOptions{});
    ASSERT_TRUE(r.converged) << "step " << s << ": " << r.message;
    m.commit();
    peak = std::max(peak, reaction_force(m, "right", 0));
  }
  EXPECT_NEAR(peak, p.f_n, 0.05);
  EXPECT_NEAR(reaction_force(m, "right", 0), 0.0, 1e-6);
  EXPECT_NEAR(dissipated_energy(m), p.G_Ic, 1e-9);
}

TEST(Xfem, InsertionIndexPureModes) {
  const auto mat = example_a_crack();
  const double E = relative_endurance(0.0, mat.fatigue.R, mat.fatigue.epsilon);
  EXPECT_NEAR(E, 0.357142857142857, 1e-12);
  const Vec2 n(1.0, 0.0);
  double seq = 0.0, send = 0.0;
  const double f = insertion_index(Eigen::Vector3d(10.0 * E, 0.0, 0.0), n, mat.props, mat.fatigue,
                                   MixityRule::linear, &seq, &send);
  EXPECT_NEAR(f, 1.0, 1e-12);
  EXPECT_NEAR(send, 10.0 * E, 1e-12);
  // Compression normal to the crack does not count.
  EXPECT_EQ(insertion_index(Eigen::Vector3d(-5.0, 3.0, 0.0), n, mat.props, mat.fatigue), 0.0);
  // Pure shear uses the shear strength and the mode II endurance.
  const double E2 = relative_endurance(1.0, mat.fatigue.R, mat.fatigue.epsilon);
  EXPECT_NEAR(insertion_index(Eigen::Vector3d(0.0, 0.0, 10.0 * E2), n, mat.props, mat.fatigue), 1.0, 1e-9);
}

TEST(Xfem, ShiftMatchesTraction) {
  const auto mat = example_a_crack();
  const Vec2 n(0.6, 0.8);
  const Eigen::Vector3d s(3.0, 1.0, 0.5);
  const Vec3 d = compute_shift(s, n, mat.props);
  const Vec2 t(s[0] * n.x() + s[2] * n.y(), s[2] * n.x() + s[1] * n.y());
  EXPECT_NEAR(d[0] * mat.props.K_n, t.dot(n), 1e-12);
  EXPECT_NEAR(d[1] * mat.props.K_sh, t.dot(Vec2(n.y(), -n.x())), 1e-12);
}

TEST(Xfem, SubDomainsPartitionElement) {
  const Mesh mesh = make_bar_mesh(1, 1.0, 1.0, 0, 30.0);
  for (const Vec2 origin : {Vec2(0.5, 0.5), Vec2(0.2, 0.7), Vec2(0.9, 0.1)}) {
    CrackSegment seg;
    std::string why;
    ASSERT_TRUE(build_crack_geometry(mesh, 0, origin, crack_normal(30.0), seg, why)) << why;
    double a = 0.0, b = 0.0;
    for (const auto& t : seg.tris_a) a += tri_area(t);
    for (const auto& t : seg.tris_b) b += tri_area(t);
    EXPECT_NEAR(a + b, 4.0, 1e-12);  // parent square [-1, 1]^2
    EXPECT_GT(a, 0.0);
    EXPECT_GT(b, 0.0);
    EXPECT_NEAR((seg.x0 - origin).dot(seg.normal), 0.0, 1e-12);
    EXPECT_NEAR((seg.x1 - origin).dot(seg.normal), 0.0, 1e-12);
    EXPECT_GT((seg.x1 - seg.x0).dot(seg.tangent()), 0.0);
  }
  CrackSegment seg;
  std::string why;
  EXPECT_FALSE(build_crack_geometry(mesh, 0, Vec2(5.0, 5.0), crack_normal(30.0), seg, why));
  EXPECT_FALSE(why.empty());
  // A line through a corner leaves a sliver.
  EXPECT_FALSE(build_crack_geometry(mesh, 0, Vec2(0.001, 0.0), Vec2(std::sqrt(0.5), std::sqrt(0.5)), seg, why));
}

TEST(Xfem, ExampleAInsertionIsExactlyContinuous) {
  Model m = example_a_model();
  const double sigma = 10.0 * 0.357142857142857 * 1.01;
  m.apply_force("right", 0, sigma);
  auto r = newton_solve(m, 1.0, 0.0, SolveOptions{});
  ASSERT_TRUE(r.converged) << r.message;
  m.commit();
  const Vector u_before = m.u;
  auto cands = insertion_candidates(m);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_NEAR(cands[0].f_index, 1.01, 1e-9);
  const auto rep = insert_cracks(m, cands, InsertionOptions{1.0, 100});
  ASSERT_EQ(rep.inserted.size(), 1u);
  ASSERT_EQ(m.cracks.size(), 1u);
  EXPECT_EQ(m.mesh.nodes.size(), 8u + 4u);
  const auto& cr = m.cracks[0];
  EXPECT_NEAR(cr.x0.x(), 1.5, 1e-12);
  EXPECT_NEAR(cr.shift[0] * m.cohesive_materials[0].props.K_n, sigma, 1e-9);

  // The shifted law carries the current stress with zero extra opening.
  r = newton_solve(m, 1.0, 0.0, SolveOptions{});
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_LE(r.iterations, 1);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(m.u[i], u_before[i], 1e-12);
  const auto f = cracked_element_fields(m, 0);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR((f.u_a[k] - f.u_b[k]).norm(), 0.0, 1e-12);
    const auto& p = m.points[cr.points[k]];
    EXPECT_NEAR(p.traction[0], sigma, 1e-9);
    EXPECT_NEAR(p.traction[1], 0.0, 1e-9);
  }
  EXPECT_NEAR(reaction_force(m, "left", 0), -sigma, 1e-9);
}

TEST(Xfem, InsertionRespectsCapAndOrdering) {
  Model m;
  m.mesh = make_bar_mesh(150, 1.0, 1.0, -1, 90.0);
  for (auto& el : m.mesh.elements) el.xfem = true;
  auto bulk = BulkMaterial::isotropic(1e4, 0.0, Formulation::plane_stress);
  bulk.crack_material = 0;
  m.bulk_materials = {bulk};
  m.cohesive_materials = {example_a_crack()};
  m.initialize();
  std::vector<InsertionCandidate> cands;
  for (int e = 0; e < 150; ++e) {
    InsertionCandidate c;
    c.element = e;
    c.sigma = Eigen::Vector3d(4.0, 0.0, 0.0);
    c.f_index = 1.5 + (e % 7) * 0.01;
    cands.push_back(c);
  }
  const auto rep = insert_cracks(m, cands, InsertionOptions{0.0, 100});
  EXPECT_EQ(rep.inserted.size(), 100u);
  // Highest indices first, ties by element id.
  EXPECT_EQ(m.cracks[0].element, 6);
  EXPECT_EQ(m.cracks[1].element, 13);
  for (size_t i = 1; i < m.cracks.size(); ++i) EXPECT_GE(m.cracks[i - 1].f_index, m.cracks[i].f_index);
}

TEST(Xfem, SpacingBlocksNearbyParallelCracks) {
  Model m;
  m.mesh = make_bar_mesh(10, 1.0, 1.0, -1, 90.0);
  for (auto& el : m.mesh.elements) el.xfem = true;
  auto bulk = BulkMaterial::isotropic(1e4, 0.0, Formulation::plane_stress);
  bulk.crack_material = 0;
  m.bulk_materials = {bulk};
  m.cohesive_materials = {example_a_crack()};
  m.initialize();
  std::vector<InsertionCandidate> cands;
  for (int e = 0; e < 10; ++e) {
    InsertionCandidate c;
    c.element = e;
    c.sigma = Eigen::Vector3d(4.0, 0.0, 0.0);
    c.f_index = e == 4 ? 2.0 : 1.5;
    cands.push_back(c);
  }
  insert_cracks(m, cands, InsertionOptions{2.5, 100});
  std::vector<int> cracked;
  for (const auto& c : m.cracks) cracked.push_back(c.element);
  // Crack centers 1 mm apart; spacing 2.5 mm leaves every third element.
  EXPECT_EQ(cracked, (std::vector<int>{4, 0, 7}));
}

TEST(Xfem, CrackExtendsIntoNeighbourAlongLine) {
  // Column of two quads along y with fibers along x: a horizontal crack in the
  // lower element does not reach the upper one; a vertical stack with fibers along y does.
  Model m;
  m.mesh = parse_mesh(
      "nodes 6\n0 0\n1 0\n1 1\n0 1\n0 2\n1 2\n"
      "elements 2\n"
      "quad4 0 90 0 1 0 1 2 3\n"
      "quad4 0 90 0 1 3 2 5 4\n");
  auto bulk = BulkMaterial::isotropic(1e4, 0.0, Formulation::plane_stress);
  bulk.crack_material = 0;
  m.bulk_materials = {bulk};
  m.cohesive_materials = {example_a_crack()};
  m.initialize();
  std::vector<InsertionCandidate> cands(2);
  cands[0].element = 0;
  cands[0].f_index = 2.0;
  cands[1].element = 1;
  cands[1].f_index = 1.5;
  insert_cracks(m, cands, InsertionOptions{5.0, 100});
  ASSERT_EQ(m.cracks.size(), 2u);
  EXPECT_EQ(m.cracks[0].crack_id, m.cracks[1].crack_id);
  EXPECT_NEAR((m.cracks[0].x1 - m.cracks[1].x0).norm(), 0.0, 1e-12);
  // Shared nodes on the crack line get the same phantom.
  EXPECT_EQ(m.mesh.nodes.size(), 6u + 6u);
}
