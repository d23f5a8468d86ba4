#include <gtest/gtest.h>

#include <cmath>

#include "fatiguecz/driver.hpp"
#include "fatiguecz/mesh.hpp"

using namespace fatiguecz;

namespace {

Model bar_model(double stress) {
  Model m;
  m.mesh = make_bar_mesh(3, 1.0, 1.0, 1, 90.0);
  auto bulk = BulkMaterial::isotropic(1e4, 0.0, Formulation::plane_stress);
  bulk.crack_material = 0;
  m.bulk_materials = {bulk};
  CohesiveMaterial c;
  c.props = CohesiveProperties::from_normal_stiffness(1e4, 10.0, 10.0, 0.1, 0.1, 1.0);
  c.fatigue.eta_brittle = 0.8;
  c.fatigue.epsilon = 0.2;
  c.fatigue.R = 0.1;
  c.fatigue.p_rule = PRule::coupled(0.0);
  c.fatigue.gamma = 1e7;
  m.cohesive_materials = {c};
  m.initialize();
  m.prescribe("left", 0, 0.0);
  m.prescribe("origin", 1, 0.0);
  m.apply_force("right", 0, stress);
  return m;
}

}  // namespace

TEST(Controller, SpecExamples) {
  CycleStepController c;
  EXPECT_DOUBLE_EQ(c.next_increment(10.0, 4), 10.0);
  EXPECT_DOUBLE_EQ(c.next_increment(10.0, 2), 20.0);
  EXPECT_DOUBLE_EQ(c.next_increment(10.0, 8), 2.5);
  EXPECT_DOUBLE_EQ(c.next_increment(1e6, 1), 1e6);
  EXPECT_DOUBLE_EQ(c.next_increment(1e-3, 10), 1e-3);
}

TEST(Controller, RejectsInvalidParameters) {
  CycleStepController c;
  c.c_red = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.dN_init = 1e7;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.C = 1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Driver, BelowEnduranceGrowsToMaxIncrement) {
  Model m = bar_model(3.0);  // below sigma_end = 3.57 MPa: no crack, no fatigue
  LoadProgram prog;
  prog.N_max = 1e8;
  prog.measure_group = "right";
  CycleStepController ctl;
  const auto res = run(prog, ctl, m);
  EXPECT_EQ(res.reason, EndReason::n_max);
  EXPECT_TRUE(m.cracks.empty());
  // Once at dN_max the increment stays there; the last step is clipped to N_max.
  const auto& h = res.history;
  ASSERT_GE(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h[h.size() - 2].dN, 1e6);
  bool at_max = false;
  for (size_t i = 0; i + 1 < h.size(); ++i) {
    if (at_max) EXPECT_DOUBLE_EQ(h[i].dN, 1e6);
    at_max = at_max || h[i].dN == 1e6;
  }
  EXPECT_DOUBLE_EQ(res.N_end, 1e8);
  for (size_t i = 1; i < res.history.size(); ++i) EXPECT_GT(res.history[i].N, res.history[i - 1].N - 1e-300);
  EXPECT_NEAR(res.history.back().stiffness, 1e4 / 3.0, 1e-6);
}

TEST(Driver, ExampleAAdaptiveFailureAtFactor06) {
  const double s = 0.6;
  Model m = bar_model(10.0 * s);
  LoadProgram prog;
  prog.locate_failure = true;
  CycleStepController ctl;
  const auto res = run(prog, ctl, m);
  ASSERT_EQ(res.reason, EndReason::failure);
  const double oracle = 15062.48;
  EXPECT_NEAR(res.N_fail / oracle, 1.0, 0.03) << res.N_fail;
  int cyclic = 0;
  for (const auto& r : res.history) cyclic += !r.ramp;
  EXPECT_LE(cyclic, 60);
  ASSERT_EQ(m.cracks.size(), 1u);
}

TEST(Driver, StallRaisesAnalysisStalled) {
  Model m = bar_model(6.0);
  LoadProgram prog;
  CycleStepController ctl;
  ctl.n_iter_max = 1;  // every damaging step needs more than one iteration
  ctl.dN_init = 10.0;
  ctl.dN_min = 1.0;
  try {
    run(prog, ctl, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::analysis_stalled);
  }
}

TEST(Driver, CancelledStepRestoresStateExactly) {
  Model m = bar_model(6.0);
  LoadProgram prog;
  prog.adaptive = false;
  prog.fixed_policy = CutPolicy::stop;
  prog.max_steps = 3;
  CycleStepController ctl;
  ctl.dN_init = 1000.0;
  std::vector<Vector> states;
  RunHooks hooks;
  hooks.on_commit = [&](const Model& mm, const StepRecord&) { states.push_back(mm.u); };
  const auto res = run(prog, ctl, m, hooks);
  ASSERT_FALSE(states.empty());
  EXPECT_EQ(m.u, states.back());
  EXPECT_TRUE(res.reason == EndReason::max_steps || res.reason == EndReason::non_convergence);
}
