#pragma once

// Analysis driver: static ramp to the maximum load, then a cyclic phase in which
// the cycle increment adapts to the number of global Newton iterations.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fatiguecz/model.hpp"
#include "fatiguecz/xfem.hpp"

namespace fatiguecz {

/// Adaptive cycle-increment rule dN <- C^(-(n_iter - n_opt)/xi) dN, clamped.
struct CycleStepController {
  double C = 2.0;
  double xi = 2.0;
  int n_iter_opt = 4;
  int n_iter_max = 10;
  double c_red = 0.6;
  double dN_min = 1e-3;
  double dN_max = 1e6;
  double dN_init = 0.1;

  void validate() const;
  double next_increment(double dN_current, int n_iter) const;
};

enum class CutPolicy { cut, stop };

struct LoadProgram {
  int ramp_steps = 10;     // static increments to the maximum load
  int ramp_max_cuts = 8;   // halvings of a failed ramp increment
  double R = 0.1;          // global load ratio, informational for the material
  double N_max = 1e7;      // end: cycles
  double stiffness_floor = 0.0;  // end: stiffness below this fraction of the ramp-end value
  bool stop_at_failure = true;   // end: a crack segment fully damaged
  int max_steps = std::numeric_limits<int>::max();  // committed cyclic steps

  bool adaptive = true;              // false: constant dN = controller.dN_init
  CutPolicy fixed_policy = CutPolicy::stop;  // fixed dN: what to do on non-convergence
  bool locate_failure = false;       // refine dN down to dN_min around the failure event

  bool insertion = true;
  InsertionOptions insertion_options;
  MixityRule mixity = MixityRule::linear;

  // Stiffness measure: force and mean displacement of a node group component.
  std::string measure_group;
  int measure_component = 0;

  void validate() const;
};

struct StepRecord {
  int step = 0;
  bool ramp = false;
  double N = 0.0;
  double dN = 0.0;
  int iterations = 0;
  int cuts = 0;
  double load_factor = 0.0;
  double force = 0.0;
  double displacement = 0.0;
  double stiffness = 0.0;
  double energy = 0.0;
  int cracks = 0;
  int inserted = 0;
  double damaged_length = 0.0;  // sum of D * length over line interfaces
  double damaged_area = 0.0;    // sum of D * area over surface interfaces
  double max_damage = 0.0;
  double crack_damage = 0.0;    // largest segment-average D over XFEM cracks
  double insertion_residual = 0.0;  // free residual / reference force right after insertion
};

struct RunEvent {
  int step = 0;
  double N = 0.0;
  std::string kind;
  std::string message;
};

enum class EndReason { none, n_max, stiffness_floor, failure, max_steps, non_convergence };

std::string_view end_reason_name(EndReason r);

struct RunResult {
  std::vector<StepRecord> history;
  std::vector<RunEvent> events;
  EndReason reason = EndReason::none;
  double N_end = 0.0;
  double N_fail = std::numeric_limits<double>::quiet_NaN();  // failure cycle if reached
};

struct RunHooks {
  std::function<void(const Model&, const StepRecord&)> on_commit;
  std::function<void(const RunEvent&)> on_event;
};

/// Runs ramp and cyclic phase. Throws Error(analysis_stalled) when dN drops below
/// dN_min and Error(non_convergence) when a ramp increment cannot be subdivided further.
RunResult run(const LoadProgram& program, const CycleStepController& controller, Model& model,
              const RunHooks& hooks = {});

/// Largest segment-average damage over XFEM cracks.
double crack_damage(const Model& model);

/// Force sum and mean displacement of a group component.
std::pair<double, double> group_force_displacement(const Model& model, const std::string& group,
                                                   int component);

}  // namespace fatiguecz
