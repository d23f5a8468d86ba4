#include "fatiguecz/driver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

namespace fatiguecz {

void CycleStepController::validate() const {
  if (!(C > 1.0)) throw invalid_property("controller C must be > 1");
  if (!(xi > 0.0)) throw invalid_property("controller xi must be > 0");
  if (!(c_red > 0.0 && c_red < 1.0)) throw invalid_property("controller c_red must be in (0, 1)");
  if (n_iter_max < 1) throw invalid_property("controller n_iter_max must be >= 1");
  if (!(dN_min > 0.0 && dN_min <= dN_init && dN_init <= dN_max))
    throw invalid_property("controller needs 0 < dN_min <= dN_init <= dN_max");
}

double CycleStepController::next_increment(double dN_current, int n_iter) const {
  const double f = std::pow(C, -static_cast<double>(n_iter - n_iter_opt) / xi);
  return std::clamp(f * dN_current, dN_min, dN_max);
}

void LoadProgram::validate() const {
  if (ramp_steps < 1) throw invalid_property("ramp_steps must be >= 1");
  if (!(R < 1.0)) throw invalid_property("load ratio R must be < 1");
  if (!(N_max >= 0.0)) throw invalid_property("N_max must be >= 0");
  if (!(stiffness_floor >= 0.0 && stiffness_floor < 1.0))
    throw invalid_property("stiffness_floor must be in [0, 1)");
  if (max_steps < 0) throw invalid_property("max_steps must be >= 0");
}

std::string_view end_reason_name(EndReason r) {
  switch (r) {
    case EndReason::none: return "none";
    case EndReason::n_max: return "n_max";
    case EndReason::stiffness_floor: return "stiffness_floor";
    case EndReason::failure: return "failure";
    case EndReason::max_steps: return "max_steps";
    case EndReason::non_convergence: return "non_convergence";
  }
  return "unknown";
}

double crack_damage(const Model& m) {
  double D = 0.0;
  for (const auto& c : m.cracks)
    D = std::max(D, 0.5 * (m.points[c.points[0]].state.D + m.points[c.points[1]].state.D));
  return D;
}

std::pair<double, double> group_force_displacement(const Model& m, const std::string& group, int component) {
  const auto& nodes = m.mesh.group(group);
  double F = 0.0, u = 0.0;
  for (int n : nodes) {
    F += m.f_int[2 * n + component];
    u += m.u[2 * n + component];
  }
  return {F, nodes.empty() ? 0.0 : u / nodes.size()};
}

namespace {

// History needed to cancel a step exactly.
struct Snapshot {
  Vector u, f_int;
  std::vector<CohesivePoint> points;
  std::vector<CrackSegment> cracks;
  std::vector<int> element_crack;
  std::map<std::pair<int, int>, int> phantom_nodes;
  size_t num_nodes = 0;
  int next_crack_id = 0;
  double reference_force = 0.0;
  double load_factor = 0.0;

  explicit Snapshot(const Model& m)
      : u(m.u),
        f_int(m.f_int),
        points(m.points),
        cracks(m.cracks),
        element_crack(m.element_crack),
        phantom_nodes(m.phantom_nodes),
        num_nodes(m.mesh.nodes.size()),
        next_crack_id(m.next_crack_id),
        reference_force(m.reference_force),
        load_factor(m.load_factor) {}

  void restore(Model& m) const {
    const bool topology_changed = m.cracks.size() != cracks.size();
    m.u = u;
    m.f_int = f_int;
    m.points = points;
    m.cracks = cracks;
    m.element_crack = element_crack;
    m.phantom_nodes = phantom_nodes;
    m.mesh.nodes.resize(num_nodes);
    m.next_crack_id = next_crack_id;
    m.reference_force = reference_force;
    m.load_factor = load_factor;
    if (topology_changed) m.invalidate_pattern();
  }
};

class Runner {
 public:
  Runner(const LoadProgram& p, const CycleStepController& c, Model& m, const RunHooks& h)
      : prog_(p), ctl_(c), m_(m), hooks_(h) {
    opt_.max_iterations = ctl_.n_iter_max;
    has_xfem_ = std::any_of(m_.mesh.elements.begin(), m_.mesh.elements.end(),
                            [](const BulkElement& e) { return e.xfem; });
  }

  RunResult run() {
    if (!ramp()) return finish();
    cyclic();
    return finish();
  }

 private:
  void event(const std::string& kind, const std::string& msg) {
    RunEvent ev{step_, N_, kind, msg};
    spdlog::info("[step {} N={:.6g}] {}: {}", step_, N_, kind, msg);
    if (hooks_.on_event) hooks_.on_event(ev);
    res_.events.push_back(std::move(ev));
  }

  static constexpr int kReequilibrationLineSearch = 8;
  double insertion_residual_ = 0.0;  // of the step being built

  // Insertion round at the current committed state; re-equilibrates at dN = 0.
  bool insert_and_reequilibrate(int& inserted) {
    inserted = 0;
    if (!prog_.insertion || !has_xfem_) return true;
    const auto rep = insert_cracks(m_, insertion_candidates(m_, prog_.mixity), prog_.insertion_options, N_, step_);
    for (const auto& d : rep.diagnostics) event("insertion", d);
    inserted = static_cast<int>(rep.inserted.size());
    if (inserted == 0) return true;
    // New segments soften at once and plain Newton can cycle, so this solve backtracks.
    SolveOptions opt = opt_;
    opt.line_search = kReequilibrationLineSearch;
    const auto r = newton_solve(m_, m_.load_factor, 0.0, opt);
    if (!r.history.empty() && m_.reference_force > 0.0)
      insertion_residual_ = std::max(insertion_residual_, r.history.front() / m_.reference_force);
    if (!r.converged) {
      spdlog::debug("re-equilibration after insertion failed: {}", r.message);
      return false;
    }
    m_.commit();
    return true;
  }

  void record(bool ramp, double dN, int iterations, int cuts, int inserted) {
    StepRecord s;
    s.step = step_;
    s.ramp = ramp;
    s.N = N_;
    s.dN = dN;
    s.iterations = iterations;
    s.cuts = cuts;
    s.load_factor = m_.load_factor;
    if (!prog_.measure_group.empty()) {
      std::tie(s.force, s.displacement) = group_force_displacement(m_, prog_.measure_group, prog_.measure_component);
      s.stiffness = s.displacement != 0.0 ? s.force / s.displacement : 0.0;
    }
    s.energy = dissipated_energy(m_);
    s.cracks = static_cast<int>(m_.cracks.size());
    s.inserted = inserted;
    for (const auto& p : m_.points) {
      s.max_damage = std::max(s.max_damage, p.state.D);
      if (p.owner == PointOwner::interface)
        s.damaged_length += p.state.D * p.weight / m_.cohesive_materials[p.material].thickness;
      else if (p.owner == PointOwner::surface)
        s.damaged_area += p.state.D * p.weight;
    }
    s.crack_damage = crack_damage(m_);
    s.insertion_residual = insertion_residual_;
    insertion_residual_ = 0.0;
    spdlog::debug("step {} N={:.9g} dN={:.6g} iter={} cuts={} F={:.6g} D_max={:.6g} cracks={}", s.step, s.N,
                  s.dN, s.iterations, s.cuts, s.force, s.max_damage, s.cracks);
    res_.history.push_back(s);
    if (hooks_.on_commit) hooks_.on_commit(m_, s);
  }

  bool failed() const { return prog_.stop_at_failure && crack_damage(m_) >= 1.0 - 1e-9; }

  // Static ramp to load factor 1. Returns false when the analysis ended during the ramp.
  bool ramp() {
    const double base = 1.0 / prog_.ramp_steps;
    double lf = 0.0, dlf = base;
    int cuts = 0;
    while (lf < 1.0 - 1e-12) {
      const double target = std::min(1.0, lf + dlf);
      const Snapshot snap(m_);
      auto r = newton_solve(m_, target, 0.0, opt_);
      int inserted = 0;
      bool ok = r.converged;
      if (ok) {
        m_.commit();
        ok = insert_and_reequilibrate(inserted);
      }
      if (!ok) {
        snap.restore(m_);
        insertion_residual_ = 0.0;
        if (++cuts > prog_.ramp_max_cuts) {
          std::ostringstream os;
          os << "ramp increment to load factor " << target << " failed after " << prog_.ramp_max_cuts
             << " subdivisions: " << r.message;
          if (prog_.stop_at_failure && !m_.cracks.empty()) {
            event("failure", "static strength exceeded during ramp: " + r.message);
            res_.reason = EndReason::failure;
            res_.N_fail = 0.0;
            return false;
          }
          throw Error(ErrorCategory::non_convergence, os.str());
        }
        dlf *= 0.5;
        continue;
      }
      lf = target;
      ++step_;
      record(true, 0.0, r.iterations, cuts, inserted);
      cuts = 0;
      dlf = std::min(base, 2.0 * dlf);
      if (failed()) {
        event("failure", "crack fully damaged during ramp");
        res_.reason = EndReason::failure;
        res_.N_fail = 0.0;
        return false;
      }
    }
    k0_ = res_.history.empty() ? 0.0 : res_.history.back().stiffness;
    return true;
  }

  void cyclic() {
    double dN = ctl_.dN_init;
    double fail_upper = std::numeric_limits<double>::infinity();  // locate mode bracket
    int cyclic_steps = 0;
    for (;;) {
      if (N_ >= prog_.N_max) {
        res_.reason = EndReason::n_max;
        return;
      }
      if (cyclic_steps >= prog_.max_steps) {
        res_.reason = EndReason::max_steps;
        return;
      }
      const bool locate = prog_.locate_failure && prog_.stop_at_failure;
      if (locate && fail_upper - N_ < ctl_.dN_min) {
        located_failure(fail_upper, "crack fully damaged");
        return;
      }
      double dN_try = std::min(dN, prog_.N_max - N_);
      if (std::isfinite(fail_upper)) dN_try = std::min(dN_try, 0.5 * (fail_upper - N_));
      int cuts = 0;
      for (;;) {
        const Snapshot snap(m_);
        auto r = newton_solve(m_, 1.0, dN_try, opt_);
        int inserted = 0;
        bool ok = r.converged;
        const double N_prev = N_;
        if (ok) {
          m_.commit();
          N_ = N_prev + dN_try;
          ok = insert_and_reequilibrate(inserted);
          if (!ok) r.message = "re-equilibration after insertion failed";
        }
        const bool fail = ok && failed();

        if (locate && fail) {
          // Bisect towards the first cycle at which the crack fails.
          snap.restore(m_);
          insertion_residual_ = 0.0;
          N_ = N_prev;
          fail_upper = N_prev + dN_try;
          if (fail_upper - N_ < ctl_.dN_min) {
            located_failure(fail_upper, "crack fully damaged");
            return;
          }
          dN_try = 0.5 * (fail_upper - N_);
          ++cuts;
          continue;
        }

        if (!ok) {
          snap.restore(m_);
          insertion_residual_ = 0.0;
          N_ = N_prev;
          if (!prog_.adaptive && prog_.fixed_policy == CutPolicy::stop) {
            event("stop", "non-convergence at fixed dN: " + r.message);
            res_.reason = EndReason::non_convergence;
            return;
          }
          spdlog::debug("step cancelled ({}), retry with dN={:.6g}", r.message, dN_try * ctl_.c_red);
          if (dN_try * ctl_.c_red < ctl_.dN_min) {
            if (locate) {
              // Loss of equilibrium under load control is the failure event.
              located_failure(N_ + dN_try, r.message);
              return;
            }
            std::ostringstream os;
            os << "cycle increment fell below dN_min=" << ctl_.dN_min << " at N=" << N_ << " after " << cuts
               << " cuts; last solver message: " << r.message << "; max damage " << max_damage()
               << ", cracks " << m_.cracks.size();
            event("stalled", os.str());
            throw Error(ErrorCategory::analysis_stalled, os.str());
          }
          dN_try *= ctl_.c_red;
          ++cuts;
          continue;
        }

        ++step_;
        ++cyclic_steps;
        record(false, dN_try, r.iterations, cuts, inserted);
        if (fail) {
          res_.N_fail = N_;
          event("failure", "crack fully damaged");
          res_.reason = EndReason::failure;
          return;
        }
        if (prog_.stiffness_floor > 0.0 && k0_ != 0.0 &&
            res_.history.back().stiffness <= prog_.stiffness_floor * k0_) {
          event("end", "stiffness floor reached");
          res_.reason = EndReason::stiffness_floor;
          return;
        }
        dN = prog_.adaptive ? ctl_.next_increment(dN_try, r.iterations) : ctl_.dN_init;
        break;
      }
    }
  }

  void located_failure(double upper, const std::string& why) {
    res_.N_fail = 0.5 * (N_ + upper);
    std::ostringstream os;
    os << "failure located in [" << N_ << ", " << upper << "]: " << why;
    event("failure", os.str());
    res_.reason = EndReason::failure;
  }

  double max_damage() const {
    double D = 0.0;
    for (const auto& p : m_.points) D = std::max(D, p.state.D);
    return D;
  }

  RunResult finish() {
    res_.N_end = N_;
    return std::move(res_);
  }

  const LoadProgram& prog_;
  const CycleStepController& ctl_;
  Model& m_;
  const RunHooks& hooks_;
  SolveOptions opt_;
  bool has_xfem_ = false;
  RunResult res_;
  double N_ = 0.0;
  int step_ = 0;
  double k0_ = 0.0;
};

}  // namespace

RunResult run(const LoadProgram& program, const CycleStepController& controller, Model& model,
              const RunHooks& hooks) {
  program.validate();
  controller.validate();
  return Runner(program, controller, model, hooks).run();
}

}  // namespace fatiguecz
