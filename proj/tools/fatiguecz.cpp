// Command-line front end: full analyses, S-N verification, DCB step-size studies,
// tangent audits and the open-hole demo. Exit codes follow ErrorCategory.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "fatiguecz/analysis.hpp"
#include "fatiguecz/config.hpp"
#include "fatiguecz/driver.hpp"
#include "fatiguecz/output.hpp"
#include "fatiguecz/tangent_audit.hpp"

namespace fs = std::filesystem;
using namespace fatiguecz;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitUnexpected = 12;

struct GlobalOptions {
  std::string out_dir;
  int max_steps = 0;
  std::string log_level = "info";
};

AnalysisConfig load(const std::string& path, const GlobalOptions& g) {
  auto cfg = parse_config(path);
  if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
  if (g.max_steps > 0) cfg.load.max_steps = g.max_steps;
  return cfg;
}

std::string out_path(const AnalysisConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output.dir) / name).string();
}

// Run with optional VTK snapshots every `vtk_every` committed steps.
RunResult run_with_output(const AnalysisConfig& cfg, const LoadProgram& program, const CycleStepController& ctl,
                          Model& model, const std::string& dir) {
  RunHooks hooks;
  int snapshot = 0;
  if (cfg.output.vtk_every > 0) {
    hooks.on_commit = [&](const Model& m, const StepRecord& r) {
      if (r.step % cfg.output.vtk_every != 0) return;
      char name[64];
      std::snprintf(name, sizeof name, "field_%05d.vtk", snapshot++);
      write_vtk((fs::path(dir) / name).string(), m, cfg.name + " step " + std::to_string(r.step));
    };
  }
  auto res = run(program, ctl, model, hooks);
  write_steps_csv((fs::path(dir) / "steps.csv").string(), res.history);
  if (cfg.output.vtk_every > 0) write_vtk((fs::path(dir) / "field_final.vtk").string(), model, cfg.name + " final");
  return res;
}

void print_summary(const RunResult& res, const Model& model) {
  std::printf("end: %s at N = %.6e after %zu steps, %zu cracks\n", std::string(end_reason_name(res.reason)).c_str(), res.N_end,
              res.history.size(), model.cracks.size());
  if (std::isfinite(res.N_fail)) std::printf("failure at N = %.6e\n", res.N_fail);
}

int cmd_run(const std::string& path, const GlobalOptions& g) {
  const auto cfg = load(path, g);
  Model model = build_model(cfg);
  const auto res = run_with_output(cfg, cfg.load, cfg.controller, model, cfg.output.dir);
  print_summary(res, model);
  return 0;
}

// Crack material of the first XFEM-capable bulk material.
const NamedCohesiveMaterial& crack_material(const AnalysisConfig& cfg) {
  for (const auto& b : cfg.bulk_materials)
    if (!b.crack_material.empty()) return cfg.cohesive_materials[cfg.cohesive_index(b.crack_material)];
  throw Error(ErrorCategory::lookup, "no bulk material defines a crack_material");
}

int cmd_verify_sn(const std::string& path, const GlobalOptions& g) {
  const auto cfg = load(path, g);
  if (!cfg.sn || cfg.sn->factors.empty()) throw Error(ErrorCategory::lookup, "config has no sn.factors");
  const auto fat = crack_material(cfg).build(cfg.load.R).fatigue;
  const auto par = fatigue_parameters(0.0, fat);
  const auto rows = sn_sweep([&](double s) { return build_model(cfg, s); }, cfg.sn->factors, cfg.load,
                             cfg.controller, par.E, par.beta, par.p, fat.gamma);
  write_sn_csv(out_path(cfg, "sn_curve.csv"), rows);
  std::printf("%8s %16s %16s %10s\n", "factor", "N_fail_sim", "N_fail_analytic", "rel_error");
  for (const auto& r : rows)
    std::printf("%8.3f %16.6e %16.6e %10.4f%s\n", r.factor, r.N_sim, r.N_analytical, r.rel_error,
                r.censored ? " censored" : "");
  return 0;
}

int cmd_dcb(const std::string& path, const GlobalOptions& g, std::vector<double> dns, double theta,
            bool explicit_update) {
  auto cfg = load(path, g);
  if (cfg.mesh.generator != "dcb") throw Error(ErrorCategory::lookup, "dcb needs a mesh with generator 'dcb'");
  const DcbConfig dc = cfg.dcb.value_or(DcbConfig{});
  if (!std::isnan(theta)) cfg.theta = theta;
  if (explicit_update) cfg.theta = 0.0;
  cfg.validate();
  const int G_mat = cfg.mesh.interface_material.empty() ? 0 : cfg.cohesive_index(cfg.mesh.interface_material);
  const double G_Ic = cfg.cohesive_materials.at(G_mat).G_Ic;

  auto study = [&](const LoadProgram& program, const CycleStepController& ctl, const std::string& dir) {
    Model model = build_model(cfg);
    const auto res = run_with_output(cfg, program, ctl, model, dir);
    const auto hist = crack_history(res.history, cfg.mesh.dcb.a0, dc.b, dc.delta_cor);
    write_crack_history_csv((fs::path(dir) / "crack_history.csv").string(), hist);
    const auto paris = paris_data(hist, cfg.load.R, G_Ic, dc.paris_da);
    write_paris_csv((fs::path(dir) / "paris.csv").string(), paris);
    const double da = hist.empty() ? 0.0 : hist.back().a - cfg.mesh.dcb.a0;
    std::printf("%s: theta = %.3g, N_end = %.6e, steps = %zu, da = %.6e mm, Paris slope = %.4g (R^2 = %.4f, %s)\n",
                dir.c_str(), cfg.theta, res.N_end, res.history.size(), da, paris.fit.slope, paris.fit.r2,
                paris.monotone ? "monotone" : "not monotone");
  };

  if (dns.empty()) {
    study(cfg.load, cfg.controller, cfg.output.dir);
    return 0;
  }
  for (double dn : dns) {
    if (!(dn > 0.0)) throw invalid_property("--dn values must be positive");
    LoadProgram program = cfg.load;
    program.adaptive = false;
    CycleStepController ctl = cfg.controller;
    ctl.dN_init = dn;
    ctl.dN_min = std::min(ctl.dN_min, dn);
    ctl.dN_max = std::max(ctl.dN_max, dn);
    char name[64];
    std::snprintf(name, sizeof name, "dn_%g", dn);
    study(program, ctl, out_path(cfg, name));
  }
  return 0;
}

int cmd_tangent_check(const std::string& path, const GlobalOptions& g) {
  const auto cfg = load(path, g);
  const TangentCheckConfig tc = cfg.tangent_check.value_or(TangentCheckConfig{});
  TangentAuditOptions opt;
  opt.samples = tc.samples;
  opt.loading_tolerance = tc.tolerance;
  opt.theta = cfg.theta;
  opt.seed = cfg.seed;
  CsvWriter csv(out_path(cfg, "tangent_check.csv"),
                {"material", "branch", "B", "samples", "max_error", "tolerance", "pass"});
  bool ok = true;
  for (const auto& c : cfg.cohesive_materials) {
    const auto m = c.build(cfg.load.R);
    const auto rep = audit_tangent(m.props, m.fatigue, opt);
    for (const auto& e : rep.entries) {
      csv.row({c.name, std::string(branch_name(e.branch)), e.B, static_cast<long long>(e.samples), e.max_error,
               e.tolerance, static_cast<long long>(e.pass())});
      std::printf("%-12s %-10s B=%.2f samples=%d max_error=%.3e tol=%.0e %s\n", c.name.c_str(),
                  branch_name(e.branch), e.B, e.samples, e.max_error, e.tolerance, e.pass() ? "ok" : "FAIL");
    }
    ok = ok && rep.pass();
  }
  if (!ok) throw Error(ErrorCategory::tangent_mismatch, "tangent differs from finite differences beyond tolerance");
  return 0;
}

int cmd_open_hole(const std::string& path, const GlobalOptions& g) {
  const auto cfg = load(path, g);
  Model model = build_model(cfg);
  const auto res = run_with_output(cfg, cfg.load, cfg.controller, model, cfg.output.dir);
  CsvWriter csv(out_path(cfg, "cracks.csv"), {"crack_id", "element", "ply", "x0", "y0", "x1", "y1", "N_inserted", "damage"});
  for (const auto& c : model.cracks)
    csv.row({static_cast<long long>(c.crack_id), static_cast<long long>(c.element), static_cast<long long>(c.ply),
             c.x0.x(), c.x0.y(), c.x1.x(), c.x1.y(), c.N_inserted,
             0.5 * (model.points[c.points[0]].state.D + model.points[c.points[1]].state.D)});
  print_summary(res, model);
  if (!res.history.empty())
    std::printf("stiffness: initial %.6e, final %.6e N/mm\n", res.history.front().stiffness,
                res.history.back().stiffness);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fatiguecz: fatigue cohesive-zone analyses"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides output.dir)");
  app.add_option("--max-steps", g.max_steps, "Maximum number of committed steps")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config;
  auto add = [&](const char* name, const char* help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("config", config, "Configuration file")->required();
    return sc;
  };
  auto* run_cmd = add("run", "Full analysis; writes steps.csv and optional VTK snapshots");
  auto* sn_cmd = add("verify-sn", "S-N sweep over sn.factors; writes sn_curve.csv");
  auto* dcb_cmd = add("dcb", "DCB crack growth; writes crack_history.csv and paris.csv per run");
  std::vector<double> dns;
  double theta = std::numeric_limits<double>::quiet_NaN();
  bool explicit_update = false;
  dcb_cmd->add_option("--dn", dns, "Constant cycle increments, one run each (repeatable); default adaptive");
  dcb_cmd->add_option("--theta", theta, "Integration parameter")->check(CLI::Range(0.0, 1.0));
  dcb_cmd->add_flag("--explicit", explicit_update, "Explicit damage update (theta = 0)");
  auto* tc_cmd = add("tangent-check", "Finite-difference audit of the cohesive tangent");
  auto* oh_cmd = add("open-hole", "Laminate run with matrix cracking; writes steps.csv and cracks.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*run_cmd) return cmd_run(config, g);
    if (*sn_cmd) return cmd_verify_sn(config, g);
    if (*dcb_cmd) return cmd_dcb(config, g, dns, theta, explicit_update);
    if (*tc_cmd) return cmd_tangent_check(config, g);
    if (*oh_cmd) return cmd_open_hole(config, g);
  } catch (const Error& e) {
    std::cerr << "error[" << category_name(e.category()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[unexpected]: " << e.what() << "\n";
    return kExitUnexpected;
  }
  return kExitUsage;
}
