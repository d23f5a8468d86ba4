#pragma once

// Post-processing and closed-form references: crack length and growth rate,
// ASTM energy release rate, constant-stress cycles to failure, S-N sweeps and
// Paris-type data.

#include <functional>
#include <vector>

#include "fatiguecz/driver.hpp"

namespace fatiguecz {

/// a = a0 + sum D * (J w) over line-interface points (lengths, not areas).
double crack_length(const std::vector<double>& damage, const std::vector<double>& jw, double a0);
double crack_length(const Model& model, double a0);

struct CrackHistoryRecord {
  double N = 0.0;
  double a = 0.0;
  double G_Imax = 0.0;
  double dadN = 0.0;
  double F_max = 0.0;
  bool propagating = false;  // a point of the interface is fully damaged
};

/// Backward differences (a_n - a_{n-1}) / dN. The first record and records with dN = 0
/// get dadN = 0. Output has one entry per record.
std::vector<double> growth_rate(const std::vector<double>& N, const std::vector<double>& a);

/// G = 3 F u / (2 b (a + delta_cor)).
double err_astm(double F_max, double u_max, double b, double a, double delta_cor);

/// Cycles to failure of a point under constant stress s * f_t:
/// gamma E^beta s^-beta (1 - s^(p+1)).
double analytical_cycles_to_failure(double s, double E, double beta, double p, double gamma);

/// Damage of that point after N cycles, valid until D = 1 - s.
double analytical_damage(double N, double s, double E, double beta, double p, double gamma);

/// Crack history of a run with a line-interface crack (e.g. DCB) from the step records.
/// Ramp records are excluded; G uses the measured force and displacement of each record
/// (both at the maximum load of the cycle).
std::vector<CrackHistoryRecord> crack_history(const std::vector<StepRecord>& steps, double a0, double b,
                                              double delta_cor);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ParisData {
  std::vector<double> x;  // log10(G_Imax (1 - R) / G_Ic)
  std::vector<double> y;  // log10(da/dN)
  LinearFit fit;
  bool monotone = false;  // sorted by x, y never decreases
};

/// Propagation-phase Paris data; records before the first fully damaged point and
/// records without growth are dropped. With da = 0 each record contributes its own
/// dadN. With da > 0 the rate is taken over fixed crack increments da (N and G
/// interpolated in a), which removes the oscillation of a discrete interface when
/// da is one element length.
ParisData paris_data(const std::vector<CrackHistoryRecord>& history, double R, double G_Ic, double da = 0.0);

struct SnRow {
  double factor = 0.0;
  double N_sim = 0.0;         // NaN when censored
  double N_analytical = 0.0;  // +inf at or below the endurance limit
  bool censored = false;
  int steps = 0;
  double rel_error = 0.0;
};

/// Runs the driver for each stress factor on a model built by `build(factor)`.
/// Runs stop at `gamma` cycles; no failure by then is reported as censored.
std::vector<SnRow> sn_sweep(const std::function<Model(double)>& build, const std::vector<double>& factors,
                            LoadProgram program, const CycleStepController& controller, double E, double beta,
                            double p, double gamma, const RunHooks& hooks = {});

}  // namespace fatiguecz
