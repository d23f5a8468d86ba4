#include "fatiguecz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fatiguecz {

double crack_length(const std::vector<double>& damage, const std::vector<double>& jw, double a0) {
  if (damage.size() != jw.size()) throw invalid_property("crack_length: damage and weight sizes differ");
  double a = a0;
  for (size_t i = 0; i < damage.size(); ++i) a += damage[i] * jw[i];
  return a;
}

double crack_length(const Model& m, double a0) {
  std::vector<double> D, jw;
  for (const auto& p : m.points) {
    if (p.owner != PointOwner::interface) continue;
    D.push_back(p.state.D);
    jw.push_back(p.weight / m.cohesive_materials[p.material].thickness);
  }
  return crack_length(D, jw, a0);
}

std::vector<double> growth_rate(const std::vector<double>& N, const std::vector<double>& a) {
  if (N.size() != a.size()) throw invalid_property("growth_rate: N and a sizes differ");
  std::vector<double> r(N.size(), 0.0);
  for (size_t i = 1; i < N.size(); ++i) {
    const double dN = N[i] - N[i - 1];
    if (dN > 0.0) r[i] = (a[i] - a[i - 1]) / dN;
  }
  return r;
}

double err_astm(double F_max, double u_max, double b, double a, double delta_cor) {
  if (!(b > 0.0 && a + delta_cor > 0.0)) throw invalid_property("err_astm: geometry must be positive");
  return 3.0 * F_max * u_max / (2.0 * b * (a + delta_cor));
}

double analytical_cycles_to_failure(double s, double E, double beta, double p, double gamma) {
  if (!(s > 0.0 && s <= 1.0)) throw invalid_property("stress factor must be in (0, 1]");
  return gamma * std::pow(E, beta) * std::pow(s, -beta) * (1.0 - std::pow(s, p + 1.0));
}

double analytical_damage(double N, double s, double E, double beta, double p, double gamma) {
  // Constant stress: Delta / Delta* = s / (1 - D), so (1 - D)^p dD = s^beta / (gamma E^beta (p + 1)) dN.
  const double c = N * std::pow(s, beta) / (gamma * std::pow(E, beta));
  if (c >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - c, 1.0 / (p + 1.0));
}

std::vector<CrackHistoryRecord> crack_history(const std::vector<StepRecord>& steps, double a0, double b,
                                              double delta_cor) {
  std::vector<CrackHistoryRecord> out;
  std::vector<double> N, a;
  for (const auto& s : steps) {
    if (s.ramp) continue;
    CrackHistoryRecord r;
    r.N = s.N;
    r.a = a0 + s.damaged_length;
    r.F_max = s.force;
    r.G_Imax = err_astm(std::abs(s.force), std::abs(s.displacement), b, r.a, delta_cor);
    r.propagating = s.max_damage >= 1.0 - 1e-9;
    out.push_back(r);
    N.push_back(r.N);
    a.push_back(r.a);
  }
  const auto rate = growth_rate(N, a);
  for (size_t i = 0; i < out.size(); ++i) out[i].dadN = rate[i];
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.n = static_cast<int>(x.size());
  if (x.size() != y.size() || x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

namespace {

// Propagation-phase (G, dadN) pairs, either per record or over fixed crack increments.
void paris_points(const std::vector<CrackHistoryRecord>& history, double da, std::vector<double>& G,
                  std::vector<double>& rate) {
  std::vector<double> N, a, Gh;
  bool started = false;
  for (const auto& r : history) {
    started = started || r.propagating;
    if (!started) continue;
    if (da <= 0.0) {
      if (r.dadN > 0.0 && r.G_Imax > 0.0) {
        G.push_back(r.G_Imax);
        rate.push_back(r.dadN);
      }
      continue;
    }
    if (!a.empty() && !(r.a > a.back())) continue;
    N.push_back(r.N);
    a.push_back(r.a);
    Gh.push_back(r.G_Imax);
  }
  if (da <= 0.0 || a.size() < 2) return;
  // N and G at a0 + k da by linear interpolation in a (a is strictly increasing here).
  size_t j = 0;
  double N_prev = N[0];
  for (int k = 1;; ++k) {
    const double target = a[0] + k * da;
    if (target > a.back()) break;
    while (a[j + 1] < target) ++j;
    const double t = (target - a[j]) / (a[j + 1] - a[j]);
    const double Nk = N[j] + t * (N[j + 1] - N[j]);
    const double Gk = Gh[j] + t * (Gh[j + 1] - Gh[j]);
    if (Nk > N_prev && Gk > 0.0) {
      G.push_back(Gk);
      rate.push_back(da / (Nk - N_prev));
    }
    N_prev = Nk;
  }
}

}  // namespace

ParisData paris_data(const std::vector<CrackHistoryRecord>& history, double R, double G_Ic, double da) {
  if (!(da >= 0.0)) throw invalid_property("Paris crack increment must be non-negative");
  ParisData d;
  std::vector<double> G, rate;
  paris_points(history, da, G, rate);
  for (size_t i = 0; i < G.size(); ++i) {
    d.x.push_back(std::log10(G[i] * (1.0 - R) / G_Ic));
    d.y.push_back(std::log10(rate[i]));
  }
  d.fit = linear_fit(d.x, d.y);
  // Monotone: sorted by G, the growth rate never decreases.
  std::vector<size_t> order(d.x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return d.x[i] < d.x[j]; });
  d.monotone = d.x.size() >= 2;
  for (size_t k = 1; k < order.size(); ++k)
    if (d.y[order[k]] < d.y[order[k - 1]]) d.monotone = false;
  return d;
}

std::vector<SnRow> sn_sweep(const std::function<Model(double)>& build, const std::vector<double>& factors,
                            LoadProgram program, const CycleStepController& controller, double E, double beta,
                            double p, double gamma, const RunHooks& hooks) {
  program.N_max = gamma;
  program.stop_at_failure = true;
  program.locate_failure = true;
  std::vector<SnRow> rows;
  for (double s : factors) {
    SnRow row;
    row.factor = s;
    row.N_analytical =
        s > E ? analytical_cycles_to_failure(s, E, beta, p, gamma) : std::numeric_limits<double>::infinity();
    Model model = build(s);
    const auto res = run(program, controller, model, hooks);
    row.steps = static_cast<int>(std::count_if(res.history.begin(), res.history.end(),
                                               [](const StepRecord& r) { return !r.ramp; }));
    if (res.reason == EndReason::failure) {
      row.N_sim = res.N_fail;
    } else {
      row.censored = true;
      row.N_sim = std::numeric_limits<double>::quiet_NaN();
    }
    row.rel_error = std::isfinite(row.N_analytical) && row.N_analytical > 0.0 && !row.censored
                        ? (row.N_sim - row.N_analytical) / row.N_analytical
                        : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fatiguecz
