#include "gkdv/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gkdv/error.hpp"
#include "gkdv/reduced_ode.hpp"

namespace gkdv {

namespace {

using Series = std::vector<std::pair<double, double>>;

std::optional<PowerFit> try_fit(const Series& pts, const std::string& what, std::vector<std::string>& notes) {
  Series clean;
  for (const auto& p : pts)
    if (std::isfinite(p.second) && p.second > 0.0) clean.push_back(p);
  if (clean.empty()) {
    notes.push_back(what + ": no positive samples");
    return std::nullopt;
  }
  try {
    return fit_power_law(clean);
  } catch (const Error& e) {
    notes.push_back(what + ": " + e.what());
    return std::nullopt;
  }
}

void add(std::vector<FunctionalSample>& out, double t, const char* name, double v) {
  out.push_back({t, name, v, {}});
}

}  // namespace

RescaledReport rescale_to_origin(const ExperimentConfig& cfg, std::span<const RunRecord> series) {
  RescaledReport rep;
  const double beta = cfg.beta(), t0 = cfg.t0();
  const double l0 = cfg.lambda0_value(), s0 = cfg.sigma0_value();
  rep.T0 = t0 / (l0 * l0 * l0);
  for (const auto& r : series) {
    RescaledPoint p;
    p.t = (r.base.t - t0) / (l0 * l0 * l0);
    p.ell = r.base.lambda / l0;
    p.x = (r.base.sigma - s0) / l0;
    const double z = p.t / rep.T0 + 1.0;
    p.ell_pred = std::pow(z, 0.5 * (1.0 - beta));
    p.x_pred = rep.T0 / beta * (std::pow(z, beta) - 1.0);
    rep.points.push_back(p);
  }
  if (!rep.points.empty()) {
    const auto& p = rep.points.back();
    rep.ell_rel_error = std::fabs(p.ell / p.ell_pred - 1.0);
    rep.x_rel_error = p.x_pred > 0.0 ? std::fabs(p.x / p.x_pred - 1.0) : 0.0;
  }
  return rep;
}

RunAnalysis analyze_run(const ExperimentConfig& cfg, std::span<const RunRecord> series,
                        std::span<const Snapshot> snapshots, const AnalysisOptions& opts) {
  RunAnalysis a;
  const double beta = cfg.beta();
  a.lambda_target = 0.5 * (1.0 - beta);
  a.sigma_target = beta;
  a.residue_gate = -(3.0 * beta - 1.0) / 4.0 + 0.1;

  Series lam, sig, rl2, rh1;
  for (const auto& r : series) {
    lam.emplace_back(r.base.t, r.base.lambda);
    sig.emplace_back(r.base.t, r.base.sigma);
    rl2.emplace_back(r.base.t, r.residue_l2);
    rh1.emplace_back(r.base.t, r.residue_h1);
  }
  a.lambda_fit = try_fit(lam, "lambda fit", a.notes);
  a.sigma_fit = try_fit(sig, "sigma fit", a.notes);
  a.residue_l2_fit = try_fit(rl2, "residue l2 fit", a.notes);
  a.residue_h1_fit = try_fit(rh1, "residue h1 fit", a.notes);

  if (!series.empty()) {
    const double s_first = series.front().base.s, s_last = series.back().base.s;
    const double s_half = 0.5 * (s_first + s_last);
    std::vector<double> tail;
    a.F.first = series.front().scaled_F;
    a.F.max = a.F.first;
    for (const auto& r : series) {
      a.F.max = std::max(a.F.max, r.scaled_F);
      if (r.base.s >= s_half) tail.push_back(r.scaled_F);
    }
    a.F.final_half = non_increasing_with_slack(tail, opts.monotone_slack);
    a.F.near_constant = std::max(0.0, a.F.max - a.F.first) * std::pow(s_first, 3.0);

    for (const auto& r : series) {
      const double env = opts.envelope_factor * std::pow(r.base.s, -1.25);
      const double q = r.base.nb_norm / env;
      if (q > a.nb.worst_ratio) {
        a.nb.worst_ratio = q;
        a.nb.s_at_worst = r.base.s;
      }
    }
    a.nb.ok = a.nb.worst_ratio <= 1.0;
  }

  for (const auto& r : series) {
    const double t = r.base.t;
    add(a.functionals, t, "F", r.F);
    add(a.functionals, t, "lambda_kappa_F", r.scaled_F);
    add(a.functionals, t, "N_B", r.base.nb_norm);
    add(a.functionals, t, "M_r", r.Mr);
    add(a.functionals, t, "E_r", r.Er);
    add(a.functionals, t, "residue_l2", r.residue_l2);
    add(a.functionals, t, "residue_h1", r.residue_h1);
    add(a.functionals, t, "local_mass", r.local_mass);
  }

  if (!snapshots.empty()) {
    const SimGrid g = cfg.grid();
    const Snapshot& last = snapshots.back();
    const double w = 0.5 * (3.0 * beta - 1.0);
    std::vector<double> js, ts;
    for (const auto& sn : snapshots) {
      if (sn.u.size() != g.size()) fail(ErrorCode::IoError, "snapshot size does not match the grid");
      if (!(sn.sigma > 0.0 && last.sigma > 0.0)) continue;
      auto eta = soliton_part(g, sn.lambda, sn.sigma);
      for (std::size_t j = 0; j < g.size(); ++j) eta[j] = sn.u[j] - eta[j];
      const JK jk = functional_JK(g, eta, last.sigma, sn.sigma, sn.lambda);
      a.functionals.push_back({sn.t, "J", jk.J, {{"sigma_t", last.sigma}}});
      a.functionals.push_back({sn.t, "K", jk.K, {{"sigma_t", last.sigma}}});
      add(a.functionals, sn.t, "right_mass", right_mass(g, sn.u, sn.sigma));
      js.push_back(jk.J);
      ts.push_back(sn.t);
    }
    a.J.samples = js.size();
    for (std::size_t j = 0; j < js.size(); ++j)
      for (std::size_t i = j + 1; i < js.size(); ++i)
        a.J.slack_constant = std::max(a.J.slack_constant, (js[i] - js[j]) * std::pow(ts[j], w));

    if (opts.with_airy && snapshots.size() >= 2) {
      const double t_mid = 0.5 * (snapshots.front().t + last.t);
      std::size_t k = 0;
      for (std::size_t i = 1; i + 1 < snapshots.size(); ++i)
        if (std::fabs(snapshots[i].t - t_mid) < std::fabs(snapshots[k].t - t_mid)) k = i;
      a.airy = airy_compare(g, snapshots[k].u, snapshots[k].t, last.u, last.t, last.sigma, opts.airy);
    } else if (opts.with_airy) {
      a.notes.push_back("airy comparison needs two snapshots");
    }
  }
  std::stable_sort(a.functionals.begin(), a.functionals.end(),
                   [](const FunctionalSample& x, const FunctionalSample& y) { return x.t < y.t; });

  a.rescaled = rescale_to_origin(cfg, series);
  return a;
}

RunAnalysis analyze_run(const RunResult& run, const AnalysisOptions& opts) {
  return analyze_run(run.cfg, run.series, run.snapshots, opts);
}

}  // namespace gkdv
