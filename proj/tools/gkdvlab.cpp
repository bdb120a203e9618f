#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gkdv/analysis.hpp"
#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/harness.hpp"
#include "gkdv/reduced_ode.hpp"
#include "gkdv/rundir.hpp"
#include "gkdv/tails.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gkdv;

namespace {

enum Exit { kOk = 0, kInconclusive = 2, kSolver = 3, kConfig = 4 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

ExperimentConfig experiment(const Common& c) {
  FlatConfig flat = c.config.empty() ? FlatConfig{} : FlatConfig::load(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    flat.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  return experiment_from(flat);
}

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
  cmd->add_option("-c,--config", c.config, "flat section.key = value file");
  cmd->add_option("--set", c.sets, "override one key, e.g. --set experiment.horizon=4")->take_all();
  c.out = default_out;
  cmd->add_option("-o,--out", c.out, "output directory");
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump(const fs::path& p, const json& j) { write_text(p, j.dump(2) + '\n'); }

// -------- profiles --------

int cmd_profiles(double half_width, std::size_t points, const std::string& out) {
  const ProfileGrid grid(half_width, points);
  const ProfileSet set = build_profile_set(grid);
  fs::create_directories(out);

  std::ostringstream csv;
  csv << "y,Q,Q_prime,LambdaQ,R,P\n";
  for (std::size_t j = 0; j < grid.size(); ++j)
    csv << csv_num(grid.node(j)) << ',' << csv_num(set.q[j]) << ',' << csv_num(set.q_prime[j]) << ','
        << csv_num(set.lambda_q[j]) << ',' << csv_num(set.r_profile[j]) << ',' << csv_num(set.p_profile[j]) << '\n';
  write_text(fs::path(out) / "profiles.csv", csv.str());

  auto sup = [](const std::vector<double>& v) { return sup_norm(v); };
  const auto lqp = apply_linearized(grid, set.q_prime);
  auto lq3 = apply_linearized(grid, set.q_cubed);
  for (std::size_t j = 0; j < lq3.size(); ++j) lq3[j] += 8.0 * set.q_cubed[j];
  auto llq = apply_linearized(grid, set.lambda_q);
  for (std::size_t j = 0; j < llq.size(); ++j) llq[j] += 2.0 * set.q[j];
  const double int_q = set.int_q;
  const auto qpp = spectral_derivative(grid, set.q, 1);
  double kin = 0.0, q6 = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    kin += qpp[j] * qpp[j];
    q6 += std::pow(set.q[j], 6);
  }
  kin *= grid.spacing();
  q6 *= grid.spacing();
  const double pqp = inner(grid, set.p_profile, set.q_prime) /
                     (l2_norm(grid, set.p_profile) * l2_norm(grid, set.q_prime));

  json rep = {
      {"grid", {{"half_width", half_width}, {"n_points", points}, {"spacing", grid.spacing()}}},
      {"int_q", int_q},
      {"int_q_sq", set.int_q_sq},
      {"int_q_sq_exact", ground::mass},
      {"pq_pairing", set.pq_pairing},
      {"pq_expected", int_q * int_q / 16.0},
      {"rq_pairing", set.rq_pairing},
      {"rq_expected", -0.75 * int_q},
      {"pq_prime_normalized", pqp},
      {"p_inf", set.p_inf},
      {"residuals",
       {{"ground_state", set.eq_residual},
        {"R", set.r_residual},
        {"P", set.p_residual},
        {"L_Qprime", sup(lqp)},
        {"L_Q3_plus_8Q3_relative", sup(lq3) / sup(set.q_cubed)},
        {"L_LambdaQ_plus_2Q", sup(llq)},
        {"energy_normalized", (0.5 * kin - q6 / 6.0) / kin},
        {"q_lambda_q", inner(grid, set.q, set.lambda_q)}}},
      {"iterations", {{"R", set.r_iterations}, {"P", set.p_iterations}}}};
  dump(fs::path(out) / "profiles.json", rep);
  std::cout << "profiles written to " << out << "\n";
  return kOk;
}

// -------- tail --------

int cmd_tail(const Common& c, double horizon_fraction) {
  const ExperimentConfig cfg = experiment(c);
  const TailSpec spec = cfg.tail();
  const SimGrid g = cfg.grid();
  const auto f0 = build_tail(spec, g);
  fs::create_directories(c.out);
  std::ostringstream csv;
  csv << "x,f0\n";
  for (std::size_t j = 0; j < g.size(); ++j) csv << csv_num(g.node(j)) << ',' << csv_num(f0[j]) << '\n';
  write_text(fs::path(c.out) / "tail.csv", csv.str());

  const double horizon = horizon_fraction * spec.t0;
  const auto rep = persistence_check(spec, g, horizon, {}, cfg.solver, cfg.sponge);
  json samples = json::array();
  for (const auto& s : rep.samples) samples.push_back({{"t", s.t}, {"sup0", s.sup0}, {"sup1", s.sup1}, {"h1", s.h1}});
  const auto dc = tail_derivative_constants(spec, g);
  json j = {{"spec",
             {{"theta", spec.theta},
              {"beta", spec.beta},
              {"nu", spec.nu},
              {"c0", spec.c0},
              {"x0", spec.x0},
              {"t0", spec.t0},
              {"right_trunc", spec.right_trunc},
              {"ramp", spec.ramp}}},
            {"derivative_constants", dc},
            {"power_mass_truncated", tail_power_mass_truncated(spec)},
            {"persistence",
             {{"kappa0", rep.kappa0},
              {"horizon", rep.horizon},
              {"h1_initial", rep.h1_initial},
              {"bounded", rep.bounded},
              {"h1_bounded", rep.h1_bounded},
              {"samples", samples}}}};
  dump(fs::path(c.out) / "persistence.json", j);
  std::cout << "tail written to " << c.out << ", persistence " << (rep.bounded ? "bounded" : "GROWING") << "\n";
  return kOk;
}

// -------- reduced ODE --------

int cmd_reduced(std::vector<double> thetas, double s_lo, double s_hi, int n, const std::string& out) {
  if (thetas.empty()) thetas = {0.6, 0.75, 0.9};
  if (!(s_hi > s_lo && s_lo > 0.0) || n < 2) fail(ErrorCode::ConfigError, "need 0 < s-min < s-max and points >= 2");
  std::ostringstream csv;
  csv << "theta,s,t,lambda,sigma,b,g,h,l0\n";
  json rows = json::array();
  bool all = true;
  for (double th : thetas) {
    const ExponentSet ex = exponent_relations(th);
    std::vector<double> s_out(n);
    for (int i = 0; i < n; ++i) s_out[i] = s_lo * std::pow(s_hi / s_lo, static_cast<double>(i) / (n - 1));
    ReducedParams p;
    p.theta = th;
    const auto traj = integrate_reduced(closed_form(s_lo, th), s_out, p);
    double worst = 0.0, l0_drift = 0.0;
    const double l0_start = gh_quantities(traj.front(), p).l0;
    for (const auto& st : traj) {
      const auto cf = closed_form(st.s, th);
      worst = std::max({worst, std::fabs(st.lambda / cf.lambda - 1.0), std::fabs(st.sigma / cf.sigma - 1.0),
                        std::fabs(st.b / cf.b - 1.0)});
      const auto inv = gh_quantities(st, p);
      l0_drift = std::max(l0_drift, std::fabs(inv.l0 - l0_start));
      csv << csv_num(th) << ',' << csv_num(st.s) << ',' << csv_num(time_from_s(st.s, ex.beta)) << ','
          << csv_num(st.lambda) << ',' << csv_num(st.sigma) << ',' << csv_num(st.b) << ',' << csv_num(inv.g) << ','
          << csv_num(inv.h) << ',' << csv_num(inv.l0) << '\n';
    }
    const bool ok = worst < 1e-8 && l0_drift < 1e-10;
    all = all && ok;
    rows.push_back({{"theta", th},
                    {"beta", ex.beta},
                    {"max_relative_error", worst},
                    {"l0_drift", l0_drift},
                    {"c_lambda", c_lambda(ex.beta)},
                    {"c_sigma", c_sigma(ex.beta)},
                    {"pass", ok}});
  }
  fs::create_directories(out);
  write_text(fs::path(out) / "reduced.csv", csv.str());
  dump(fs::path(out) / "reduced.json", {{"s_min", s_lo}, {"s_max", s_hi}, {"sweeps", rows}, {"pass", all}});
  std::cout << "reduced ODE " << (all ? "matches" : "DEPARTS FROM") << " the closed form\n";
  return kOk;
}

// -------- simulate / shoot --------

int exit_for(Classification c) { return c == Classification::Inconclusive ? kInconclusive : kOk; }

void print_run(const RunResult& r, const RunAnalysis& a) {
  std::printf("classification %s (%s), t reached %.1f of %.1f, %zu frames, %.1f s\n",
              to_string(r.classification).c_str(), r.termination.c_str(), r.t_reached, r.cfg.t_end(),
              r.series.size(), r.wall_seconds);
  if (a.lambda_fit) std::printf("lambda exponent %.4f (target %.4f)\n", a.lambda_fit->exponent, a.lambda_target);
  if (a.sigma_fit) std::printf("sigma exponent %.4f (target %.4f)\n", a.sigma_fit->exponent, a.sigma_target);
  if (a.residue_l2_fit) std::printf("residue exponent %.4f (gate %.4f)\n", a.residue_l2_fit->exponent, a.residue_gate);
  if (a.airy) std::printf("airy verdict %s\n", to_string(a.airy->verdict).c_str());
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = experiment(c);
  const RunResult r = run_experiment(cfg);
  const RunAnalysis a = analyze_run(r);
  save_run(c.out, r, a);
  print_run(r, a);
  return exit_for(r.classification);
}

int cmd_shoot(const Common& c, bool final_run) {
  const ExperimentConfig cfg = experiment(c);
  fs::create_directories(c.out);
  write_text(fs::path(c.out) / "config.txt", to_text(cfg));
  const ShootResult s = shoot_b0(cfg, [&](double b0) {
    const ShootStep st = run_candidate(cfg, b0);
    std::printf("b0 = %.10f -> %s (side %+d, final ratio %.4f)\n", b0, to_string(st.classification).c_str(), st.side,
                st.final_ratio);
    std::fflush(stdout);
    return st;
  });
  json j = to_json(s);
  const auto [lo, hi] = admissible_b0_interval(cfg);
  j["admissible_interval"] = {lo, hi};
  j["b0_center"] = cfg.b0_center();
  dump(fs::path(c.out) / "shoot.json", j);
  std::printf("b0* = %.10f in [%.10f, %.10f], %s%s%s\n", s.b0_star, s.lo, s.hi, to_string(s.classification).c_str(),
              s.note.empty() ? "" : ": ", s.note.c_str());
  if (final_run) {
    ExperimentConfig fc = cfg;
    fc.b0 = s.b0_star;
    const RunResult r = run_experiment(fc);
    const RunAnalysis a = analyze_run(r);
    save_run(fs::path(c.out) / "final", r, a);
    print_run(r, a);
  }
  return exit_for(s.classification);
}

// -------- post-processing --------

int cmd_diagnose(const std::string& dir) {
  const RunAnalysis a = diagnose_run(dir);
  json j = to_json(a);
  std::cout << j["fits"].dump(2) << "\n";
  std::printf("rescaled: T0 = %.4f, ell error %.3g, x error %.3g at the last frame\n", a.rescaled.T0,
              a.rescaled.ell_rel_error, a.rescaled.x_rel_error);
  return kOk;
}

int cmd_airy(const std::string& dir, double t_mid, const AiryOptions& opts) {
  const StoredRun s = load_run(dir);
  if (s.snapshots.size() < 2) fail(ErrorCode::IoError, "airy comparison needs at least two snapshots");
  const auto& last = s.snapshots.back();
  const double target = t_mid > 0.0 ? t_mid : 0.5 * (s.snapshots.front().t + last.t);
  std::size_t k = 0;
  for (std::size_t i = 1; i + 1 < s.snapshots.size(); ++i)
    if (std::fabs(s.snapshots[i].t - target) < std::fabs(s.snapshots[k].t - target)) k = i;
  const auto rep = airy_compare(s.cfg.grid(), s.snapshots[k].u, s.snapshots[k].t, last.u, last.t, last.sigma, opts);
  dump(fs::path(dir) / "airy.json", to_json(rep));
  std::printf("nonlinear right mass %.6f, linear %.6f, int Q^2 %.6f: %s\n", rep.nonlinear_right_mass,
              rep.linear_right_mass, rep.q_mass, to_string(rep.verdict).c_str());
  return rep.verdict == AiryVerdict::Inconclusive ? kInconclusive : kOk;
}

int cmd_plot(const std::string& dir) {
  const StoredRun s = load_run(dir);
  AnalysisOptions o;
  o.with_airy = false;
  write_plots(dir, s.cfg, s.series, analyze_run(s.cfg, s.series, {}, o));
  std::cout << "plots written to " << (fs::path(dir) / "plots").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gKdV flattening-soliton laboratory"};
  app.require_subcommand(1);

  double pw = 40.0;
  std::size_t pn = 8192;
  std::string pout = "profiles";
  auto* prof = app.add_subcommand("profiles", "ground state, R, P and their pairings");
  prof->add_option("--half-width", pw);
  prof->add_option("--points", pn);
  prof->add_option("-o,--out", pout);

  Common tail_c;
  double tail_h = 0.25;
  auto* tail = app.add_subcommand("tail", "tail profile f0 and its persistence check");
  add_common(tail, tail_c, "tail");
  tail->add_option("--horizon", tail_h, "persistence horizon in units of t0");

  std::vector<double> thetas;
  double s_lo = 10.0, s_hi = 1000.0;
  int s_n = 64;
  std::string red_out = "reduced_ode";
  auto* red = app.add_subcommand("reduced-ode", "integrate the reduced system against its closed form");
  red->add_option("--theta", thetas)->take_all();
  red->add_option("--s-min", s_lo);
  red->add_option("--s-max", s_hi);
  red->add_option("--points", s_n);
  red->add_option("-o,--out", red_out);

  Common sim_c;
  auto* sim = app.add_subcommand("simulate", "one experiment into a run directory");
  add_common(sim, sim_c, "run");

  Common sh_c;
  bool no_final = false;
  auto* sh = app.add_subcommand("shoot", "bisection on b0");
  add_common(sh, sh_c, "shoot");
  sh->add_flag("--no-final", no_final, "skip the run at the selected b0");

  std::string diag_dir;
  auto* diag = app.add_subcommand("diagnose", "functionals, fits and plots of a stored run");
  diag->add_option("dir", diag_dir)->required();

  std::string airy_dir;
  double airy_mid = 0.0;
  AiryOptions airy_o;
  auto* airy = app.add_subcommand("airy-compare", "linear flow of a mid-run snapshot against the final state");
  airy->add_option("dir", airy_dir)->required();
  airy->add_option("--t-mid", airy_mid, "time of the linear start (default mid-run)");
  airy->add_option("--keep", airy_o.keep_fraction);
  airy->add_option("--lose", airy_o.lose_fraction);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "re-render the SVG plots of a stored run");
  plot->add_option("dir", plot_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*prof) return cmd_profiles(pw, pn, pout);
    if (*tail) return cmd_tail(tail_c, tail_h);
    if (*red) return cmd_reduced(thetas, s_lo, s_hi, s_n, red_out);
    if (*sim) return cmd_simulate(sim_c);
    if (*sh) return cmd_shoot(sh_c, !no_final);
    if (*diag) return cmd_diagnose(diag_dir);
    if (*airy) return cmd_airy(airy_dir, airy_mid, airy_o);
    if (*plot) return cmd_plot(plot_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError ? kConfig : kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kOk;
}
