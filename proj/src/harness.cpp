#include "gkdv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/reduced_ode.hpp"

namespace gkdv {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Flatten: return "FLATTEN";
    case Classification::Focus: return "FOCUS";
    case Classification::Exit: return "EXIT";
    case Classification::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

// -------- config --------

double ExperimentConfig::beta() const { return exponent_relations(theta).beta; }
double ExperimentConfig::t0() const { return std::pow(2.0 * x0, 1.0 / beta()); }
double ExperimentConfig::s0() const { return s_from_time(t0(), beta()); }
double ExperimentConfig::lambda0_value() const {
  return lambda0.value_or(original_time_laws(t0(), beta()).lambda_pred);
}
double ExperimentConfig::sigma0_value() const { return sigma0.value_or(original_time_laws(t0(), beta()).sigma_pred); }
double ExperimentConfig::b0_center() const { return -(2.0 * (1.0 - theta) / (2.0 * theta - 1.0)) / s0(); }
double ExperimentConfig::b0_value() const { return b0.value_or(b0_center()); }
SimGrid ExperimentConfig::grid() const { return SimGrid(x_min, x_max, n_points); }
TailSpec ExperimentConfig::tail() const { return make_tail_spec(theta, x0, right_trunc, c0_scale); }

namespace {

// one table drives parsing and printing
template <class Cfg, class V>
void visit_fields(Cfg& c, V&& v) {
  v("experiment.theta", c.theta);
  v("experiment.x0", c.x0);
  v("experiment.horizon", c.horizon);
  v("experiment.seed", c.seed);
  v("initial.lambda0", c.lambda0);
  v("initial.sigma0", c.sigma0);
  v("initial.b0", c.b0);
  v("initial.eps0_amplitude", c.eps0_amplitude);
  v("initial.eps0_width", c.eps0_width);
  v("initial.eps0_safety", c.eps0_safety);
  v("tail.c0_scale", c.c0_scale);
  v("tail.right_trunc", c.right_trunc);
  v("grid.x_min", c.x_min);
  v("grid.x_max", c.x_max);
  v("grid.n_points", c.n_points);
  v("profile.half_width", c.profile_half_width);
  v("profile.n_points", c.profile_points);
  v("solver.dt_max", c.solver.dt_max);
  v("solver.cfl", c.solver.cfl);
  v("solver.adaptive", c.solver.adaptive);
  v("solver.dealias", c.solver.dealias);
  v("solver.blowup_threshold", c.solver.blowup_threshold);
  v("solver.energy_jump_tol", c.solver.energy_jump_tol);
  v("sponge.width", c.sponge.width);
  v("sponge.strength", c.sponge.strength);
  v("sponge.left", c.sponge.left);
  v("sponge.right", c.sponge.right);
  v("run.frame_dt", c.frame_dt);
  v("run.snapshot_stride", c.snapshot_stride);
  v("run.stop_on_exit", c.stop_on_exit);
  v("modulation.b_star", c.modulation.b_star);
  v("modulation.alpha_star", c.modulation.alpha_star);
  v("modulation.B", c.modulation.B);
  v("modulation.newton_tol", c.modulation.newton_tol);
  v("modulation.max_iterations", c.modulation.max_iterations);
  v("diagnostics.decay_r", c.decay_r);
  v("diagnostics.decay_eps", c.decay_eps);
  v("classify.tube_lo", c.classify.tube_lo);
  v("classify.tube_hi", c.classify.tube_hi);
  v("classify.exit_mass", c.classify.exit_mass);
  v("classify.local_half_width", c.classify.local_half_width);
  v("classify.focus_persistence", c.classify.focus_persistence);
  v("shooting.center", c.shoot_center);
  v("shooting.half_width", c.shoot_half_width);
  v("shooting.max_bisections", c.max_bisections);
  v("shooting.width_tol", c.width_tol);
  v("shooting.verify_factor", c.verify_factor);
}

struct Assign {
  const std::string* text = nullptr;
  const std::string* want = nullptr;
  bool hit = false;
  template <class T>
  void operator()(const char* key, T& field) {
    if (hit || *want != key) return;
    hit = true;
    if constexpr (std::is_same_v<T, double>) {
      field = parse_real(key, *text);
    } else if constexpr (std::is_same_v<T, bool>) {
      field = parse_bool(key, *text);
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (*text == "auto")
        field.reset();
      else
        field = parse_real(key, *text);
    } else {
      const long long v = parse_integer(key, *text);
      if constexpr (std::is_unsigned_v<T>)
        if (v < 0) fail(ErrorCode::ConfigError, std::string(key) + " must be non-negative");
      field = static_cast<T>(v);
    }
  }
};

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  need(c.theta > 0.5 && c.theta < 1.0, "experiment.theta must lie in (1/2, 1)");
  need(c.x0 > 0.0, "experiment.x0 must be positive");
  need(c.horizon >= 0.0, "experiment.horizon must be non-negative");
  need(c.x_max > c.x_min, "grid.x_max must exceed grid.x_min");
  need(is_power_of_two(c.n_points) && c.n_points >= 16, "grid.n_points must be a power of two >= 16");
  need(is_power_of_two(c.profile_points), "profile.n_points must be a power of two");
  need(c.solver.dt_max > 0.0 && c.solver.cfl > 0.0, "solver.dt_max and solver.cfl must be positive");
  need(c.frame_dt > 0.0, "run.frame_dt must be positive");
  need(c.snapshot_stride >= 1, "run.snapshot_stride must be >= 1");
  need(c.classify.tube_lo > 0.0 && c.classify.tube_lo < 1.0 && c.classify.tube_hi > 1.0,
       "classify.tube_lo must lie in (0,1) and classify.tube_hi above 1");
  need(c.max_bisections >= 0, "shooting.max_bisections must be non-negative");
  need(c.verify_factor >= 0.0, "shooting.verify_factor must be non-negative");
  need(c.modulation.b_star > 0.0, "modulation.b_star must be positive");
  if (c.lambda0) need(*c.lambda0 > 0.0, "initial.lambda0 must be positive");
}

}  // namespace

ExperimentConfig experiment_from(const FlatConfig& flat) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : flat.entries()) {
    Assign a{&value, &key};
    visit_fields(cfg, a);
    if (!a.hit) fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) { return experiment_from(FlatConfig::load(path)); }

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::string section;
  ExperimentConfig c = cfg;
  visit_fields(c, [&](const char* key, auto& field) {
    using T = std::decay_t<decltype(field)>;
    const std::string k(key);
    const std::string sec = k.substr(0, k.find('.'));
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << "# " << sec << '\n';
      section = sec;
    }
    os << k << " = ";
    if constexpr (std::is_same_v<T, double>)
      os << format_real(field);
    else if constexpr (std::is_same_v<T, bool>)
      os << (field ? "true" : "false");
    else if constexpr (std::is_same_v<T, std::optional<double>>)
      os << (field ? format_real(*field) : std::string("auto"));
    else
      os << field;
    os << '\n';
  });
  return os.str();
}

// -------- initial data --------

std::shared_ptr<const ProfileSet> profile_set_for(const ExperimentConfig& cfg) {
  static std::mutex mu;
  static std::map<std::pair<double, std::size_t>, std::shared_ptr<const ProfileSet>> cache;
  const std::lock_guard lock(mu);
  const auto key = std::make_pair(cfg.profile_half_width, cfg.profile_points);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const ProfileSet>(build_profile_set(ProfileGrid(key.first, key.second)));
  return slot;
}

namespace {

// residue in the y variable on the simulation nodes, orthogonal to the three directions
std::vector<double> initial_residue(const ExperimentConfig& cfg, const SimGrid& g, double lam, double sig) {
  const std::size_t n = g.size();
  std::vector<double> e(n, 0.0);
  if (cfg.eps0_amplitude == 0.0) return e;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const std::array<double, 4> c{coef(rng), coef(rng), coef(rng), coef(rng)};
  const double w = cfg.eps0_width;
  auto ys = g.sample([&](double x) { return (x - sig) / lam; });
  for (std::size_t j = 0; j < n; ++j) {
    const double y = ys[j] / w;
    e[j] = (c[0] + c[1] * y + c[2] * y * y + c[3] * y * y * y) * std::exp(-0.5 * y * y);
  }
  const double dy = g.spacing() / lam;
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
    return s * dy;
  };
  std::vector<std::vector<double>> basis;
  for (auto z : {ground::lambda_q, ground::y_lambda_q, ground::q}) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = z(ys[j]);
    for (const auto& q : basis) {
      const double k = dot(v, q);
      for (std::size_t j = 0; j < n; ++j) v[j] -= k * q[j];
    }
    const double nv = std::sqrt(dot(v, v));
    for (auto& x : v) x /= nv;
    basis.push_back(std::move(v));
  }
  for (const auto& q : basis) {
    const double k = dot(e, q);
    for (std::size_t j = 0; j < n; ++j) e[j] -= k * q[j];
  }
  const double ne = std::sqrt(dot(e, e));
  for (auto& x : e) x *= cfg.eps0_amplitude / ne;
  return e;
}

}  // namespace

InitialData build_initial_data(const ExperimentConfig& cfg, const Modulator& mod) {
  const SimGrid& g = mod.grid();
  InitialData d;
  d.t0 = cfg.t0();
  d.lambda0 = cfg.lambda0_value();
  d.sigma0 = cfg.sigma0_value();
  d.b0 = cfg.b0_value();
  require(g.x_min() < d.sigma0 - 20.0 * d.lambda0 && g.x_max() > d.sigma0 + 20.0 * d.lambda0, ErrorCode::GridTooSmall,
          "grid must hold the soliton with 20 lambda0 on either side");
  const TailSpec spec = cfg.tail();
  d.f0 = build_tail(spec, g);
  const bool has_tail = sup_norm(d.f0) > 0.0;
  // same interpolant as the decomposition so the round trip is exact
  d.r0 = has_tail ? std::sqrt(d.lambda0) * TrigInterpolant(g, d.f0)(d.sigma0) : 0.0;

  d.eps0 = initial_residue(cfg, g, d.lambda0, d.sigma0);
  double e2 = 0.0;
  for (double v : d.eps0) e2 += v * v;
  d.eps0_norm = std::sqrt(e2 * g.spacing() / d.lambda0);
  const double beta = cfg.beta();
  d.eps0_budget = cfg.eps0_safety * std::pow(d.t0, -(3.0 * beta - 1.0) / 20.0 - rho_of_theta(cfg.theta));
  require(d.eps0_norm <= d.eps0_budget, ErrorCode::TubeViolation,
          "initial residue norm " + std::to_string(d.eps0_norm) + " exceeds the budget " +
              std::to_string(d.eps0_budget));

  d.U0 = mod.ansatz_field(d.lambda0, d.sigma0, d.b0, d.r0);
  const double a = 1.0 / std::sqrt(d.lambda0);
  for (std::size_t j = 0; j < g.size(); ++j) d.U0[j] += a * d.eps0[j] + d.f0[j];

  d.roundtrip = mod.decompose(d.t0, d.U0, d.f0, {d.lambda0, d.sigma0, d.b0});
  d.roundtrip_error = std::max({std::fabs(d.roundtrip.lambda - d.lambda0), std::fabs(d.roundtrip.sigma - d.sigma0),
                                std::fabs(d.roundtrip.b - d.b0)});
  require(d.roundtrip_error <= 1e-8, ErrorCode::Singular,
          "initial data round trip misses the parameters by " + std::to_string(d.roundtrip_error));
  d.roundtrip.epsilon.clear();
  d.roundtrip.epsilon_x.clear();
  return d;
}

InitialData build_initial_data(const ExperimentConfig& cfg) {
  Modulator mod(profile_set_for(cfg), cfg.grid(), cfg.modulation);
  return build_initial_data(cfg, mod);
}

// -------- classification --------

namespace {

TrajectoryPoint point_of(const RunRecord& r) {
  return {r.base.t, r.base.lambda, r.base.sigma, r.base.b, r.lambda_pred, r.sigma_pred, r.b_pred, r.local_mass};
}

struct Verdict {
  Classification c = Classification::Inconclusive;
  bool decided = false;
  bool band_violation = false;  // sigma or b left the band
};

Verdict scan(const std::vector<TrajectoryPoint>& pts, bool blowup, const ClassifierThresholds& th) {
  Verdict v;
  int decreasing = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const double ratio = p.lambda / p.lambda_pred;
    if (i > 0 && p.lambda < pts[i - 1].lambda)
      ++decreasing;
    else
      decreasing = 0;
    if (p.local_mass < th.exit_mass * ground::mass || ratio > th.tube_hi) {
      v.c = Classification::Exit;
      v.decided = true;
      return v;
    }
    if (ratio < th.tube_lo && decreasing >= th.focus_persistence) {
      v.c = Classification::Focus;
      v.decided = true;
      return v;
    }
    const double rs = p.sigma / p.sigma_pred;
    if (!(rs >= th.tube_lo && rs <= th.tube_hi)) v.band_violation = true;
    if (p.b_pred != 0.0) {
      const double rb = p.b / p.b_pred;
      if (!(rb >= th.tube_lo && rb <= th.tube_hi)) v.band_violation = true;
    }
  }
  if (blowup) {
    v.c = Classification::Focus;
    v.decided = true;
  }
  return v;
}

}  // namespace

ClassifyInput classify_input(const RunResult& run) {
  ClassifyInput in;
  for (const auto& r : run.series) in.points.push_back(point_of(r));
  in.blowup = run.blowup;
  in.reached_horizon = run.reached_horizon;
  in.tube_exit = run.tube_exit;
  return in;
}

Classification classify_trajectory(const ClassifyInput& in, const ClassifierThresholds& th) {
  const Verdict v = scan(in.points, in.blowup, th);
  if (v.decided) return v.c;
  if (in.tube_exit && in.points.size() >= 2) {
    // decomposition lost before a band was crossed: side from the scale trend
    const auto& p = in.points.back();
    const auto& q = in.points[in.points.size() - 2];
    const double ratio = p.lambda / p.lambda_pred, prev = q.lambda / q.lambda_pred;
    if (ratio > 1.0 && ratio > prev) return Classification::Exit;
    if (ratio < 1.0 && ratio < prev) return Classification::Focus;
    return Classification::Inconclusive;
  }
  if (in.points.empty() || !in.reached_horizon || v.band_violation) return Classification::Inconclusive;
  const auto& last = in.points.back();
  const double ratio = last.lambda / last.lambda_pred;
  return (ratio >= th.tube_lo && ratio <= th.tube_hi) ? Classification::Flatten : Classification::Inconclusive;
}

int shooting_side(Classification c, const ClassifyInput& in) {
  switch (c) {
    case Classification::Focus: return -1;
    case Classification::Exit: return +1;
    case Classification::Flatten:
    case Classification::Inconclusive: {
      // a run that left a band but reached the horizon is still placed by its scale
      if (in.points.empty() || (c == Classification::Inconclusive && !in.reached_horizon)) return 0;
      const auto& p = in.points.back();
      const double lr = std::log(p.lambda / p.lambda_pred);
      if (!std::isfinite(lr)) return 0;
      return lr < 0.0 ? -1 : +1;
    }
  }
  return 0;
}

// -------- experiment --------

RunResult run_experiment(const ExperimentConfig& cfg, const RunObserver& obs) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunResult res;
  res.cfg = cfg;
  const SimGrid g = cfg.grid();
  Modulator mod(profile_set_for(cfg), g, cfg.modulation);
  res.init = build_initial_data(cfg, mod);
  const auto& init = res.init;
  const double beta = cfg.beta(), theta = cfg.theta;
  const double t0 = init.t0, t_end = cfg.t_end();
  const bool has_tail = sup_norm(init.f0) > 0.0;
  res.degenerate = !has_tail;
  const ExponentSet ex = exponent_relations(theta);
  const DecayParams dp{cfg.decay_r, cfg.decay_eps, beta, ex.nu};

  GkdvSolver su(g, cfg.solver, cfg.sponge, init.U0, t0);
  std::optional<GkdvSolver> sf;
  if (has_tail) sf.emplace(g, cfg.solver, cfg.sponge, init.f0, t0);

  const Conserved c0 = conserved_quantities(g, init.U0);
  const auto ux0 = spectral_derivative(g, init.U0, 1);
  double escale = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) escale += 0.5 * ux0[j] * ux0[j] + std::pow(init.U0[j], 6) / 6.0;
  escale *= g.spacing();

  std::vector<ModulationFrame> frames;
  std::vector<RunRecord> extras;
  std::vector<TrajectoryPoint> pts;
  ModulationGuess guess{init.lambda0, init.sigma0, init.b0};
  const std::vector<double> no_tail;
  bool stop = false;
  std::optional<Snapshot> last_good;

  auto process = [&](double t, std::size_t index) {
    const auto u = su.field();
    const std::span<const double> f = has_tail ? sf->field() : std::span<const double>(no_tail);
    ModulationFrame fr;
    try {
      fr = mod.decompose(t, u, f, guess);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OutsideTube || e.code() == ErrorCode::NewtonDiverged ||
          e.code() == ErrorCode::JacobianSingular) {
        res.termination = std::string("tube_exit: ") + e.what();
        res.tube_exit = true;
        stop = true;
        return;
      }
      throw;
    }
    guess = {fr.lambda, fr.sigma, fr.b};
    RunRecord rec;
    if (has_tail) {
      const auto laws = original_time_laws(t, beta);
      rec.lambda_pred = laws.lambda_pred;
      rec.sigma_pred = laws.sigma_pred;
      rec.b_pred = -(2.0 * (1.0 - theta) / (2.0 * theta - 1.0)) / s_from_time(t, beta);
    } else {
      // no tail: the prediction is the traveling soliton itself
      rec.lambda_pred = init.lambda0;
      rec.sigma_pred = init.sigma0 + (t - t0) / (init.lambda0 * init.lambda0);
      rec.b_pred = 0.0;
    }
    double lm = 0.0;
    const double hw = cfg.classify.local_half_width * fr.lambda;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (std::fabs(g.node(j) - fr.sigma) < hw) lm += u[j] * u[j];
    rec.local_mass = lm * g.spacing();
    if (fr.sigma > 0.0 && fr.sigma < g.x_max()) {
      auto eta = soliton_part(g, fr.lambda, fr.sigma);
      for (std::size_t j = 0; j < g.size(); ++j) eta[j] = u[j] - eta[j];
      const auto rn = residue_right_norm(g, eta, fr.sigma);
      rec.residue_l2 = rn.l2;
      rec.residue_h1 = rn.h1;
    }
    const auto F = functional_F(g, fr, w_plus_f(mod, fr, f), cfg.modulation.B, theta);
    rec.F = F.value;
    rec.scaled_F = F.scaled;
    rec.tube_distance = fr.tube_distance;
    if (has_tail) {
      std::vector<double> q(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) q[j] = f[j] - init.f0[j];
      rec.Mr = functional_Mr(g, q, t, dp);
      rec.Er = functional_Er(g, q, init.f0, t, dp);
    }
    Snapshot sn;
    sn.t = t;
    sn.lambda = fr.lambda;
    sn.sigma = fr.sigma;
    sn.b = fr.b;
    sn.r = fr.r;
    sn.u.assign(u.begin(), u.end());
    sn.f.assign(f.begin(), f.end());
    if (index % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || t >= t_end)
      res.snapshots.push_back(std::move(sn));
    else
      last_good = std::move(sn);  // kept so the last decomposed frame is always stored
    fr.epsilon.clear();
    fr.epsilon.shrink_to_fit();
    fr.epsilon_x.clear();
    fr.epsilon_x.shrink_to_fit();
    frames.push_back(std::move(fr));
    rec.base.t = t;
    rec.base.lambda = frames.back().lambda;
    rec.base.sigma = frames.back().sigma;
    rec.base.b = frames.back().b;
    extras.push_back(rec);
    pts.push_back(point_of(rec));
    if (cfg.stop_on_exit && scan(pts, false, cfg.classify).decided) {
      res.termination = "classified";
      stop = true;
    }
  };

  double t = t0;
  std::size_t index = 0;
  process(t, index);
  while (!stop && t < t_end) {
    // keep the s spacing of frames well below the quadrature limit
    const double lam = frames.back().lambda;
    double next = t + std::min(cfg.frame_dt, 0.25 * lam * lam * lam);
    if (next > t_end - 1e-9 * t_end) next = t_end;
    try {
      su.advance_to(next);
      if (sf) sf->advance_to(next);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BlowupDetected) throw;
      res.blowup = true;
      res.termination = std::string("blowup: ") + e.what();
      break;
    }
    t = next;
    process(t, ++index);
  }
  if (last_good && (res.snapshots.empty() || res.snapshots.back().t < last_good->t))
    res.snapshots.push_back(std::move(*last_good));
  res.t_reached = frames.empty() ? t0 : frames.back().t;
  res.reached_horizon = !frames.empty() && res.t_reached >= t_end && !res.blowup && !stop;
  if (res.reached_horizon) res.termination = "horizon";
  if (cfg.horizon == 0.0 && !frames.empty() && !res.blowup) res.reached_horizon = true;

  const Conserved c1 = conserved_quantities(g, su.field());
  res.mass_drift = (c1.mass + su.absorbed_mass() - c0.mass) / c0.mass;
  res.energy_drift = (c1.energy + su.absorbed_energy() - c0.energy) / escale;

  if (!frames.empty()) {
    SeriesOptions so;
    so.s0 = cfg.s0();
    so.params.theta = theta;
    so.params.c0 = cfg.tail().c0;
    const auto series = assemble_series(frames, so);
    for (std::size_t i = 0; i < series.size(); ++i) {
      extras[i].base = series[i];
      if (obs.on_frame) obs.on_frame(extras[i]);
    }
  }
  res.series = std::move(extras);
  res.classification = classify_trajectory(classify_input(res), cfg.classify);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

// -------- shooting --------

std::pair<double, double> admissible_b0_interval(const ExperimentConfig& cfg) {
  const double w = std::pow(cfg.s0(), -1.0 - 3.0 * rho_of_theta(cfg.theta));
  return {cfg.b0_center() - w, cfg.b0_center() + w};
}

ShootStep run_candidate(const ExperimentConfig& cfg, double b0) {
  ExperimentConfig c = cfg;
  c.b0 = b0;
  const RunResult r = run_experiment(c);
  ShootStep st;
  st.b0 = b0;
  st.classification = r.classification;
  const auto in = classify_input(r);
  st.side = in.points.empty() ? 0 : shooting_side(r.classification, in);
  if (!in.points.empty()) st.final_ratio = in.points.back().lambda / in.points.back().lambda_pred;
  return st;
}

ShootResult shoot_b0(const ExperimentConfig& cfg, const CandidateRunner& runner) {
  const double center = cfg.shoot_center.value_or(cfg.b0_center());
  double lo = center - cfg.shoot_half_width, hi = center + cfg.shoot_half_width;
  require(hi > lo, ErrorCode::BracketInvalid, "degenerate shooting bracket");
  ShootResult out;
  const ShootStep a = runner(lo), b = runner(hi);
  out.bracket_history = {a, b};
  require(a.side != 0 && b.side != 0 && a.side != b.side, ErrorCode::BracketInvalid,
          "bracket endpoints classify as " + to_string(a.classification) + " and " + to_string(b.classification));
  const int side_lo = a.side;
  bool undecided = false;
  for (int i = 0; i < cfg.max_bisections; ++i) {
    if (cfg.width_tol > 0.0 && hi - lo < cfg.width_tol) break;
    const double mid = 0.5 * (lo + hi);
    const ShootStep m = runner(mid);
    out.bracket_history.push_back(m);
    if (m.side == 0) {
      undecided = true;
      out.note = "candidate b0 = " + format_real(mid) + " could not be placed";
      break;
    }
    (m.side == side_lo ? lo : hi) = mid;
  }
  out.lo = lo;
  out.hi = hi;
  out.b0_star = 0.5 * (lo + hi);

  // displaced candidates must fall on the side of the bracket end they move toward
  if (!undecided && cfg.verify_factor > 0.0) {
    const double d = cfg.verify_factor * (hi - lo);
    for (const double b : {out.b0_star - d, out.b0_star + d}) out.probes.push_back(runner(b));
    auto decisive = [](const ShootStep& s) {
      return s.classification == Classification::Focus || s.classification == Classification::Exit;
    };
    out.robust = out.probes[0].side == side_lo && out.probes[1].side == -side_lo && decisive(out.probes[0]) &&
                 decisive(out.probes[1]);
  }

  // the classifier must be monotone in b0: one block of each side
  auto sorted = out.bracket_history;
  sorted.insert(sorted.end(), out.probes.begin(), out.probes.end());
  std::sort(sorted.begin(), sorted.end(), [](const ShootStep& x, const ShootStep& y) { return x.b0 < y.b0; });
  std::erase_if(sorted, [](const ShootStep& x) { return x.side == 0; });
  int changes = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].side != sorted[i - 1].side) ++changes;
  out.monotone = changes <= 1;

  if (!out.monotone) {
    out.classification = Classification::Inconclusive;
    out.note = "classification is not monotone in b0";
  } else if (undecided) {
    out.classification = Classification::Inconclusive;
  } else if (cfg.width_tol > 0.0 && hi - lo >= cfg.width_tol) {
    out.classification = Classification::Inconclusive;
    out.note = "bisection budget exhausted before width_tol";
  } else {
    out.classification = Classification::Flatten;
  }
  return out;
}

ShootResult shoot_b0(const ExperimentConfig& cfg) {
  return shoot_b0(cfg, [&](double b0) { return run_candidate(cfg, b0); });
}

}  // namespace gkdv
