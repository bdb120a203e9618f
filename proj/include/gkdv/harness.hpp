#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gkdv/config.hpp"
#include "gkdv/diagnostics.hpp"
#include "gkdv/evolution.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/profiles.hpp"
#include "gkdv/tails.hpp"

namespace gkdv {

enum class Classification { Flatten, Focus, Exit, Inconclusive };
std::string to_string(Classification c);

struct ClassifierThresholds {
  double tube_lo = 0.5;          // multiplicative band around the predicted laws
  double tube_hi = 2.0;
  double exit_mass = 0.5;        // local mass below this * int Q^2 means exit
  double local_half_width = 5.0; // |y| window of the local mass
  int focus_persistence = 3;     // consecutive decreasing frames required for FOCUS
};

struct ExperimentConfig {
  double theta = 0.75;
  double x0 = 20.0;
  double horizon = 16.0;  // run length in units of t0
  std::uint64_t seed = 0;

  std::optional<double> lambda0, sigma0, b0;  // defaults from the closed-form laws at t0
  double eps0_amplitude = 0.0;                // L2 size of the orthogonal residue at t0
  double eps0_width = 2.0;
  double eps0_safety = 1.0;                   // multiplies the smallness budget

  double c0_scale = 1.0;  // 0 removes the tail
  double right_trunc = 1000.0;

  double x_min = -1000.0, x_max = 1200.0;
  std::size_t n_points = 4096;
  double profile_half_width = 40.0;
  std::size_t profile_points = 8192;

  SolverConfig solver{};
  SpongeSpec sponge{.width = 200.0, .strength = 0.5, .left = true, .right = false};

  double frame_dt = 25.0;     // spacing of modulation frames in t
  int snapshot_stride = 32;   // every k-th frame is stored with its fields
  bool stop_on_exit = true;   // stop once the classification is decided

  ModulationOptions modulation = [] {
    ModulationOptions o;
    o.b_star = 0.3;
    o.alpha_star = 0.5;
    o.profile_epsilon = false;
    return o;
  }();

  double decay_r = 1.0, decay_eps = 0.001;  // omega_r parameters of the tail functionals

  ClassifierThresholds classify{};

  // shooting bracket: center +- half_width, center defaults to the b0 law
  std::optional<double> shoot_center;
  double shoot_half_width = 0.05;
  int max_bisections = 6;
  double width_tol = 0.0;
  double verify_factor = 10.0;  // probes at b0* -+ factor * final width; 0 skips them

  // derived
  double beta() const;
  double t0() const;
  double s0() const;
  double lambda0_value() const;
  double sigma0_value() const;
  double b0_center() const;
  double b0_value() const;
  double t_end() const { return t0() * (1.0 + horizon); }
  SimGrid grid() const;
  TailSpec tail() const;
};

// Builds a config from flat text; unknown keys and bad values raise ConfigError.
ExperimentConfig experiment_from(const FlatConfig& flat);
ExperimentConfig load_experiment(const std::filesystem::path& path);
// Every key with its effective value, in parseable form.
std::string to_text(const ExperimentConfig& cfg);

struct InitialData {
  double t0 = 0.0, lambda0 = 0.0, sigma0 = 0.0, b0 = 0.0, r0 = 0.0;
  std::vector<double> U0, f0, eps0;  // eps0 on the simulation nodes in the y variable
  double eps0_norm = 0.0, eps0_budget = 0.0;
  ModulationFrame roundtrip;
  double roundtrip_error = 0.0;  // max of the three parameter errors
};

// Shared profile set for a config (built once, cached by grid).
std::shared_ptr<const ProfileSet> profile_set_for(const ExperimentConfig& cfg);

InitialData build_initial_data(const ExperimentConfig& cfg, const Modulator& mod);
InitialData build_initial_data(const ExperimentConfig& cfg);

struct RunRecord {
  SeriesRecord base;
  double lambda_pred = 0.0, sigma_pred = 0.0, b_pred = 0.0;
  double local_mass = 0.0;
  double residue_l2 = 0.0, residue_h1 = 0.0;  // eta = U - A over x > sigma/2
  double F = 0.0, scaled_F = 0.0;
  double tube_distance = 0.0;
  double Mr = 0.0, Er = 0.0;  // tail functionals of q = f - f0
};

struct Snapshot {
  double t = 0.0;
  double lambda = 0.0, sigma = 0.0, b = 0.0, r = 0.0;
  std::vector<double> u, f;
};

struct RunResult {
  ExperimentConfig cfg;
  InitialData init;
  std::vector<RunRecord> series;
  std::vector<Snapshot> snapshots;
  Classification classification = Classification::Inconclusive;
  std::string termination = "horizon";
  bool blowup = false;
  bool tube_exit = false;
  bool reached_horizon = false;
  bool degenerate = false;  // no tail: compared against the constant-scale soliton
  double t_reached = 0.0;
  double mass_drift = 0.0, energy_drift = 0.0;  // relative, sponge losses added back
  double wall_seconds = 0.0;
};

struct RunObserver {
  std::function<void(const RunRecord&)> on_frame;
};

RunResult run_experiment(const ExperimentConfig& cfg, const RunObserver& obs = {});

// Minimal view of a trajectory for the classifier.
struct TrajectoryPoint {
  double t = 0.0, lambda = 0.0, sigma = 0.0, b = 0.0;
  double lambda_pred = 0.0, sigma_pred = 0.0, b_pred = 0.0;
  double local_mass = 0.0;
};
struct ClassifyInput {
  std::vector<TrajectoryPoint> points;
  bool blowup = false;
  bool reached_horizon = true;
  bool tube_exit = false;  // the decomposition failed before the horizon
};
ClassifyInput classify_input(const RunResult& run);
Classification classify_trajectory(const ClassifyInput& in, const ClassifierThresholds& th);

// Which end of the bracket a classification belongs to: -1 focusing side, +1 exit side,
// 0 undecidable. FLATTEN runs, and INCONCLUSIVE runs that reached the horizon, are placed
// by the sign of the final log(lambda/prediction).
int shooting_side(Classification c, const ClassifyInput& in);

struct ShootStep {
  double b0 = 0.0;
  Classification classification = Classification::Inconclusive;
  int side = 0;
  double final_ratio = 0.0;  // lambda/prediction at the last frame
};

struct ShootResult {
  double b0_star = 0.0;
  double lo = 0.0, hi = 0.0;  // final bracket
  std::vector<ShootStep> bracket_history;
  std::vector<ShootStep> probes;  // displaced candidates below and above b0_star
  bool robust = false;            // both probes are FOCUS/EXIT on the expected sides
  Classification classification = Classification::Inconclusive;
  bool monotone = true;
  std::string note;
};

using CandidateRunner = std::function<ShootStep(double b0)>;

// Bisection on b0; the runner is injectable so the arithmetic can be tested without PDE solves.
ShootResult shoot_b0(const ExperimentConfig& cfg, const CandidateRunner& runner);
ShootResult shoot_b0(const ExperimentConfig& cfg);
ShootStep run_candidate(const ExperimentConfig& cfg, double b0);

// [center - s0^{-1-3 rho}, center + s0^{-1-3 rho}]
std::pair<double, double> admissible_b0_interval(const ExperimentConfig& cfg);

}  // namespace gkdv
