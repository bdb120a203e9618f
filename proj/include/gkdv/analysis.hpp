#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkdv/diagnostics.hpp"
#include "gkdv/harness.hpp"

namespace gkdv {

struct EnvelopeReport {
  bool ok = true;
  double worst_ratio = 0.0;  // max of N_B / (factor s^{-5/4})
  double s_at_worst = 0.0;
};

struct FunctionalTrend {
  MonotoneReport final_half;   // lambda^kappa F on the second half of the s range
  double near_constant = 0.0;  // C with max (lambda^kappa F) <= first value + C s0^{-3}
  double first = 0.0, max = 0.0;
};

struct JTrend {
  // smallest C such that J(tau_i) <= J(tau_j) + C tau_j^{-(3 beta - 1)/2} for all i > j
  double slack_constant = 0.0;
  std::size_t samples = 0;
};

// Coordinates after moving the initial time to 0 and the initial scale to 1.
struct RescaledPoint {
  double t = 0.0;  // (t - t0) / lambda0^3
  double ell = 0.0, x = 0.0;
  double ell_pred = 0.0, x_pred = 0.0;  // (t/T0 + 1)^{(1-beta)/2}, (T0/beta)((t/T0 + 1)^beta - 1)
};
struct RescaledReport {
  double T0 = 0.0;
  std::vector<RescaledPoint> points;
  double ell_rel_error = 0.0, x_rel_error = 0.0;  // at the last frame
};

struct AnalysisOptions {
  double monotone_slack = 0.05;
  double envelope_factor = 10.0;
  AiryOptions airy{};
  bool with_airy = true;
};

struct RunAnalysis {
  double lambda_target = 0.0, sigma_target = 0.0;
  double residue_gate = 0.0;  // -(3 beta - 1)/4 + 0.1
  std::optional<PowerFit> lambda_fit, sigma_fit, residue_l2_fit, residue_h1_fit;
  std::vector<std::string> notes;
  FunctionalTrend F;
  EnvelopeReport nb;
  std::optional<AiryReport> airy;
  JTrend J;
  RescaledReport rescaled;
  std::vector<FunctionalSample> functionals;
};

// Fits over the final decade of t, functional trends and the Airy comparison between
// the snapshot nearest mid-run and the last one.
RunAnalysis analyze_run(const ExperimentConfig& cfg, std::span<const RunRecord> series,
                        std::span<const Snapshot> snapshots, const AnalysisOptions& opts = {});
RunAnalysis analyze_run(const RunResult& run, const AnalysisOptions& opts = {});

RescaledReport rescale_to_origin(const ExperimentConfig& cfg, std::span<const RunRecord> series);

}  // namespace gkdv
