#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gkdv/analysis.hpp"
#include "gkdv/harness.hpp"

namespace gkdv {

// Raw little-endian doubles as base64; decoding checks the expected count when given.
std::string encode_doubles(std::span<const double> v);
std::vector<double> decode_doubles(std::string_view text, std::size_t expected = 0);

std::string series_csv(std::span<const RunRecord> series);
std::vector<RunRecord> parse_series_csv(std::string_view text);
std::string snapshot_line(const Snapshot& sn);
Snapshot parse_snapshot_line(std::string_view line);
std::string functionals_csv(std::span<const FunctionalSample> samples);

nlohmann::json to_json(const PowerFit& fit);
nlohmann::json to_json(const AiryReport& rep);
nlohmann::json to_json(const RunAnalysis& a);
nlohmann::json to_json(const ShootResult& r);
nlohmann::json run_summary(const RunResult& run);

struct StoredRun {
  ExperimentConfig cfg;
  std::vector<RunRecord> series;
  std::vector<Snapshot> snapshots;
  nlohmann::json report;  // empty when report.json is missing
};

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

// config.txt, series.csv, snapshots.ndjson, functionals.csv, report.json, plots/*.svg
void save_run(const std::filesystem::path& dir, const RunResult& run, const RunAnalysis& analysis);
StoredRun load_run(const std::filesystem::path& dir);

// fits.json, functionals.csv, plots and the analysis block of report.json from stored data
RunAnalysis diagnose_run(const std::filesystem::path& dir, const AnalysisOptions& opts = {});

void write_plots(const std::filesystem::path& dir, const ExperimentConfig& cfg, std::span<const RunRecord> series,
                 const RunAnalysis& analysis);

}  // namespace gkdv
