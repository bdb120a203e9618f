#include "gkdv/rundir.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "gkdv/error.hpp"
#include "gkdv/svg.hpp"

namespace gkdv {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "snapshot encoding assumes a little-endian host");

// -------- base64 --------

std::string encode_doubles(std::span<const double> v) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const char*, 6, 8>>;
  const char* p = reinterpret_cast<const char*>(v.data());
  const std::size_t n = v.size() * sizeof(double);
  std::string out(It(p), It(p + n));
  out.append((3 - n % 3) % 3, '=');
  return out;
}

std::vector<double> decode_doubles(std::string_view text, std::size_t expected) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<const char*>, 8, 6>;
  std::string s(text);
  std::size_t pad = 0;
  while (!s.empty() && s.back() == '=') {
    s.pop_back();
    ++pad;
  }
  if (pad > 2 || (s.size() + pad) % 4 != 0) fail(ErrorCode::IoError, "malformed base64 field");
  std::string bytes;
  try {
    bytes.assign(It(s.data()), It(s.data() + s.size()));
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, std::string("malformed base64 field: ") + e.what());
  }
  const std::size_t nbytes = (s.size() + pad) / 4 * 3 - pad;
  bytes.resize(nbytes);
  if (nbytes % sizeof(double) != 0) fail(ErrorCode::IoError, "base64 field is not a whole number of doubles");
  std::vector<double> v(nbytes / sizeof(double));
  std::memcpy(v.data(), bytes.data(), nbytes);
  if (expected != 0 && v.size() != expected)
    fail(ErrorCode::IoError, "expected " + std::to_string(expected) + " samples, found " + std::to_string(v.size()));
  return v;
}

// -------- series --------

namespace {

template <class R, class V>
void visit_record(R& r, V&& v) {
  v("t", r.base.t);
  v("s", r.base.s);
  v("lambda", r.base.lambda);
  v("sigma", r.base.sigma);
  v("b", r.base.b);
  v("r", r.base.r);
  v("g", r.base.g);
  v("h", r.base.h);
  v("m1", r.base.m1);
  v("m2", r.base.m2);
  v("m_norm", r.base.m_norm);
  v("m_valid", r.base.m_valid);
  v("nb_norm", r.base.nb_norm);
  v("mass", r.base.mass);
  v("energy", r.base.energy);
  v("lambda_pred", r.lambda_pred);
  v("sigma_pred", r.sigma_pred);
  v("b_pred", r.b_pred);
  v("local_mass", r.local_mass);
  v("residue_l2", r.residue_l2);
  v("residue_h1", r.residue_h1);
  v("F", r.F);
  v("scaled_F", r.scaled_F);
  v("tube_distance", r.tube_distance);
  v("Mr", r.Mr);
  v("Er", r.Er);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(sep, start);
    out.emplace_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

double to_double(const std::string& s) {
  // strtod reads "nan" and "inf" as printed by %.17g
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail(ErrorCode::IoError, "bad number '" + s + "' in series.csv");
  return v;
}

}  // namespace

std::string series_csv(std::span<const RunRecord> series) {
  std::ostringstream os;
  RunRecord head;
  bool first = true;
  visit_record(head, [&](const char* name, auto&) {
    os << (first ? "" : ",") << name;
    first = false;
  });
  os << '\n';
  for (const auto& r : series) {
    first = true;
    visit_record(r, [&](const char*, const auto& field) {
      os << (first ? "" : ",");
      first = false;
      if constexpr (std::is_same_v<std::decay_t<decltype(field)>, bool>)
        os << (field ? 1 : 0);
      else
        os << fmt(field);
    });
    os << '\n';
  }
  return os.str();
}

std::vector<RunRecord> parse_series_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, "series.csv is empty");
  const auto header = split(line, ',');
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) fail(ErrorCode::IoError, "series.csv row has the wrong number of fields");
    RunRecord r;
    for (std::size_t c = 0; c < header.size(); ++c) {
      bool hit = false;
      visit_record(r, [&](const char* name, auto& field) {
        if (hit || header[c] != name) return;
        hit = true;
        if constexpr (std::is_same_v<std::decay_t<decltype(field)>, bool>)
          field = to_double(cells[c]) != 0.0;
        else
          field = to_double(cells[c]);
      });
    }
    out.push_back(r);
  }
  return out;
}

// -------- snapshots --------

std::string snapshot_line(const Snapshot& sn) {
  json j;
  j["t"] = sn.t;
  j["lambda"] = sn.lambda;
  j["sigma"] = sn.sigma;
  j["b"] = sn.b;
  j["r"] = sn.r;
  j["n"] = sn.u.size();
  j["u"] = encode_doubles(sn.u);
  j["n_f"] = sn.f.size();
  j["f"] = encode_doubles(sn.f);
  return j.dump();
}

Snapshot parse_snapshot_line(std::string_view line) {
  Snapshot sn;
  try {
    const json j = json::parse(line);
    sn.t = j.at("t").get<double>();
    sn.lambda = j.at("lambda").get<double>();
    sn.sigma = j.at("sigma").get<double>();
    sn.b = j.at("b").get<double>();
    sn.r = j.at("r").get<double>();
    const auto n = j.at("n").get<std::size_t>();
    const auto nf = j.at("n_f").get<std::size_t>();
    sn.u = decode_doubles(j.at("u").get<std::string>(), n);
    if (nf > 0) sn.f = decode_doubles(j.at("f").get<std::string>(), nf);
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("bad snapshot record: ") + e.what());
  }
  return sn;
}

std::string functionals_csv(std::span<const FunctionalSample> samples) {
  std::ostringstream os;
  os << "t,name,value,parameters\n";
  for (const auto& s : samples) {
    os << fmt(s.t) << ',' << s.name << ',' << fmt(s.value) << ',';
    bool first = true;
    for (const auto& [k, v] : s.parameters) {
      os << (first ? "" : ";") << k << '=' << fmt(v);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

// -------- json --------

namespace {

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_or_null(const std::optional<PowerFit>& f) { return f ? to_json(*f) : json(nullptr); }

}  // namespace

json to_json(const PowerFit& fit) {
  return {{"exponent", finite(fit.exponent)}, {"prefactor", finite(fit.prefactor)}, {"r_squared", finite(fit.r_squared)},
          {"t_lo", fit.t_lo},                 {"t_hi", fit.t_hi},                   {"points", fit.points}};
}

json to_json(const AiryReport& r) {
  return {{"t_mid", r.t_mid},
          {"t_final", r.t_final},
          {"sigma_final", r.sigma_final},
          {"nonlinear_right_mass", r.nonlinear_right_mass},
          {"linear_right_mass", r.linear_right_mass},
          {"q_mass", r.q_mass},
          {"initial_mass", r.initial_mass},
          {"verdict", to_string(r.verdict)}};
}

json to_json(const RunAnalysis& a) {
  json j;
  j["targets"] = {{"lambda_exponent", a.lambda_target},
                  {"sigma_exponent", a.sigma_target},
                  {"residue_exponent_gate", a.residue_gate}};
  j["fits"] = {{"lambda", fit_or_null(a.lambda_fit)},
               {"sigma", fit_or_null(a.sigma_fit)},
               {"residue_l2", fit_or_null(a.residue_l2_fit)},
               {"residue_h1", fit_or_null(a.residue_h1_fit)}};
  j["lambda_kappa_F"] = {{"final_half_ok", a.F.final_half.ok},
                         {"final_half_worst_rise", finite(a.F.final_half.worst_rise)},
                         {"near_monotonicity_constant", finite(a.F.near_constant)},
                         {"first", finite(a.F.first)},
                         {"max", finite(a.F.max)}};
  j["N_B_envelope"] = {{"ok", a.nb.ok}, {"worst_ratio", finite(a.nb.worst_ratio)}, {"s_at_worst", a.nb.s_at_worst}};
  j["airy"] = a.airy ? to_json(*a.airy) : json(nullptr);
  j["J"] = {{"slack_constant", finite(a.J.slack_constant)}, {"samples", a.J.samples}};
  json rs = {{"T0", a.rescaled.T0},
             {"ell_rel_error", finite(a.rescaled.ell_rel_error)},
             {"x_rel_error", finite(a.rescaled.x_rel_error)}};
  if (!a.rescaled.points.empty()) {
    const auto& p = a.rescaled.points.back();
    rs["final"] = {{"t", p.t}, {"ell", p.ell}, {"x", p.x}, {"ell_pred", p.ell_pred}, {"x_pred", p.x_pred}};
  }
  j["rescaled"] = rs;
  j["notes"] = a.notes;
  return j;
}

json to_json(const ShootResult& r) {
  auto steps = [](const std::vector<ShootStep>& v) {
    json a = json::array();
    for (const auto& s : v)
      a.push_back({{"b0", s.b0},
                   {"classification", to_string(s.classification)},
                   {"side", s.side},
                   {"final_ratio", finite(s.final_ratio)}});
    return a;
  };
  return {{"b0_star", r.b0_star},
          {"lo", r.lo},
          {"hi", r.hi},
          {"width", r.hi - r.lo},
          {"classification", to_string(r.classification)},
          {"monotone", r.monotone},
          {"note", r.note},
          {"robust", r.robust},
          {"bracket_history", steps(r.bracket_history)},
          {"probes", steps(r.probes)}};
}

json run_summary(const RunResult& run) {
  const auto& in = run.init;
  return {{"classification", to_string(run.classification)},
          {"termination", run.termination},
          {"blowup", run.blowup},
          {"tube_exit", run.tube_exit},
          {"reached_horizon", run.reached_horizon},
          {"degenerate", run.degenerate},
          {"t_reached", run.t_reached},
          {"t_end", run.cfg.t_end()},
          {"frames", run.series.size()},
          {"snapshots", run.snapshots.size()},
          {"mass_drift", finite(run.mass_drift)},
          {"energy_drift", finite(run.energy_drift)},
          {"wall_seconds", run.wall_seconds},
          {"initial",
           {{"t0", in.t0},
            {"s0", run.cfg.s0()},
            {"lambda0", in.lambda0},
            {"sigma0", in.sigma0},
            {"b0", in.b0},
            {"r0", in.r0},
            {"eps0_norm", in.eps0_norm},
            {"eps0_budget", in.eps0_budget},
            {"roundtrip_error", in.roundtrip_error}}}};
}

// -------- files --------

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::pair<double, double>> column(std::span<const RunRecord> series, double (*get)(const RunRecord&),
                                              bool use_s = false) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : series) out.emplace_back(use_s ? r.base.s : r.base.t, get(r));
  return out;
}

}  // namespace

void write_plots(const fs::path& dir, const ExperimentConfig& cfg, std::span<const RunRecord> series,
                 const RunAnalysis& analysis) {
  const fs::path pd = dir / "plots";
  fs::create_directories(pd);
  auto save = [&](const char* name, const PlotSpec& spec) { write_text(pd / name, render_svg(spec)); };

  save("lambda.svg", {"scale", "t", "lambda", true, true,
                      {{"lambda", column(series, [](const RunRecord& r) { return r.base.lambda; })},
                       {"prediction", column(series, [](const RunRecord& r) { return r.lambda_pred; }), true}}});
  save("sigma.svg", {"center", "t", "sigma", true, true,
                     {{"sigma", column(series, [](const RunRecord& r) { return r.base.sigma; })},
                      {"prediction", column(series, [](const RunRecord& r) { return r.sigma_pred; }), true}}});
  save("b.svg", {"|b|", "t", "|b|", true, true,
                 {{"|b|", column(series, [](const RunRecord& r) { return std::fabs(r.base.b); })},
                  {"prediction", column(series, [](const RunRecord& r) { return std::fabs(r.b_pred); }), true}}});

  // reference slope through the first usable residue sample
  std::vector<std::pair<double, double>> ref;
  const double slope = -(3.0 * cfg.beta() - 1.0) / 4.0;
  for (const auto& r : series)
    if (r.residue_l2 > 0.0) {
      for (const auto& q : series) ref.emplace_back(q.base.t, r.residue_l2 * std::pow(q.base.t / r.base.t, slope));
      break;
    }
  save("residue.svg", {"residue right of sigma/2", "t", "norm", true, true,
                       {{"L2", column(series, [](const RunRecord& r) { return r.residue_l2; })},
                        {"H1", column(series, [](const RunRecord& r) { return r.residue_h1; })},
                        {"t^(-(3b-1)/4)", ref, true}}});

  std::vector<std::pair<double, double>> env;
  for (const auto& r : series) env.emplace_back(r.base.s, 10.0 * std::pow(r.base.s, -1.25));
  save("nb.svg", {"N_B(eps)", "s", "N_B", true, true,
                  {{"N_B", column(series, [](const RunRecord& r) { return r.base.nb_norm; }, true)},
                   {"10 s^(-5/4)", env, true}}});
  save("lambda_kappa_F.svg", {"lambda^kappa F", "s", "lambda^kappa F", true, false,
                              {{"lambda^kappa F", column(series, [](const RunRecord& r) { return r.scaled_F; }, true)}}});

  PlotLine ell{"ell", {}, false}, ellp{"prediction", {}, true};
  for (const auto& p : analysis.rescaled.points)
    if (p.t > 0.0) {
      ell.points.emplace_back(p.t, p.ell);
      ellp.points.emplace_back(p.t, p.ell_pred);
    }
  save("rescaled_ell.svg", {"scale from initial time 0", "t - t0 (rescaled)", "ell", true, true, {ell, ellp}});
}

void save_run(const fs::path& dir, const RunResult& run, const RunAnalysis& analysis) {
  fs::create_directories(dir);
  write_text(dir / "config.txt", to_text(run.cfg));
  write_text(dir / "series.csv", series_csv(run.series));
  std::string nd;
  for (const auto& sn : run.snapshots) nd += snapshot_line(sn) + '\n';
  write_text(dir / "snapshots.ndjson", nd);
  write_text(dir / "functionals.csv", functionals_csv(analysis.functionals));
  json rep = run_summary(run);
  rep["analysis"] = to_json(analysis);
  write_text(dir / "report.json", rep.dump(2) + '\n');
  write_plots(dir, run.cfg, run.series, analysis);
}

StoredRun load_run(const fs::path& dir) {
  StoredRun s;
  s.cfg = load_experiment(dir / "config.txt");
  s.series = parse_series_csv(read_text(dir / "series.csv"));
  if (fs::exists(dir / "snapshots.ndjson")) {
    std::istringstream in(read_text(dir / "snapshots.ndjson"));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) s.snapshots.push_back(parse_snapshot_line(line));
  }
  if (fs::exists(dir / "report.json")) {
    try {
      s.report = json::parse(read_text(dir / "report.json"));
    } catch (const json::exception& e) {
      fail(ErrorCode::IoError, std::string("bad report.json: ") + e.what());
    }
  }
  return s;
}

RunAnalysis diagnose_run(const fs::path& dir, const AnalysisOptions& opts) {
  const StoredRun s = load_run(dir);
  const RunAnalysis a = analyze_run(s.cfg, s.series, s.snapshots, opts);
  write_text(dir / "functionals.csv", functionals_csv(a.functionals));
  const json aj = to_json(a);
  write_text(dir / "fits.json", aj.dump(2) + '\n');
  json rep = s.report.is_object() ? s.report : json::object();
  rep["analysis"] = aj;
  write_text(dir / "report.json", rep.dump(2) + '\n');
  write_plots(dir, s.cfg, s.series, a);
  return a;
}

}  // namespace gkdv
