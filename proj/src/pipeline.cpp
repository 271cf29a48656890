#include "coorad/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "coorad/error.hpp"
#include "coorad/hash.hpp"
#include "coorad/metrics.hpp"
#include "coorad/montecarlo.hpp"
#include "coorad/rng.hpp"

namespace coorad::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {
constexpr const char* kModule = "cli-pipeline";

const std::map<std::string, std::string>& module_versions() {
  static const std::map<std::string, std::string> v{
      {"analysis-metrics", "1.0.0"}, {"cli-pipeline", "1.0.0"},       {"coordination-game", "1.0.0"},
      {"epidemic-sim", "1.0.0"},     {"panel-econometrics", "1.0.0"}, {"terrain-propagation", "1.0.0"}};
  return v;
}

RunManifest start(const scenario::Scenario& s, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.scenario_hash = scenario::scenario_hash(s);
  m.seed = s.run.seed;
  m.module_versions = module_versions();
  for (const auto* p : {&s.terrain.grid_csv, &s.transmitters.csv})
    if (!p->empty()) m.inputs.push_back({*p, sha256_file(s.resolve(*p))});
  return m;
}

// Inputs produced in the output directory are recorded relative to it, so
// manifests do not depend on where a run was written.
FileEntry input_entry(const fs::path& file, const fs::path& dir) {
  const auto rel = fs::weakly_canonical(file).lexically_relative(fs::weakly_canonical(dir));
  const bool inside = !rel.empty() && *rel.begin() != "..";
  return {inside ? rel.generic_string() : file.generic_string(), sha256_file(file)};
}

void emit(const fs::path& dir, const std::string& name, const std::string& content, RunManifest& m) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ComputationError(kModule, "cannot write " + (dir / name).string());
  out << content;
  if (!out) throw ComputationError(kModule, "failed writing " + (dir / name).string());
  m.outputs.push_back({name, sha256_hex(content)});
}

void finish(const fs::path& dir, RunManifest& m) {
  std::ofstream out(dir / ("manifest_" + m.command + ".json"), std::ios::binary);
  if (!out) throw ComputationError(kModule, "cannot write the manifest in " + dir.string());
  out << m.to_json();
}

fs::path prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ParameterError(kModule, "cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

double read_number(const ordered_json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

ordered_json coefficient(double est, double se, double lo, double hi) {
  return {{"est", number(est)}, {"se", number(se)}, {"ci_low", number(lo)}, {"ci_high", number(hi)}};
}

ordered_json path_json(const econ::EventStudyResult& r) {
  ordered_json path = ordered_json::array();
  for (const auto& c : r.path)
    path.push_back({{"tau", c.tau},
                    {"beta", number(c.beta)},
                    {"se", number(c.se)},
                    {"ci_low", number(c.ci_low)},
                    {"ci_high", number(c.ci_high)},
                    {"omitted", c.omitted}});
  return {{"treatment", r.treatment},
          {"se_source", r.se_source},
          {"bootstrap_reps", r.bootstrap_reps},
          {"bootstrap_failures", r.bootstrap_failures},
          {"path", path}};
}

std::string csv_number(double x) { return format_number(x); }

Table read_panel(const fs::path& p, const scenario::Scenario& s) {
  if (!fs::exists(p)) throw ParameterError(kModule, "panel file does not exist: " + p.string());
  Table t = read_csv_file(p.string());
  if (!t.has("month")) throw ParameterError(kModule, "panel lacks a month column");
  return montecarlo::with_event_time(std::move(t), s.timeline);
}
}  // namespace

std::uint64_t stream_seed(const scenario::Scenario& s, Stream stream) {
  return derive_seed(s.run.seed, static_cast<std::uint64_t>(stream));
}

World build_world(const scenario::Scenario& s) {
  s.validate();
  World w;
  if (s.terrain.grid_csv.empty()) {
    w.grid = terrain::synth_terrain(stream_seed(s, Stream::terrain), s.terrain.nx, s.terrain.ny, s.terrain.cell_size_m,
                                    s.terrain.ruggedness, s.terrain.height_scale_m);
  } else {
    std::ifstream in(s.resolve(s.terrain.grid_csv));
    w.grid = terrain::read_grid_csv(in);
  }
  w.regions = epidemic::build_regions(stream_seed(s, Stream::regions), s.regions, w.grid);
  if (s.transmitters.csv.empty()) {
    w.transmitters = epidemic::synth_transmitters(stream_seed(s, Stream::roster), w.regions, s.transmitters.roster);
  } else {
    std::ifstream in(s.resolve(s.transmitters.csv));
    w.transmitters = terrain::read_transmitters_csv(in);
    for (const auto& tx : w.transmitters)
      if (tx.home_prefecture < 0 || tx.home_prefecture >= w.regions.regions.n_prefectures)
        throw ParameterError(kModule, fmt::format("transmitter '{}' has home prefecture {} outside [0, {})", tx.id,
                                                  tx.home_prefecture, w.regions.regions.n_prefectures));
  }
  w.coverage = terrain::aggregate_coverage(w.grid, w.transmitters, w.regions.regions, s.propagation,
                                           w.regions.majority_language_names(), s.run.threads);
  epidemic::attach_coverage(w.regions, w.coverage, w.transmitters);
  return w;
}

econ::RegressionSpec regression_spec(const scenario::EstimationSettings& e) {
  econ::RegressionSpec spec;
  spec.outcome = e.outcome;
  spec.treatments = {e.treatment};
  spec.event_time = "event_time";
  spec.omitted_event_time = e.omitted_event_time;
  spec.interacted_controls = e.interacted_controls;
  spec.controls = e.controls;
  spec.unit = e.unit;
  spec.time = e.time;
  spec.cluster = e.cluster;
  spec.lagged_outcome = e.lagged_outcome;
  return spec;
}

std::string RunManifest::to_json() const {
  ordered_json j;
  j["command"] = command;
  j["scenario_hash"] = scenario_hash;
  j["seed"] = seed;
  j["module_versions"] = ordered_json(module_versions);
  const auto files = [](const std::vector<FileEntry>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return a;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  return j.dump(2) + "\n";
}

RunManifest cmd_coverage(const scenario::Scenario& s, const fs::path& out) {
  const auto dir = prepare(out);
  RunManifest m = start(s, "coverage");
  const World w = build_world(s);
  std::ostringstream cov, tx;
  terrain::write_coverage_csv(w.coverage, w.regions.regions, cov);
  terrain::write_transmitters_csv(w.transmitters, tx);
  emit(dir, "coverage.csv", cov.str(), m);
  emit(dir, "transmitters.csv", tx.str(), m);
  finish(dir, m);
  return m;
}

RunManifest cmd_simulate(const scenario::Scenario& s, const fs::path& out) {
  const auto dir = prepare(out);
  RunManifest m = start(s, "simulate");
  const World w = build_world(s);
  const auto panel = epidemic::simulate_panel(w.regions, s.timeline, s.epidemic, stream_seed(s, Stream::panel));
  const auto survey = epidemic::simulate_survey(w.regions, s.survey, stream_seed(s, Stream::survey));
  std::ostringstream p, q;
  epidemic::write_panel_csv(panel, p);
  epidemic::write_survey_csv(survey, q);
  emit(dir, "panel.csv", p.str(), m);
  emit(dir, "survey.csv", q.str(), m);
  finish(dir, m);
  return m;
}

RunManifest cmd_estimate(const scenario::Scenario& s, const fs::path& panel_csv, const fs::path& out) {
  s.validate();
  const auto dir = prepare(out);
  RunManifest m = start(s, "estimate");
  const Table data = read_panel(panel_csv, s);
  m.inputs.push_back(input_entry(panel_csv, dir));

  const auto spec = regression_spec(s.estimation);
  econ::EventStudyOptions eo;
  eo.bootstrap_reps = s.estimation.bootstrap_reps;
  eo.seed = stream_seed(s, Stream::bootstrap);
  eo.threads = s.run.threads;
  eo.level = s.estimation.confidence_level;
  const auto esr = econ::event_study(data, spec, eo);

  econ::RegressionSpec did_spec = spec;
  did_spec.event_time.clear();
  did_spec.post = "post_official";
  const auto did = econ::did(data, did_spec);
  const auto did_name = econ::post_coef_name(spec.treatments.front());
  const double z = econ::critical_value(s.estimation.confidence_level, static_cast<int>(did.clusters));

  ordered_json j;
  ordered_json coef = ordered_json::object();
  for (const auto& c : esr.path)
    coef[econ::event_coef_name(esr.treatment, c.tau)] = coefficient(c.beta, c.se, c.ci_low, c.ci_high);
  const double db = did.estimate(did_name), ds = did.std_error(did_name);
  coef[did_name] = coefficient(db, ds, db - z * ds, db + z * ds);
  j["coef"] = coef;
  j["n"] = did.n;
  j["n_clusters"] = did.clusters;
  ordered_json diag = ordered_json::object();
  diag["se_source"] = esr.se_source;
  diag["bootstrap_reps"] = esr.bootstrap_reps;
  diag["bootstrap_failures"] = esr.bootstrap_failures;
  diag["confidence_level"] = s.estimation.confidence_level;
  diag["ci_reference"] = esr.clusters >= 2 ? fmt::format("t({})", esr.clusters - 1) : "normal";
  diag["did_se_source"] = "analytic";
  int pre = 0;
  for (const auto& c : esr.path) pre += (!c.omitted && c.tau < 0) ? 1 : 0;
  if (pre >= 2) {
    const auto w = econ::pretrend_test(esr);
    diag["pretrend_statistic"] = number(w.statistic);
    diag["pretrend_df"] = w.df;
    diag["pretrend_df_denominator"] = w.df_denominator;
    diag["pretrend_p_value"] = number(w.p_value);
    diag["pretrend_p_value_chi2"] = number(w.p_value_chi2);
  }
  j["diagnostics"] = diag;
  j["event_study"] = path_json(esr);
  if (!s.estimation.split_column.empty()) {
    const auto [in, outside] = econ::event_study_heterogeneous(data, spec, s.estimation.split_column, eo);
    j["heterogeneous"] = {{"split_column", s.estimation.split_column},
                          {"split_1", path_json(in)},
                          {"split_0", path_json(outside)}};
  }

  std::string csv = "term,tau,estimate,se,ci_low,ci_high,omitted\n";
  for (const auto& c : esr.path)
    csv += fmt::format("{},{},{},{},{},{},{}\n", esr.treatment, c.tau, csv_number(c.beta), csv_number(c.se),
                       csv_number(c.ci_low), csv_number(c.ci_high), c.omitted ? 1 : 0);
  csv += fmt::format("{},NA,{},{},{},{},0\n", did_name, csv_number(db), csv_number(ds), csv_number(db - z * ds),
                     csv_number(db + z * ds));

  emit(dir, "results.json", j.dump(2) + "\n", m);
  emit(dir, "coefficients.csv", csv, m);
  finish(dir, m);
  return m;
}

RunManifest cmd_montecarlo(const scenario::Scenario& s, const fs::path& out) {
  const auto dir = prepare(out);
  RunManifest m = start(s, "montecarlo");
  const World w = build_world(s);
  montecarlo::Options o;
  o.reps = s.montecarlo.reps;
  o.bootstrap_reps = s.montecarlo.bootstrap_reps;
  o.null_effect = s.montecarlo.null_effect;
  o.seed = stream_seed(s, Stream::montecarlo);
  o.threads = s.run.threads;
  o.level = s.estimation.confidence_level;
  o.coverage_gap_pp = s.counterfactual.coverage_gap_pp;
  o.method = s.counterfactual.method;
  const auto sum = montecarlo::run(w.regions, s.timeline, s.epidemic, regression_spec(s.estimation), o);

  ordered_json j;
  j["reps"] = sum.reps;
  j["bootstrap_reps"] = o.bootstrap_reps;
  j["null_effect"] = o.null_effect;
  ordered_json per = ordered_json::array();
  for (const auto& t : sum.taus)
    per.push_back({{"tau", t.tau},
                   {"truth", number(t.truth)},
                   {"mean", number(t.mean)},
                   {"bias", number(t.bias)},
                   {"rmse", number(t.rmse)},
                   {"mean_se", number(t.mean_se)},
                   {"ci_coverage", number(t.coverage)},
                   {"within_2se_of_zero", number(t.within_2se)},
                   {"rejects_zero", number(t.rejects_zero)}});
  j["per_tau"] = per;
  j["pooled_ci_coverage"] = number(sum.pooled_coverage);
  j["pretrend_rejection_rate"] = number(sum.pretrend_rejection);
  j["pretrend_tests"] = sum.pretrend_tests;
  j["did"] = {{"truth", number(sum.did_truth)}, {"mean", number(sum.did_mean)}, {"rmse", number(sum.did_rmse)}};
  j["counterfactual"] = {{"share_mean", number(sum.counterfactual_share_mean)},
                         {"prevented_total_mean", number(sum.counterfactual_total_mean)}};
  j["zero_case_share"] = number(sum.zero_case_share);
  emit(dir, "montecarlo.json", j.dump(2) + "\n", m);
  finish(dir, m);
  return m;
}

econ::EventStudyResult read_event_study(const fs::path& results_json) {
  std::ifstream in(results_json);
  if (!in) throw ParameterError(kModule, "cannot open results " + results_json.string());
  ordered_json j;
  try {
    in >> j;
    const auto& es = j.at("event_study");
    econ::EventStudyResult r;
    r.treatment = es.at("treatment").get<std::string>();
    r.se_source = es.at("se_source").get<std::string>();
    r.clusters = j.at("n_clusters").get<int>();
    for (const auto& c : es.at("path")) {
      econ::EventCoefficient e;
      e.tau = c.at("tau").get<int>();
      e.beta = read_number(c.at("beta"));
      e.se = read_number(c.at("se"));
      e.ci_low = read_number(c.at("ci_low"));
      e.ci_high = read_number(c.at("ci_high"));
      e.omitted = c.at("omitted").get<bool>();
      r.path.push_back(e);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(kModule, "malformed results file " + results_json.string() + ": " + e.what());
  }
}

RunManifest cmd_counterfactual(const scenario::Scenario& s, const fs::path& results_json, const fs::path& panel_csv,
                               const fs::path& out) {
  s.validate();
  const auto dir = prepare(out);
  RunManifest m = start(s, "counterfactual");
  const auto esr = read_event_study(results_json);
  const Table data = read_panel(panel_csv, s);
  m.inputs.push_back(input_entry(results_json, dir));
  m.inputs.push_back(input_entry(panel_csv, dir));
  const auto cf = metrics::prevented_cases(esr, data, s.counterfactual.coverage_gap_pp, metrics::untreated_local(),
                                           s.counterfactual.method);
  ordered_json months = ordered_json::array();
  for (std::size_t i = 0; i < cf.event_times.size(); ++i)
    months.push_back({{"tau", cf.event_times[i]},
                      {"month", cf.event_times[i] + s.timeline.official_launch},
                      {"base_cases", number(cf.base_cases[i])},
                      {"prevented", number(cf.prevented_by_month[i])}});
  ordered_json j;
  j["method"] = s.counterfactual.method == metrics::CounterfactualMethod::linear ? "linear" : "exponential";
  j["coverage_gap_pp"] = s.counterfactual.coverage_gap_pp;
  j["prevented_by_month"] = months;
  j["prevented_total"] = number(cf.prevented_total);
  j["share"] = number(cf.share_of_total_epidemic);
  j["total_cases"] = number(cf.total_cases);
  j["diagnostics"] = {{"linear_total", number(cf.linear_total)},
                      {"exponential_total", number(cf.exponential_total)},
                      {"linear_minus_exponential", number(cf.linear_total - cf.exponential_total)}};
  emit(dir, "counterfactual.json", j.dump(2) + "\n", m);
  finish(dir, m);
  return m;
}

RunManifest cmd_fractionalization(const scenario::Scenario& s, const fs::path& out) {
  s.validate();
  const auto dir = prepare(out);
  RunManifest m = start(s, "fractionalization");
  terrain::ElevationGrid grid;
  if (s.terrain.grid_csv.empty()) {
    grid = terrain::synth_terrain(stream_seed(s, Stream::terrain), s.terrain.nx, s.terrain.ny, s.terrain.cell_size_m,
                                  s.terrain.ruggedness, s.terrain.height_scale_m);
  } else {
    std::ifstream in(s.resolve(s.terrain.grid_csv));
    grid = terrain::read_grid_csv(in);
  }
  const auto rs = epidemic::build_regions(stream_seed(s, Stream::regions), s.regions, grid);
  const auto rows = metrics::fractionalization_by_location(rs);
  const auto sum = metrics::summarize_fractionalization(rows);
  std::string csv = "level,id,population,fractionalization\n";
  for (const auto& r : rows)
    csv += fmt::format("{},{},{},{}\n", r.level, r.id, format_number(r.population), format_number(r.value));
  ordered_json j = {{"country", sum.country},
                    {"region_mean", sum.region},
                    {"prefecture_mean", sum.prefecture},
                    {"subprefecture_mean", sum.subprefecture}};
  emit(dir, "fractionalization.csv", csv, m);
  emit(dir, "fractionalization.json", j.dump(2) + "\n", m);
  finish(dir, m);
  return m;
}

}  // namespace coorad::pipeline
