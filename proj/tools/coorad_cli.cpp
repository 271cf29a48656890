#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "coorad/error.hpp"
#include "coorad/pipeline.hpp"
#include "coorad/scenario.hpp"

namespace fs = std::filesystem;

namespace {

void report(const char* kind, const std::string& module, const std::string& message,
            const std::vector<std::string>& columns = {}) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"module", module}, {"message", message}};
  if (!columns.empty()) j["error"]["columns"] = columns;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community radio, coordination and epidemic spread: simulation and estimation pipeline"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> reps;
  std::optional<unsigned> threads;
  std::string panel_path;
  std::string results_path;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "scenario file (defaults when omitted)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override run.seed");
    cmd->add_option("--out", out, "override run.out");
    cmd->add_option("--threads", threads, "override run.threads")->check(CLI::PositiveNumber);
  };
  auto* coverage = app.add_subcommand("coverage", "coverage shares per sub-prefecture");
  auto* simulate = app.add_subcommand("simulate", "synthetic panel and survey");
  auto* estimate = app.add_subcommand("estimate", "event study, DiD and pre-trend test on a panel");
  auto* montecarlo = app.add_subcommand("montecarlo", "repeated simulation and estimation against the truth");
  auto* counterfactual = app.add_subcommand("counterfactual", "prevented cases implied by estimated effects");
  auto* fractional = app.add_subcommand("fractionalization", "language fractionalization by location");
  auto* defaults = app.add_subcommand("print-defaults", "print every setting with its default");
  for (auto* c : {coverage, simulate, estimate, montecarlo, counterfactual, fractional}) common(c);
  estimate->add_option("--reps", reps, "override estimation.bootstrap_reps");
  montecarlo->add_option("--reps", reps, "override montecarlo.reps");
  estimate->add_option("--panel", panel_path, "panel CSV (default: <out>/panel.csv)");
  counterfactual->add_option("--panel", panel_path, "panel CSV (default: <out>/panel.csv)");
  counterfactual->add_option("--results", results_path, "results JSON (default: <out>/results.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report("parameter", "cli-pipeline", e.what());
    return 2;
  }

  try {
    if (defaults->parsed()) {
      std::cout << coorad::scenario::canonical_text(coorad::scenario::default_scenario());
      return 0;
    }
    auto s = scenario_path.empty() ? coorad::scenario::default_scenario() : coorad::scenario::load_scenario(scenario_path);
    if (seed) s.run.seed = *seed;
    if (out) s.run.out = *out;
    if (threads) s.run.threads = *threads;
    if (reps && estimate->parsed()) s.estimation.bootstrap_reps = *reps;
    if (reps && montecarlo->parsed()) s.montecarlo.reps = *reps;
    s.validate();
    const fs::path dir = s.run.out;
    const fs::path panel = panel_path.empty() ? dir / "panel.csv" : fs::path(panel_path);
    const fs::path results = results_path.empty() ? dir / "results.json" : fs::path(results_path);

    coorad::pipeline::RunManifest m;
    if (coverage->parsed()) m = coorad::pipeline::cmd_coverage(s, dir);
    else if (simulate->parsed()) m = coorad::pipeline::cmd_simulate(s, dir);
    else if (estimate->parsed()) m = coorad::pipeline::cmd_estimate(s, panel, dir);
    else if (montecarlo->parsed()) m = coorad::pipeline::cmd_montecarlo(s, dir);
    else if (counterfactual->parsed()) m = coorad::pipeline::cmd_counterfactual(s, results, panel, dir);
    else if (fractional->parsed()) m = coorad::pipeline::cmd_fractionalization(s, dir);
    for (const auto& f : m.outputs) std::cout << (dir / f.path).string() << '\n';
    std::cout << (dir / ("manifest_" + m.command + ".json")).string() << '\n';
    return 0;
  } catch (const coorad::RankError& e) {
    report("computation", e.module(), e.what(), e.columns());
    return 3;
  } catch (const coorad::ParameterError& e) {
    report("parameter", e.module(), e.what());
    return 2;
  } catch (const coorad::ComputationError& e) {
    report("computation", e.module(), e.what());
    return 3;
  } catch (const std::exception& e) {
    report("computation", "cli-pipeline", e.what());
    return 3;
  }
}
