#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coorad/econometrics.hpp"
#include "coorad/epidemic.hpp"
#include "coorad/scenario.hpp"

namespace coorad::pipeline {

/// Independent random streams derived from the scenario seed.
enum class Stream : std::uint64_t { terrain = 1, regions, roster, panel, survey, bootstrap, montecarlo };
std::uint64_t stream_seed(const scenario::Scenario& s, Stream stream);

/// Terrain, regions, roster and coverage; fixed for a scenario and seed.
struct World {
  terrain::ElevationGrid grid;
  epidemic::RegionSystem regions;
  std::vector<terrain::Transmitter> transmitters;
  std::vector<terrain::CoverageShares> coverage;
};
World build_world(const scenario::Scenario& s);

econ::RegressionSpec regression_spec(const scenario::EstimationSettings& e);

struct FileEntry {
  std::string path;  // relative to the output directory when inside it, otherwise as given
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> module_versions;
  std::vector<FileEntry> inputs;
  std::vector<FileEntry> outputs;

  /// Pretty-printed JSON with a fixed key order; no timestamps.
  std::string to_json() const;
};

/// Every command writes its artifacts and `manifest_<command>.json` into
/// `out` and returns the manifest.
RunManifest cmd_coverage(const scenario::Scenario& s, const std::filesystem::path& out);
RunManifest cmd_simulate(const scenario::Scenario& s, const std::filesystem::path& out);
RunManifest cmd_estimate(const scenario::Scenario& s, const std::filesystem::path& panel_csv,
                         const std::filesystem::path& out);
RunManifest cmd_montecarlo(const scenario::Scenario& s, const std::filesystem::path& out);
RunManifest cmd_counterfactual(const scenario::Scenario& s, const std::filesystem::path& results_json,
                               const std::filesystem::path& panel_csv, const std::filesystem::path& out);
RunManifest cmd_fractionalization(const scenario::Scenario& s, const std::filesystem::path& out);

/// Event-study path stored in a results JSON written by cmd_estimate.
econ::EventStudyResult read_event_study(const std::filesystem::path& results_json);

}  // namespace coorad::pipeline
