#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "coorad/epidemic.hpp"
#include "coorad/metrics.hpp"
#include "coorad/terrain.hpp"

namespace coorad::scenario {

struct RunSettings {
  std::uint64_t seed = 20140301;
  std::string out = "out";
  unsigned threads = 1;
};

struct TerrainSettings {
  int nx = 150;
  int ny = 120;
  double cell_size_m = 3000.0;
  double ruggedness = 2.0;
  double height_scale_m = 150.0;
  std::string grid_csv;  // empty: synthetic terrain
};

struct TransmitterSettings {
  std::string csv;  // empty: synthetic roster
  epidemic::RosterParams roster;
};

struct EstimationSettings {
  std::string outcome = "log_outcome";
  std::string treatment = "cov_local";
  std::vector<std::string> interacted_controls = {"cov_comm", "dist_epicenter_km"};
  std::vector<std::string> controls;
  std::string unit = "subpref_id";
  std::string time = "month";
  std::string cluster = "pref_id";
  int omitted_event_time = -1;
  bool lagged_outcome = false;
  int bootstrap_reps = 999;
  double confidence_level = 0.95;
  std::string split_column;  // optional heterogeneity split, e.g. lang_match
};

struct MonteCarloSettings {
  int reps = 200;
  int bootstrap_reps = 199;
  bool null_effect = false;
};

struct CounterfactualSettings {
  double coverage_gap_pp = 62.0;
  metrics::CounterfactualMethod method = metrics::CounterfactualMethod::linear;
};

struct Scenario {
  RunSettings run;
  TerrainSettings terrain;
  terrain::PropagationParams propagation;
  TransmitterSettings transmitters;
  epidemic::RegionParams regions;
  epidemic::CampaignTimeline timeline;
  epidemic::EpidemicConfig epidemic;
  epidemic::SurveyConfig survey;
  EstimationSettings estimation;
  MonteCarloSettings montecarlo;
  CounterfactualSettings counterfactual;
  /// Directory that relative file paths are resolved against.
  std::filesystem::path base_dir = ".";

  /// Validates every section; throws ParameterError.
  void validate() const;
  std::filesystem::path resolve(const std::string& path) const;
};

Scenario default_scenario();

/// Parses sectioned key = value text. Unknown sections or keys, malformed
/// values and missing referenced files are ParameterErrors.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Every setting in a fixed order, one `key = value` per line under its
/// section, with a short comment per key.
std::string canonical_text(const Scenario& s);

/// SHA-256 of the canonical text without the settings that do not affect
/// results (output directory, thread count).
std::string scenario_hash(const Scenario& s);

}  // namespace coorad::scenario
