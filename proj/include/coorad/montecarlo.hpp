#pragma once

#include <cstdint>
#include <vector>

#include "coorad/econometrics.hpp"
#include "coorad/epidemic.hpp"
#include "coorad/metrics.hpp"

namespace coorad::montecarlo {

struct Options {
  int reps = 200;
  int bootstrap_reps = 199;  // 0: analytic cluster-robust SEs
  bool null_effect = false;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double level = 0.95;
  double coverage_gap_pp = 62.0;
  metrics::CounterfactualMethod method = metrics::CounterfactualMethod::linear;
};

struct TauStats {
  int tau = 0;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;       // CI contains the truth
  double within_2se = 0.0;     // |estimate| <= 2 SE
  double rejects_zero = 0.0;   // CI excludes 0
};

struct Summary {
  int reps = 0;
  std::vector<TauStats> taus;      // omitted event time excluded
  double pooled_coverage = 0.0;    // over every estimated tau and rep
  double pretrend_rejection = 0.0; // share of reps with p < 0.05
  int pretrend_tests = 0;
  double did_truth = 0.0;
  double did_mean = 0.0;
  double did_rmse = 0.0;
  double counterfactual_share_mean = 0.0;
  double counterfactual_total_mean = 0.0;
  double zero_case_share = 0.0;    // share of panel cells with zero cases
  Eigen::MatrixXd estimates;       // reps x taus
  Eigen::MatrixXd std_errors;      // reps x taus
  std::vector<double> pretrend_p;

  const TauStats* at(int tau) const;
};

/// Event-time effect on the log outcome per unit coverage share implied by
/// the configured path (innovations accumulate through rho).
double event_truth(const epidemic::EpidemicConfig& config, int tau);

/// Mean post-launch truth over the panel's post months.
double did_truth(const epidemic::EpidemicConfig& config, const epidemic::CampaignTimeline& timeline);

/// Adds event_time = month - official launch.
Table with_event_time(Table panel, const epidemic::CampaignTimeline& timeline);

/// Redraws the panel `reps` times on a fixed world (terrain, regions and
/// coverage held fixed), estimates the event study, a DiD, the pre-trend test
/// and the counterfactual, and summarizes against the injected truth. The
/// spec's event_time column must be "event_time". Reps run in parallel, each
/// from seeds derived from `seed` and its index.
Summary run(const epidemic::RegionSystem& world, const epidemic::CampaignTimeline& timeline,
            const epidemic::EpidemicConfig& config, const econ::RegressionSpec& spec, const Options& options);

}  // namespace coorad::montecarlo
