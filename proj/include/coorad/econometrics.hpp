#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coorad/table.hpp"

namespace coorad::econ {

/// Roles of the columns in a linear panel regression.
struct RegressionSpec {
  std::string outcome;
  /// Treatment columns. With `event_time` set they are interacted with one
  /// dummy per event time except the omitted one; with `post` set they are
  /// interacted with that 0/1 column; otherwise they enter as they are.
  std::vector<std::string> treatments;
  std::string event_time;
  int omitted_event_time = -1;
  std::string post;
  /// Controls interacted the same way as the treatments.
  std::vector<std::string> interacted_controls;
  std::vector<std::string> controls;
  std::string unit;     // unit fixed effects; also the panel id for the lag
  std::string time;     // time fixed effects; also orders the lag
  std::string cluster;  // cluster-robust SEs when set
  bool lagged_outcome = false;

  /// Throws ParameterError on missing columns, a column used in two roles,
  /// an absent omitted category or fewer than two clusters.
  void validate(const Table& data) const;
};

/// Coefficient name of `column` interacted with event time `tau`.
std::string event_coef_name(const std::string& column, int tau);
std::string post_coef_name(const std::string& column);
std::string lag_name(const std::string& outcome);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::MatrixXd vcov;
  std::size_t n = 0;
  std::size_t clusters = 0;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;

  int index(const std::string& name) const;  // -1 if absent
  double estimate(const std::string& name) const;
  double std_error(const std::string& name) const;
  std::map<std::string, double> coefficients() const;
  std::map<std::string, double> std_errors() const;
};

/// Regression inputs after role expansion, before fixed-effect absorption.
struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::vector<int> unit;     // dense codes, empty without unit FE
  std::vector<int> time;     // dense codes, empty without time FE
  std::vector<int> cluster;  // dense codes, empty without clustering
  int n_units = 0;
  int n_times = 0;
  int n_clusters = 0;
  bool intercept = false;
};

Design build_design(const Table& data, const RegressionSpec& spec);

/// Alternating projections over up to two fixed-effect dimensions, applied
/// to every column of `m` until the largest change in a sweep is below `tol`.
/// Returns the number of sweeps. Throws ComputationError past `max_sweeps`.
int absorb_fixed_effects(Eigen::MatrixXd& m, const std::vector<int>& unit, int n_units,
                         const std::vector<int>& time, int n_times, double tol = 1e-10,
                         int max_sweeps = 10000);

/// Two-way fixed-effects OLS via the within transformation. SEs are
/// cluster-robust (CR1) when the spec names a cluster, classical otherwise.
/// Rank deficiency after absorption raises RankError naming the columns.
FitResult fe_ols(const Table& data, const RegressionSpec& spec);

/// Least squares on an already expanded design (absorbs its FE).
FitResult fit_design(Design design);

/// Single post-period interaction per treatment.
FitResult did(const Table& data, const RegressionSpec& spec);

struct EventCoefficient {
  int tau = 0;
  double beta = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool omitted = false;
};

struct EventStudyResult {
  std::string treatment;
  std::vector<EventCoefficient> path;  // ascending tau, omitted entry included
  /// Covariance of the non-omitted coefficients, in path order.
  Eigen::MatrixXd cov;
  bool has_cov = false;
  std::string se_source;  // "analytic" or "bootstrap"
  int clusters = 0;       // clusters behind the covariance; 0 without clustering
  double critical_value = 0.0;
  int bootstrap_reps = 0;
  int bootstrap_failures = 0;

  const EventCoefficient* at(int tau) const;
  std::vector<int> taus() const;
};

struct EventStudyOptions {
  int bootstrap_reps = 0;  // 0: analytic SEs
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double level = 0.95;
};

/// Two-sided CI multiplier: Student t with G - 1 degrees of freedom for
/// clustered covariances (G >= 2 clusters), standard normal otherwise.
double critical_value(double level, int clusters);

/// Event study for every treatment in the spec (spec.event_time required).
std::vector<EventStudyResult> event_study_all(const Table& data, const RegressionSpec& spec,
                                              const EventStudyOptions& options = {});
/// Path of the first treatment.
EventStudyResult event_study(const Table& data, const RegressionSpec& spec, const EventStudyOptions& options = {});

/// Treatment split by a binary, unit-invariant column: paths for split = 1
/// (first) and split = 0 (second), estimated jointly.
std::pair<EventStudyResult, EventStudyResult> event_study_heterogeneous(const Table& data, const RegressionSpec& spec,
                                                                        const std::string& split_column,
                                                                        const EventStudyOptions& options = {});

struct BootstrapResult {
  std::vector<std::string> names;
  Eigen::VectorXd se;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd draws;  // successful replications x coefficients
  int reps = 0;
  int failures = 0;

  std::map<std::string, double> se_map() const;
};

/// Cluster indices drawn with replacement for replication `rep`.
std::vector<int> draw_clusters(int n_clusters, std::uint64_t seed, int rep);

/// Pairs cluster bootstrap: resample whole clusters with replacement (same
/// number of clusters), rerun the estimator, SE = standard deviation of the
/// replicated coefficients. Resampled copies of a cluster get fresh ids in
/// the cluster column and in every column of `relabel`, so duplicated units
/// keep separate fixed effects. Fails if more than 5% of replications throw.
BootstrapResult cluster_bootstrap(const std::function<FitResult(const Table&)>& estimator, const Table& data,
                                  const std::string& cluster_dim, int reps, std::uint64_t seed,
                                  const std::vector<std::string>& relabel = {}, unsigned threads = 1);

/// Cluster bootstrap of a balanced two-way FE design from per-unit
/// sufficient statistics: resampling clusters only reweights units, so each
/// replication costs O(units * K^2) instead of a full refit. Requires unit and
/// time FE, a balanced panel, and units nested in clusters. Produces the same
/// draws as cluster_bootstrap() with unit and cluster relabeling.
class BalancedBootstrap {
 public:
  explicit BalancedBootstrap(const Design& design);
  static bool applicable(const Design& design);
  /// Coefficients for the given unit multiplicities.
  Eigen::VectorXd fit(const std::vector<double>& unit_weights) const;
  BootstrapResult run(int reps, std::uint64_t seed, unsigned threads = 1) const;

 private:
  int units_ = 0, periods_ = 0, k_ = 0, clusters_ = 0;
  std::vector<std::string> names_;
  std::vector<int> unit_cluster_;
  std::vector<Eigen::MatrixXd> cross_;  // per unit: sum_t z z' of unit-demeaned [X y]
  std::vector<Eigen::MatrixXd> blocks_; // per unit: periods x (K+1) unit-demeaned [X y]
};

struct WaldTest {
  double statistic = 0.0;
  int df = 0;               // restrictions q
  int df_denominator = 0;   // G - q for the clustered reference, 0 for chi-squared
  double p_value = 1.0;
  double p_value_chi2 = 1.0;
};

/// Joint test that the pre-period coefficients in `pre_window` (all
/// estimated tau < 0 when empty) are equal, using the result's covariance.
/// With G clustered groups, W (G - q) / ((G - 1) q) is referred to
/// F(q, G - q), which accounts for a covariance estimated from G cluster
/// scores; without clustering (or G <= q) the reference is chi-squared(q).
WaldTest pretrend_test(const EventStudyResult& esr, const std::vector<int>& pre_window = {});

struct IvSpec {
  std::string outcome;
  std::vector<std::string> endogenous;
  std::vector<std::string> instruments;
  std::vector<std::string> exogenous;
  std::string absorb;   // optional fixed-effect dimension
  std::string cluster;  // cluster-robust SEs when set
};

/// Two-stage least squares. Reports the first-stage F of the excluded
/// instruments per endogenous regressor ("first_stage_F:<name>") and warns
/// when it is below 10.
FitResult two_sls(const Table& data, const IvSpec& spec);

struct PeerBinSpec {
  std::string outcome;
  std::string peer_share;            // leave-one-out share column
  std::vector<std::string> controls;
  std::string absorb;
  std::string cluster;
  std::vector<double> cutpoints = {0.5, 0.7};  // bins [0, .5), [.5, .7], (.7, 1]
};

/// One peer-share slope per bin; empty bins are dropped with a warning.
FitResult binned_peer_effects(const Table& data, const PeerBinSpec& spec);
std::vector<std::string> peer_bin_names(const PeerBinSpec& spec);

}  // namespace coorad::econ
