#include "coorad/montecarlo.hpp"

#include <cmath>

#include <fmt/format.h>

#include "coorad/error.hpp"
#include "coorad/parallel.hpp"
#include "coorad/rng.hpp"

namespace coorad::montecarlo {

namespace {
constexpr const char* kModule = "cli-pipeline";

struct RepOutput {
  std::vector<double> beta, se, ci_low, ci_high;
  double pretrend_p = std::nan("");
  double did = 0.0;
  double cf_share = 0.0;
  double cf_total = 0.0;
  double zero_share = 0.0;
};
}  // namespace

const TauStats* Summary::at(int tau) const {
  for (const auto& t : taus)
    if (t.tau == tau) return &t;
  return nullptr;
}

double event_truth(const epidemic::EpidemicConfig& config, int tau) {
  if (tau < 0) return 0.0;
  double delta = 0.0;
  for (int j = 0; j <= tau; ++j) delta = config.rho * delta + config.innovation(j);
  return delta;
}

double did_truth(const epidemic::EpidemicConfig& config, const epidemic::CampaignTimeline& timeline) {
  const int post = timeline.horizon - timeline.official_launch;
  double sum = 0.0;
  for (int tau = 0; tau < post; ++tau) sum += event_truth(config, tau);
  return post > 0 ? sum / post : 0.0;
}

Table with_event_time(Table panel, const epidemic::CampaignTimeline& timeline) {
  auto et = panel.col("month");
  for (double& m : et) m -= timeline.official_launch;
  panel.set("event_time", std::move(et));
  return panel;
}

Summary run(const epidemic::RegionSystem& world, const epidemic::CampaignTimeline& timeline,
            const epidemic::EpidemicConfig& config, const econ::RegressionSpec& spec, const Options& options) {
  if (options.reps < 1) throw ParameterError(kModule, fmt::format("Monte Carlo needs at least 1 rep, got {}", options.reps));
  if (spec.event_time != "event_time") throw ParameterError(kModule, "Monte Carlo spec must use the event_time column");
  epidemic::EpidemicConfig cfg = config;
  if (options.null_effect) cfg.beta1_path.assign(cfg.beta1_path.size(), 0.0);

  econ::RegressionSpec did_spec = spec;
  did_spec.event_time.clear();
  did_spec.post = "post_official";

  std::vector<int> taus;  // estimated event times
  for (int t = -timeline.official_launch; t < timeline.horizon - timeline.official_launch; ++t)
    if (t != spec.omitted_event_time) taus.push_back(t);

  std::vector<RepOutput> out(static_cast<std::size_t>(options.reps));
  parallel_for(out.size(), options.threads, [&](std::size_t r) {
    const auto panel = epidemic::simulate_panel(world, timeline, cfg, derive_seed(options.seed, 2 * r));
    const Table data = with_event_time(epidemic::panel_table(panel), timeline);
    econ::EventStudyOptions eo;
    eo.bootstrap_reps = options.bootstrap_reps;
    eo.seed = derive_seed(options.seed, 2 * r + 1);
    eo.level = options.level;
    const auto esr = econ::event_study(data, spec, eo);
    RepOutput& o = out[r];
    for (int t : taus) {
      const auto* c = esr.at(t);
      if (!c) throw ComputationError(kModule, fmt::format("event time {} missing from the estimates", t));
      o.beta.push_back(c->beta);
      o.se.push_back(c->se);
      o.ci_low.push_back(c->ci_low);
      o.ci_high.push_back(c->ci_high);
    }
    int pre = 0;
    for (int t : taus) pre += t < 0 ? 1 : 0;
    if (pre >= 2) o.pretrend_p = econ::pretrend_test(esr).p_value;
    o.did = econ::did(data, did_spec).estimate(econ::post_coef_name(spec.treatments.front()));
    const auto cf = metrics::prevented_cases(esr, data, options.coverage_gap_pp, metrics::untreated_local(), options.method);
    o.cf_share = cf.share_of_total_epidemic;
    o.cf_total = cf.prevented_total;
    std::size_t zeros = 0;
    for (const auto& row : panel.rows) zeros += row.cases == 0.0 ? 1 : 0;
    o.zero_share = static_cast<double>(zeros) / static_cast<double>(panel.rows.size());
  });

  Summary s;
  s.reps = options.reps;
  const auto R = static_cast<Eigen::Index>(options.reps);
  const auto K = static_cast<Eigen::Index>(taus.size());
  s.estimates.resize(R, K);
  s.std_errors.resize(R, K);
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index k = 0; k < K; ++k) {
      s.estimates(r, k) = out[r].beta[k];
      s.std_errors(r, k) = out[r].se[k];
    }
  double covered_all = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    TauStats t;
    t.tau = taus[k];
    t.truth = event_truth(cfg, t.tau);
    double sq = 0.0, cov = 0.0, in2 = 0.0, rej = 0.0, se = 0.0, mean = 0.0;
    for (Eigen::Index r = 0; r < R; ++r) {
      const double b = s.estimates(r, k), e = s.std_errors(r, k);
      const double lo = out[r].ci_low[k], hi = out[r].ci_high[k];
      mean += b;
      se += e;
      sq += (b - t.truth) * (b - t.truth);
      cov += lo <= t.truth && t.truth <= hi ? 1.0 : 0.0;
      in2 += std::abs(b) <= 2.0 * e ? 1.0 : 0.0;
      rej += lo > 0.0 || hi < 0.0 ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(R);
    t.mean = mean / n;
    t.bias = t.mean - t.truth;
    t.rmse = std::sqrt(sq / n);
    t.mean_se = se / n;
    t.coverage = cov / n;
    t.within_2se = in2 / n;
    t.rejects_zero = rej / n;
    covered_all += cov;
    s.taus.push_back(t);
  }
  s.pooled_coverage = K > 0 ? covered_all / static_cast<double>(R * K) : 0.0;
  s.did_truth = did_truth(cfg, timeline);
  double rejected = 0.0, did_sq = 0.0;
  for (const auto& o : out) {
    if (!std::isnan(o.pretrend_p)) {
      ++s.pretrend_tests;
      rejected += o.pretrend_p < 0.05 ? 1.0 : 0.0;
      s.pretrend_p.push_back(o.pretrend_p);
    }
    s.did_mean += o.did / R;
    did_sq += (o.did - s.did_truth) * (o.did - s.did_truth);
    s.counterfactual_share_mean += o.cf_share / R;
    s.counterfactual_total_mean += o.cf_total / R;
    s.zero_case_share += o.zero_share / R;
  }
  s.did_rmse = std::sqrt(did_sq / R);
  s.pretrend_rejection = s.pretrend_tests > 0 ? rejected / s.pretrend_tests : 0.0;
  return s;
}

}  // namespace coorad::montecarlo
