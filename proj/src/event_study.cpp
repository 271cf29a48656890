#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "coorad/econometrics.hpp"
#include "coorad/error.hpp"

namespace coorad::econ {

namespace {
constexpr const char* kModule = "panel-econometrics";

std::vector<int> sorted_taus(const Table& data, const std::string& column) {
  std::set<int> taus;
  for (double v : data.col(column)) taus.insert(static_cast<int>(std::lround(v)));
  return {taus.begin(), taus.end()};
}

EventStudyResult extract_path(const std::string& treatment, const std::vector<int>& taus, int omitted,
                              const std::vector<std::string>& names, const Eigen::VectorXd& coef,
                              const Eigen::MatrixXd& cov, double z) {
  EventStudyResult r;
  r.treatment = treatment;
  std::vector<Eigen::Index> idx;
  for (int tau : taus) {
    EventCoefficient c;
    c.tau = tau;
    if (tau == omitted) {
      c.omitted = true;
    } else {
      const auto name = event_coef_name(treatment, tau);
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ComputationError(kModule, "missing coefficient " + name);
      const auto i = static_cast<Eigen::Index>(it - names.begin());
      idx.push_back(i);
      c.beta = coef(i);
      c.se = std::sqrt(std::max(0.0, cov(i, i)));
      c.ci_low = c.beta - z * c.se;
      c.ci_high = c.beta + z * c.se;
    }
    r.path.push_back(c);
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  r.cov.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) r.cov(a, b) = cov(idx[a], idx[b]);
  r.has_cov = true;
  return r;
}
}  // namespace

const EventCoefficient* EventStudyResult::at(int tau) const {
  for (const auto& c : path)
    if (c.tau == tau) return &c;
  return nullptr;
}

std::vector<int> EventStudyResult::taus() const {
  std::vector<int> t;
  for (const auto& c : path) t.push_back(c.tau);
  return t;
}

double critical_value(double level, int clusters) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError(kModule, "confidence level must be in (0, 1)");
  const double p = 0.5 + level / 2.0;
  if (clusters >= 2) return boost::math::quantile(boost::math::students_t(clusters - 1), p);
  return boost::math::quantile(boost::math::normal(), p);
}

std::vector<EventStudyResult> event_study_all(const Table& data, const RegressionSpec& spec,
                                              const EventStudyOptions& options) {
  if (spec.event_time.empty()) throw ParameterError(kModule, "event study needs an event-time column");
  if (spec.treatments.empty()) throw ParameterError(kModule, "event study needs a treatment column");
  Design design = build_design(data, spec);
  const double z = critical_value(options.level, design.n_clusters);
  const FitResult fit = fit_design(design);

  Eigen::MatrixXd cov = fit.vcov;
  std::string source = "analytic";
  int failures = 0;
  if (options.bootstrap_reps > 0) {
    if (spec.cluster.empty()) throw ParameterError(kModule, "bootstrap SEs need a cluster column");
    BootstrapResult boot;
    if (BalancedBootstrap::applicable(design)) {
      boot = BalancedBootstrap(design).run(options.bootstrap_reps, options.seed, options.threads);
    } else {
      std::vector<std::string> relabel;
      if (!spec.unit.empty() && spec.unit != spec.cluster) relabel.push_back(spec.unit);
      boot = cluster_bootstrap([&spec](const Table& t) { return fe_ols(t, spec); }, data, spec.cluster,
                               options.bootstrap_reps, options.seed, relabel, options.threads);
    }
    cov = boot.cov;
    failures = boot.failures;
    source = "bootstrap";
  }

  // lagged designs drop rows, so take the event times from the rows used
  const auto taus = sorted_taus(data, spec.event_time);
  std::vector<EventStudyResult> out;
  for (const auto& t : spec.treatments) {
    auto r = extract_path(t, taus, spec.omitted_event_time, fit.names, fit.coef, cov, z);
    r.se_source = source;
    r.clusters = design.n_clusters;
    r.critical_value = z;
    r.bootstrap_reps = options.bootstrap_reps;
    r.bootstrap_failures = failures;
    out.push_back(std::move(r));
  }
  return out;
}

EventStudyResult event_study(const Table& data, const RegressionSpec& spec, const EventStudyOptions& options) {
  return event_study_all(data, spec, options).front();
}

std::pair<EventStudyResult, EventStudyResult> event_study_heterogeneous(const Table& data, const RegressionSpec& spec,
                                                                        const std::string& split_column,
                                                                        const EventStudyOptions& options) {
  if (spec.treatments.empty()) throw ParameterError(kModule, "event study needs a treatment column");
  if (!data.has(split_column)) throw ParameterError(kModule, "missing column '" + split_column + "'");
  const auto& split = data.col(split_column);
  std::size_t ones = 0, zeros = 0;
  for (double v : split) {
    if (v == 1.0) ++ones;
    else if (v == 0.0) ++zeros;
    else throw ParameterError(kModule, "split column '" + split_column + "' must be 0/1");
  }
  if (ones == 0 || zeros == 0) throw ParameterError(kModule, "one cell of split column '" + split_column + "' is empty");
  if (!spec.unit.empty()) {
    const auto& u = data.col(spec.unit);
    std::map<double, double> first;
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto [it, fresh] = first.emplace(u[i], split[i]);
      if (!fresh && it->second != split[i])
        throw ParameterError(kModule, "split column '" + split_column + "' varies within a unit");
    }
  }

  const std::string treated = spec.treatments.front();
  const std::string in_name = treated + "|" + split_column + "=1";
  const std::string out_name = treated + "|" + split_column + "=0";
  Table t = data;
  const auto& base = data.col(treated);
  std::vector<double> a(base.size()), b(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    a[i] = base[i] * split[i];
    b[i] = base[i] * (1.0 - split[i]);
  }
  t.set(in_name, std::move(a));
  t.set(out_name, std::move(b));
  RegressionSpec s = spec;
  s.treatments = {in_name, out_name};
  auto paths = event_study_all(t, s, options);
  return {std::move(paths[0]), std::move(paths[1])};
}

WaldTest pretrend_test(const EventStudyResult& esr, const std::vector<int>& pre_window) {
  if (!esr.has_cov) throw ParameterError(kModule, "pre-trend test needs a coefficient covariance");
  std::vector<Eigen::Index> pos;  // positions in esr.cov
  std::vector<double> beta;
  Eigen::Index k = 0;
  for (const auto& c : esr.path) {
    if (c.omitted) continue;
    const bool use = pre_window.empty() ? c.tau < 0
                                        : std::find(pre_window.begin(), pre_window.end(), c.tau) != pre_window.end();
    if (use) {
      pos.push_back(k);
      beta.push_back(c.beta);
    }
    ++k;
  }
  const auto m = static_cast<Eigen::Index>(pos.size());
  if (m < 2) throw ParameterError(kModule, fmt::format("pre-trend test needs at least 2 pre-period coefficients, got {}", m));
  // successive differences: all equal <=> all differences zero
  Eigen::VectorXd d(m - 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m - 1, esr.cov.rows());
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    d(i) = beta[i] - beta[i + 1];
    D(i, pos[i]) = 1.0;
    D(i, pos[i + 1]) = -1.0;
  }
  const Eigen::MatrixXd V = D * esr.cov * D.transpose();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V);
  WaldTest w;
  w.statistic = d.dot(cod.solve(d));
  w.df = static_cast<int>(m - 1);
  if (!(w.statistic > 0.0)) return w;
  w.p_value_chi2 = boost::math::cdf(boost::math::complement(boost::math::chi_squared(w.df), w.statistic));
  w.p_value = w.p_value_chi2;
  const int g = esr.clusters;
  if (g - w.df >= 1) {
    w.df_denominator = g - w.df;
    const double f = w.statistic * w.df_denominator / (static_cast<double>(g - 1) * w.df);
    w.p_value = boost::math::cdf(boost::math::complement(boost::math::fisher_f(w.df, w.df_denominator), f));
  }
  return w;
}

}  // namespace coorad::econ
