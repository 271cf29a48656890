#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "coorad/econometrics.hpp"
#include "coorad/error.hpp"

namespace coorad::econ {

namespace {
constexpr const char* kModule = "panel-econometrics";

std::vector<int> dense_codes(const std::vector<double>& values, int& n_levels) {
  std::map<double, int> levels;
  for (double v : values) levels.emplace(v, 0);
  int next = 0;
  for (auto& [value, code] : levels) code = next++;
  n_levels = next;
  std::vector<int> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) codes[i] = levels[values[i]];
  return codes;
}

std::vector<int> event_times(const std::vector<double>& column) {
  std::set<int> taus;
  for (double v : column) taus.insert(static_cast<int>(std::lround(v)));
  return {taus.begin(), taus.end()};
}
}  // namespace

std::string event_coef_name(const std::string& column, int tau) { return fmt::format("{}:tau={}", column, tau); }
std::string post_coef_name(const std::string& column) { return column + ":post"; }
std::string lag_name(const std::string& outcome) { return "lag_" + outcome; }

void RegressionSpec::validate(const Table& data) const {
  if (outcome.empty()) throw ParameterError(kModule, "regression needs an outcome column");
  std::vector<std::string> roles{outcome};
  roles.insert(roles.end(), treatments.begin(), treatments.end());
  roles.insert(roles.end(), interacted_controls.begin(), interacted_controls.end());
  roles.insert(roles.end(), controls.begin(), controls.end());
  if (!event_time.empty()) roles.push_back(event_time);
  if (!post.empty()) roles.push_back(post);
  std::set<std::string> seen;
  for (const auto& r : roles) {
    if (!data.has(r)) throw ParameterError(kModule, "missing column '" + r + "'");
    if (!seen.insert(r).second) throw ParameterError(kModule, "column '" + r + "' is used in two roles");
  }
  for (const auto& c : {unit, time, cluster})
    if (!c.empty() && !data.has(c)) throw ParameterError(kModule, "missing column '" + c + "'");
  if (!event_time.empty() && !post.empty())
    throw ParameterError(kModule, "event_time and post interactions are mutually exclusive");
  if (!event_time.empty()) {
    const auto taus = event_times(data.col(event_time));
    if (std::find(taus.begin(), taus.end(), omitted_event_time) == taus.end())
      throw ParameterError(kModule, fmt::format("omitted event time {} does not occur in the data", omitted_event_time));
  }
  if (lagged_outcome && (unit.empty() || time.empty()))
    throw ParameterError(kModule, "a lagged outcome needs unit and time columns");
  if (!cluster.empty()) {
    int g = 0;
    dense_codes(data.col(cluster), g);
    if (g < 2) throw ParameterError(kModule, fmt::format("clustering on '{}' needs at least 2 clusters, found {}", cluster, g));
  }
}

Design build_design(const Table& data, const RegressionSpec& spec) {
  spec.validate(data);
  const std::size_t n_all = data.rows();

  // rows kept and, with a lag, the row holding each row's previous period
  std::vector<std::size_t> rows;
  std::vector<std::size_t> lag_row;
  if (spec.lagged_outcome) {
    int nt = 0;
    const auto tcode = dense_codes(data.col(spec.time), nt);
    std::map<std::pair<double, int>, std::size_t> where;
    const auto& u = data.col(spec.unit);
    for (std::size_t i = 0; i < n_all; ++i) where[{u[i], tcode[i]}] = i;
    for (std::size_t i = 0; i < n_all; ++i) {
      auto it = where.find({u[i], tcode[i] - 1});
      if (it == where.end()) continue;
      rows.push_back(i);
      lag_row.push_back(it->second);
    }
  } else {
    rows.resize(n_all);
    for (std::size_t i = 0; i < n_all; ++i) rows[i] = i;
  }
  const std::size_t n = rows.size();
  if (n == 0) throw ParameterError(kModule, "no usable observations");

  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  auto gather = [&](const std::vector<double>& src) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = src[rows[i]];
    return v;
  };

  std::vector<std::string> interacted = spec.treatments;
  interacted.insert(interacted.end(), spec.interacted_controls.begin(), spec.interacted_controls.end());
  if (!spec.event_time.empty()) {
    const auto et = gather(data.col(spec.event_time));
    const auto taus = event_times(et);
    for (const auto& c : interacted) {
      const auto base = gather(data.col(c));
      for (int tau : taus) {
        if (tau == spec.omitted_event_time) continue;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::lround(et[i]) == tau ? base[i] : 0.0;
        names.push_back(event_coef_name(c, tau));
        cols.push_back(std::move(v));
      }
    }
  } else if (!spec.post.empty()) {
    const auto post = gather(data.col(spec.post));
    for (const auto& c : interacted) {
      auto v = gather(data.col(c));
      for (std::size_t i = 0; i < n; ++i) v[i] *= post[i];
      names.push_back(post_coef_name(c));
      cols.push_back(std::move(v));
    }
  } else {
    for (const auto& c : interacted) {
      names.push_back(c);
      cols.push_back(gather(data.col(c)));
    }
  }
  for (const auto& c : spec.controls) {
    names.push_back(c);
    cols.push_back(gather(data.col(c)));
  }
  if (spec.lagged_outcome) {
    const auto& y = data.col(spec.outcome);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[lag_row[i]];
    names.push_back(lag_name(spec.outcome));
    cols.push_back(std::move(v));
  }

  Design d;
  d.intercept = spec.unit.empty() && spec.time.empty();
  const std::size_t k = cols.size() + (d.intercept ? 1 : 0);
  if (k == 0) throw ParameterError(kModule, "regression has no regressors");
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::Index j = 0;
  if (d.intercept) {
    d.X.col(j++).setOnes();
    d.names.push_back("const");
  }
  for (std::size_t c = 0; c < cols.size(); ++c, ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(cols[c][i])) throw ParameterError(kModule, "non-finite value in column for '" + names[c] + "'");
      d.X(static_cast<Eigen::Index>(i), j) = cols[c][i];
    }
    d.names.push_back(names[c]);
  }
  d.y = Eigen::Map<const Eigen::VectorXd>(gather(data.col(spec.outcome)).data(), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.y.size(); ++i)
    if (!std::isfinite(d.y(i))) throw ParameterError(kModule, "non-finite outcome value");
  if (!spec.unit.empty()) d.unit = dense_codes(gather(data.col(spec.unit)), d.n_units);
  if (!spec.time.empty()) d.time = dense_codes(gather(data.col(spec.time)), d.n_times);
  if (!spec.cluster.empty()) d.cluster = dense_codes(gather(data.col(spec.cluster)), d.n_clusters);
  return d;
}

int absorb_fixed_effects(Eigen::MatrixXd& m, const std::vector<int>& unit, int n_units, const std::vector<int>& time,
                         int n_times, double tol, int max_sweeps) {
  const Eigen::Index n = m.rows();
  std::vector<const std::vector<int>*> dims;
  std::vector<int> levels;
  if (!unit.empty()) {
    dims.push_back(&unit);
    levels.push_back(n_units);
  }
  if (!time.empty()) {
    dims.push_back(&time);
    levels.push_back(n_times);
  }
  if (dims.empty()) return 0;

  std::vector<std::vector<double>> counts;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    counts.emplace_back(levels[d], 0.0);
    for (Eigen::Index i = 0; i < n; ++i) counts[d][(*dims[d])[i]] += 1.0;
  }
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const auto& code = *dims[d];
      Eigen::MatrixXd means = Eigen::MatrixXd::Zero(levels[d], m.cols());
      for (Eigen::Index i = 0; i < n; ++i) means.row(code[i]) += m.row(i);
      for (int g = 0; g < levels[d]; ++g) means.row(g) /= counts[d][g];
      change = std::max(change, means.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i) m.row(i) -= means.row(code[i]);
    }
    // a single dimension is exact after one pass
    if (dims.size() == 1 || change < tol) return sweep;
  }
  throw ComputationError(kModule, fmt::format("fixed-effect absorption did not converge in {} sweeps", max_sweeps));
}

int FitResult::index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

double FitResult::estimate(const std::string& name) const {
  const int i = index(name);
  if (i < 0) throw ParameterError(kModule, "no coefficient named '" + name + "'");
  return coef(i);
}

double FitResult::std_error(const std::string& name) const {
  const int i = index(name);
  if (i < 0) throw ParameterError(kModule, "no coefficient named '" + name + "'");
  return se(i);
}

std::map<std::string, double> FitResult::coefficients() const {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = coef(static_cast<Eigen::Index>(i));
  return m;
}

std::map<std::string, double> FitResult::std_errors() const {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = se(static_cast<Eigen::Index>(i));
  return m;
}

FitResult fit_design(Design d) {
  const Eigen::Index n = d.X.rows();
  const Eigen::Index k = d.X.cols();
  Eigen::MatrixXd z(n, k + 1);
  z.leftCols(k) = d.X;
  z.col(k) = d.y;
  const Eigen::VectorXd raw_norms = d.X.colwise().norm();
  absorb_fixed_effects(z, d.unit, d.n_units, d.time, d.n_times);
  Eigen::MatrixXd X = z.leftCols(k);
  const Eigen::VectorXd y = z.col(k);

  // columns wiped out by the fixed effects are collinear with them
  std::vector<std::string> collinear;
  Eigen::VectorXd scale = X.colwise().norm();
  for (Eigen::Index j = 0; j < k; ++j)
    if (scale(j) <= 1e-9 * (1.0 + raw_norms(j))) collinear.push_back(d.names[j]);
  if (collinear.empty()) {
    Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
      const auto& perm = qr.colsPermutation().indices();
      for (Eigen::Index j = qr.rank(); j < k; ++j) collinear.push_back(d.names[perm(j)]);
    }
  }
  if (!collinear.empty()) {
    std::string list;
    for (const auto& c : collinear) list += (list.empty() ? "" : ", ") + c;
    throw RankError(kModule, "design is rank deficient; collinear columns: " + list, collinear);
  }
  if (n <= k) throw ComputationError(kModule, "not enough observations for the number of regressors");

  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::MatrixXd xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  FitResult fit;
  fit.names = d.names;
  fit.coef = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - X * fit.coef;
  fit.n = static_cast<std::size_t>(n);

  if (!d.cluster.empty()) {
    const int g = d.n_clusters;
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, k);
    for (Eigen::Index i = 0; i < n; ++i) scores.row(d.cluster[i]) += X.row(i) * resid(i);
    const Eigen::MatrixXd meat = scores.transpose() * scores;
    const double c = (static_cast<double>(g) / (g - 1)) * (static_cast<double>(n - 1) / static_cast<double>(n - k));
    fit.vcov = c * xtx_inv * meat * xtx_inv;
    fit.clusters = static_cast<std::size_t>(g);
  } else {
    Eigen::Index absorbed = 0;
    if (!d.unit.empty()) absorbed += d.n_units;
    if (!d.time.empty()) absorbed += d.n_times - (d.unit.empty() ? 0 : 1);
    const Eigen::Index dof = n - k - absorbed;
    if (dof > 0) {
      fit.vcov = (resid.squaredNorm() / static_cast<double>(dof)) * xtx_inv;
    } else {
      fit.vcov = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
      fit.warnings.push_back("saturated design: no residual degrees of freedom, standard errors undefined");
    }
  }
  fit.vcov = 0.5 * (fit.vcov + fit.vcov.transpose());
  fit.se = fit.vcov.diagonal().unaryExpr([](double v) { return std::isnan(v) ? v : std::sqrt(std::max(v, 0.0)); });
  const double tss = y.squaredNorm();
  fit.diagnostics["r2_within"] = tss > 0 ? 1.0 - resid.squaredNorm() / tss : 0.0;
  return fit;
}

FitResult fe_ols(const Table& data, const RegressionSpec& spec) { return fit_design(build_design(data, spec)); }

FitResult did(const Table& data, const RegressionSpec& spec) {
  if (spec.post.empty()) throw ParameterError(kModule, "difference-in-differences needs a post column");
  if (!spec.event_time.empty()) throw ParameterError(kModule, "difference-in-differences takes no event-time column");
  return fe_ols(data, spec);
}

}  // namespace coorad::econ
