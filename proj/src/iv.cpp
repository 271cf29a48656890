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

std::vector<int> codes_of(const std::vector<double>& values, int& n_levels) {
  std::map<double, int> levels;
  for (double v : values) levels.emplace(v, 0);
  int next = 0;
  for (auto& [value, code] : levels) code = next++;
  n_levels = next;
  std::vector<int> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) codes[i] = levels[values[i]];
  return codes;
}

Eigen::MatrixXd gather(const Table& data, const std::vector<std::string>& names) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!data.has(names[j])) throw ParameterError(kModule, "missing column '" + names[j] + "'");
    const auto& c = data.col(names[j]);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!std::isfinite(c[i])) throw ParameterError(kModule, "non-finite value in column '" + names[j] + "'");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[i];
    }
  }
  return m;
}

void require_full_rank(const Eigen::MatrixXd& m, const std::vector<std::string>& names, const std::string& what) {
  const Eigen::VectorXd norms = m.colwise().norm();
  std::vector<std::string> bad;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (!(norms(j) > 1e-12)) bad.push_back(names[j]);
  if (bad.empty()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m * norms.cwiseInverse().asDiagonal());
    qr.setThreshold(1e-10);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < m.cols(); ++j) bad.push_back(names[perm(j)]);
  }
  if (!bad.empty()) {
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    throw RankError(kModule, what + " is rank deficient; collinear columns: " + list, bad);
  }
}

double rss_of(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() == 0) return y.squaredNorm();
  const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
  return (y - X * b).squaredNorm();
}
}  // namespace

FitResult two_sls(const Table& data, const IvSpec& spec) {
  if (spec.outcome.empty()) throw ParameterError(kModule, "2SLS needs an outcome column");
  if (spec.endogenous.empty()) throw ParameterError(kModule, "2SLS needs an endogenous regressor");
  if (spec.instruments.size() < spec.endogenous.size())
    throw ParameterError(kModule, fmt::format("2SLS is under-identified: {} instruments for {} endogenous regressors",
                                              spec.instruments.size(), spec.endogenous.size()));
  std::set<std::string> seen{spec.outcome};
  for (const auto* group : {&spec.endogenous, &spec.instruments, &spec.exogenous})
    for (const auto& c : *group)
      if (!seen.insert(c).second) throw ParameterError(kModule, "column '" + c + "' is used in two roles");

  const Eigen::Index n = static_cast<Eigen::Index>(data.rows());
  Eigen::VectorXd y = gather(data, {spec.outcome}).col(0);
  Eigen::MatrixXd D = gather(data, spec.endogenous);
  Eigen::MatrixXd Zx = gather(data, spec.instruments);
  Eigen::MatrixXd W = gather(data, spec.exogenous);
  std::vector<std::string> w_names = spec.exogenous;
  Eigen::Index absorbed = 0;
  if (!spec.absorb.empty()) {
    if (!data.has(spec.absorb)) throw ParameterError(kModule, "missing column '" + spec.absorb + "'");
    int levels = 0;
    const auto codes = codes_of(data.col(spec.absorb), levels);
    Eigen::MatrixXd all(n, 1 + D.cols() + Zx.cols() + W.cols());
    all << y, D, Zx, W;
    absorb_fixed_effects(all, codes, levels, {}, 0);
    y = all.col(0);
    D = all.middleCols(1, D.cols());
    Zx = all.middleCols(1 + D.cols(), Zx.cols());
    W = all.rightCols(W.cols());
    absorbed = levels;
  } else {
    W.conservativeResize(n, W.cols() + 1);
    W.col(W.cols() - 1).setOnes();
    w_names.push_back("const");
  }

  FitResult fit;
  // first stage
  Eigen::MatrixXd Z(n, Zx.cols() + W.cols());
  Z << Zx, W;
  std::vector<std::string> z_names = spec.instruments;
  z_names.insert(z_names.end(), w_names.begin(), w_names.end());
  require_full_rank(Z, z_names, "first stage");
  const Eigen::Index q = Zx.cols();
  const Eigen::Index dof_first = n - Z.cols() - absorbed;
  if (dof_first <= 0) throw ComputationError(kModule, "no residual degrees of freedom in the first stage");
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const double rss_u = rss_of(Z, D.col(j));
    const double rss_r = rss_of(W, D.col(j));
    const double f = rss_u > 0 ? ((rss_r - rss_u) / static_cast<double>(q)) / (rss_u / static_cast<double>(dof_first))
                               : std::numeric_limits<double>::infinity();
    const auto& name = spec.endogenous[static_cast<std::size_t>(j)];
    fit.diagnostics["first_stage_F:" + name] = f;
    if (!(f >= 10.0))
      fit.warnings.push_back(fmt::format("weak instruments for '{}': first-stage F = {:.3g} < 10", name, f));
  }

  Eigen::MatrixXd X(n, D.cols() + W.cols());
  X << D, W;
  fit.names = spec.endogenous;
  fit.names.insert(fit.names.end(), w_names.begin(), w_names.end());
  const auto k = X.cols();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> zqr(Z);
  const Eigen::MatrixXd Xhat = Z * zqr.solve(X);
  require_full_rank(Xhat, fit.names, "second stage");
  const Eigen::MatrixXd bread = (Xhat.transpose() * Xhat).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.coef = bread * (Xhat.transpose() * y);
  const Eigen::VectorXd resid = y - X * fit.coef;
  fit.n = static_cast<std::size_t>(n);
  if (!spec.cluster.empty()) {
    if (!data.has(spec.cluster)) throw ParameterError(kModule, "missing column '" + spec.cluster + "'");
    int g = 0;
    const auto codes = codes_of(data.col(spec.cluster), g);
    if (g < 2) throw ParameterError(kModule, fmt::format("clustering on '{}' needs at least 2 clusters, found {}", spec.cluster, g));
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, k);
    for (Eigen::Index i = 0; i < n; ++i) scores.row(codes[i]) += Xhat.row(i) * resid(i);
    const double c = (static_cast<double>(g) / (g - 1)) * (static_cast<double>(n - 1) / static_cast<double>(n - k));
    fit.vcov = c * bread * (scores.transpose() * scores) * bread;
    fit.clusters = static_cast<std::size_t>(g);
  } else {
    const Eigen::Index dof = n - k - absorbed;
    if (dof <= 0) throw ComputationError(kModule, "no residual degrees of freedom");
    fit.vcov = (resid.squaredNorm() / static_cast<double>(dof)) * bread;
  }
  fit.vcov = 0.5 * (fit.vcov + fit.vcov.transpose());
  fit.se = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

std::vector<std::string> peer_bin_names(const PeerBinSpec& spec) {
  const auto& c = spec.cutpoints;
  std::vector<std::string> names;
  for (std::size_t b = 0; b <= c.size(); ++b) {
    if (b == 0) names.push_back(fmt::format("{}:<{}", spec.peer_share, c.front()));
    else if (b == c.size()) names.push_back(fmt::format("{}:>{}", spec.peer_share, c.back()));
    else names.push_back(fmt::format("{}:[{},{}]", spec.peer_share, c[b - 1], c[b]));
  }
  return names;
}

FitResult binned_peer_effects(const Table& data, const PeerBinSpec& spec) {
  if (spec.cutpoints.empty()) throw ParameterError(kModule, "peer bins need at least one cutpoint");
  for (std::size_t i = 0; i < spec.cutpoints.size(); ++i) {
    const double c = spec.cutpoints[i];
    if (!(c > 0.0 && c < 1.0) || (i > 0 && !(c > spec.cutpoints[i - 1])))
      throw ParameterError(kModule, "peer-bin cutpoints must be increasing and inside (0, 1)");
  }
  if (!data.has(spec.peer_share)) throw ParameterError(kModule, "missing column '" + spec.peer_share + "'");
  const auto& share = data.col(spec.peer_share);
  const auto names = peer_bin_names(spec);
  const auto& cut = spec.cutpoints;
  std::vector<std::vector<double>> cols(names.size(), std::vector<double>(share.size(), 0.0));
  std::vector<std::size_t> counts(names.size(), 0);
  for (std::size_t i = 0; i < share.size(); ++i) {
    const double p = share[i];
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(kModule, "peer share outside [0, 1]");
    std::size_t b = 0;
    if (p < cut.front()) b = 0;
    else if (p > cut.back()) b = cut.size();
    else
      for (b = 1; b < cut.size() && p > cut[b]; ++b) {
      }
    cols[b][i] = p;
    ++counts[b];
  }
  Table t = data;
  RegressionSpec rs;
  rs.outcome = spec.outcome;
  rs.controls = spec.controls;
  rs.unit = spec.absorb;
  rs.cluster = spec.cluster;
  std::vector<std::string> warnings;
  for (std::size_t b = 0; b < names.size(); ++b) {
    if (counts[b] == 0) {
      warnings.push_back("bin '" + names[b] + "' is empty; coefficient omitted");
      continue;
    }
    t.set(names[b], std::move(cols[b]));
    rs.treatments.push_back(names[b]);
  }
  FitResult fit = fe_ols(t, rs);
  fit.warnings.insert(fit.warnings.end(), warnings.begin(), warnings.end());
  return fit;
}

}  // namespace coorad::econ
