#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "coorad/econometrics.hpp"
#include "coorad/error.hpp"
#include "coorad/parallel.hpp"
#include "coorad/rng.hpp"

namespace coorad::econ {

namespace {
constexpr const char* kModule = "panel-econometrics";

std::vector<int> level_codes(const std::vector<double>& values, int& n_levels) {
  std::map<double, int> levels;
  for (double v : values) levels.emplace(v, 0);
  int next = 0;
  for (auto& [value, code] : levels) code = next++;
  n_levels = next;
  std::vector<int> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) codes[i] = levels[values[i]];
  return codes;
}

BootstrapResult summarize(std::vector<std::string> names, const std::vector<Eigen::VectorXd>& draws,
                          const std::vector<char>& ok, int reps) {
  BootstrapResult r;
  r.names = std::move(names);
  r.reps = reps;
  const auto k = static_cast<Eigen::Index>(r.names.size());
  int good = 0;
  for (char o : ok) good += o ? 1 : 0;
  r.failures = reps - good;
  if (r.failures > 0.05 * reps)
    throw ComputationError(kModule, fmt::format("bootstrap estimator failed in {} of {} replications", r.failures, reps));
  if (good < 2) throw ComputationError(kModule, "fewer than 2 successful bootstrap replications");
  r.draws.resize(good, k);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < draws.size(); ++i)
    if (ok[i]) r.draws.row(row++) = draws[i].transpose();
  const Eigen::RowVectorXd mean = r.draws.colwise().mean();
  const Eigen::MatrixXd centered = r.draws.rowwise() - mean;
  r.cov = centered.transpose() * centered / static_cast<double>(good - 1);
  r.se = r.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return r;
}
}  // namespace

std::map<std::string, double> BootstrapResult::se_map() const {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = se(static_cast<Eigen::Index>(i));
  return m;
}

std::vector<int> draw_clusters(int n_clusters, std::uint64_t seed, int rep) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
  std::vector<int> draw(static_cast<std::size_t>(n_clusters));
  for (auto& d : draw) d = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_clusters)));
  return draw;
}

BootstrapResult cluster_bootstrap(const std::function<FitResult(const Table&)>& estimator, const Table& data,
                                  const std::string& cluster_dim, int reps, std::uint64_t seed,
                                  const std::vector<std::string>& relabel, unsigned threads) {
  if (reps < 50) throw ParameterError(kModule, fmt::format("bootstrap needs at least 50 replications, got {}", reps));
  if (!data.has(cluster_dim)) throw ParameterError(kModule, "missing cluster column '" + cluster_dim + "'");
  for (const auto& c : relabel)
    if (!data.has(c)) throw ParameterError(kModule, "missing column '" + c + "'");
  int g = 0;
  const auto codes = level_codes(data.col(cluster_dim), g);
  if (g < 2) throw ParameterError(kModule, fmt::format("bootstrap needs at least 2 clusters, found {}", g));
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(g));
  for (std::size_t i = 0; i < codes.size(); ++i) members[codes[i]].push_back(i);
  std::vector<std::vector<int>> relabel_codes;
  std::vector<int> relabel_levels;
  for (const auto& c : relabel) {
    int levels = 0;
    relabel_codes.push_back(level_codes(data.col(c), levels));
    relabel_levels.push_back(levels);
  }

  const FitResult base = estimator(data);
  std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(reps));
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const auto draw = draw_clusters(g, seed, static_cast<int>(r));
    std::vector<std::size_t> rows;
    std::vector<double> new_cluster;
    std::vector<std::vector<double>> new_labels(relabel.size());
    for (std::size_t j = 0; j < draw.size(); ++j) {
      for (std::size_t row : members[draw[j]]) {
        rows.push_back(row);
        new_cluster.push_back(static_cast<double>(j));
        for (std::size_t c = 0; c < relabel.size(); ++c)
          new_labels[c].push_back(static_cast<double>(j) * relabel_levels[c] + relabel_codes[c][row]);
      }
    }
    Table sample = data.take(rows);
    sample.set(cluster_dim, std::move(new_cluster));
    for (std::size_t c = 0; c < relabel.size(); ++c)
      if (relabel[c] != cluster_dim) sample.set(relabel[c], std::move(new_labels[c]));
    try {
      FitResult fit = estimator(sample);
      if (fit.names != base.names) return;
      draws[r] = fit.coef;
      ok[r] = 1;
    } catch (const Error&) {
    }
  });
  return summarize(base.names, draws, ok, reps);
}

bool BalancedBootstrap::applicable(const Design& d) {
  if (d.unit.empty() || d.time.empty() || d.cluster.empty() || d.intercept) return false;
  const auto n = d.unit.size();
  if (n != static_cast<std::size_t>(d.n_units) * static_cast<std::size_t>(d.n_times)) return false;
  std::vector<char> seen(n, 0);
  std::vector<int> unit_cluster(static_cast<std::size_t>(d.n_units), -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = static_cast<std::size_t>(d.unit[i]) * d.n_times + d.time[i];
    if (seen[cell]) return false;
    seen[cell] = 1;
    int& c = unit_cluster[d.unit[i]];
    if (c >= 0 && c != d.cluster[i]) return false;
    c = d.cluster[i];
  }
  return true;
}

BalancedBootstrap::BalancedBootstrap(const Design& d) {
  if (!applicable(d))
    throw ParameterError(kModule, "balanced bootstrap needs a balanced two-way FE panel with units nested in clusters");
  units_ = d.n_units;
  periods_ = d.n_times;
  k_ = static_cast<int>(d.X.cols());
  clusters_ = d.n_clusters;
  names_ = d.names;
  unit_cluster_.assign(static_cast<std::size_t>(units_), 0);
  blocks_.assign(static_cast<std::size_t>(units_), Eigen::MatrixXd::Zero(periods_, k_ + 1));
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    auto& b = blocks_[d.unit[i]];
    b.row(d.time[i]).head(k_) = d.X.row(i);
    b(d.time[i], k_) = d.y(i);
    unit_cluster_[d.unit[i]] = d.cluster[i];
  }
  cross_.resize(static_cast<std::size_t>(units_));
  for (int u = 0; u < units_; ++u) {
    auto& b = blocks_[u];
    b.rowwise() -= b.colwise().mean();
    cross_[u] = b.transpose() * b;
  }
}

namespace {
Eigen::VectorXd solve_normal(const Eigen::MatrixXd& A, int k) {
  const Eigen::MatrixXd Axx = A.topLeftCorner(k, k);
  const Eigen::VectorXd scale = Axx.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (int j = 0; j < k; ++j)
    if (!(scale(j) > 1e-12)) throw RankError("panel-econometrics", "bootstrap design is rank deficient", {});
  const Eigen::VectorXd inv = scale.cwiseInverse();
  const Eigen::MatrixXd S = inv.asDiagonal() * Axx * inv.asDiagonal();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-10)
    throw RankError("panel-econometrics", "bootstrap design is rank deficient", {});
  return inv.asDiagonal() * ldlt.solve(inv.asDiagonal() * A.topRightCorner(k, 1));
}
}  // namespace

Eigen::VectorXd BalancedBootstrap::fit(const std::vector<double>& unit_weights) const {
  if (unit_weights.size() != static_cast<std::size_t>(units_))
    throw ParameterError(kModule, "unit weight count does not match the design");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k_ + 1, k_ + 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(periods_, k_ + 1);
  double W = 0.0;
  for (int u = 0; u < units_; ++u) {
    const double w = unit_weights[u];
    if (w == 0.0) continue;
    A.noalias() += w * cross_[u];
    M.noalias() += w * blocks_[u];
    W += w;
  }
  if (W <= 0.0) throw ParameterError(kModule, "unit weights sum to zero");
  A.noalias() -= M.transpose() * M / W;
  return solve_normal(A, k_);
}

BootstrapResult BalancedBootstrap::run(int reps, std::uint64_t seed, unsigned threads) const {
  if (reps < 50) throw ParameterError(kModule, fmt::format("bootstrap needs at least 50 replications, got {}", reps));
  if (clusters_ < 2) throw ParameterError(kModule, fmt::format("bootstrap needs at least 2 clusters, found {}", clusters_));
  // a replication only reweights clusters, so aggregate per cluster once
  std::vector<Eigen::MatrixXd> cross(static_cast<std::size_t>(clusters_), Eigen::MatrixXd::Zero(k_ + 1, k_ + 1));
  std::vector<Eigen::MatrixXd> block(static_cast<std::size_t>(clusters_), Eigen::MatrixXd::Zero(periods_, k_ + 1));
  std::vector<double> size(static_cast<std::size_t>(clusters_), 0.0);
  for (int u = 0; u < units_; ++u) {
    cross[unit_cluster_[u]] += cross_[u];
    block[unit_cluster_[u]] += blocks_[u];
    size[unit_cluster_[u]] += 1.0;
  }
  std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(reps));
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    std::vector<int> count(static_cast<std::size_t>(clusters_), 0);
    for (int c : draw_clusters(clusters_, seed, static_cast<int>(r))) ++count[c];
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k_ + 1, k_ + 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(periods_, k_ + 1);
    double W = 0.0;
    for (int c = 0; c < clusters_; ++c) {
      if (count[c] == 0) continue;
      A.noalias() += count[c] * cross[c];
      M.noalias() += count[c] * block[c];
      W += count[c] * size[c];
    }
    A.noalias() -= M.transpose() * M / W;
    try {
      draws[r] = solve_normal(A, k_);
      ok[r] = 1;
    } catch (const Error&) {
    }
  });
  return summarize(names_, draws, ok, reps);
}

}  // namespace coorad::econ
