#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coorad/econometrics.hpp"
#include "coorad/rng.hpp"
#include "coorad/table.hpp"

namespace fixtures {

struct PanelShape {
  int units = 30;
  int periods = 8;
  int units_per_cluster = 3;
  int launch = 4;
  double noise = 1.0;
  std::map<int, double> effects;  // per event time, per unit treatment
};

/// y = unit effect + period effect + effect(event time) * treat + 0.5 * x + noise,
/// treat ~ U(0, 1) per unit, x ~ N(0, 1) per row.
inline coorad::Table random_panel(std::uint64_t seed, const PanelShape& s) {
  coorad::Rng rng(seed);
  std::vector<double> ue(s.units), te(s.periods), treat(s.units);
  for (auto& v : ue) v = rng.normal(0, 2);
  for (auto& v : te) v = rng.normal(0, 1);
  for (auto& v : treat) v = rng.uniform();
  const std::size_t n = static_cast<std::size_t>(s.units) * s.periods;
  std::vector<double> unit(n), time(n), cl(n), ev(n), tr(n), x(n), y(n), post(n);
  std::size_t r = 0;
  for (int i = 0; i < s.units; ++i)
    for (int t = 0; t < s.periods; ++t, ++r) {
      const int tau = t - s.launch;
      const auto it = s.effects.find(tau);
      const double eff = it == s.effects.end() ? 0.0 : it->second;
      unit[r] = i;
      time[r] = t;
      cl[r] = i / s.units_per_cluster;
      ev[r] = tau;
      tr[r] = treat[i];
      post[r] = tau >= 0 ? 1.0 : 0.0;
      x[r] = rng.normal();
      y[r] = ue[i] + te[t] + eff * treat[i] + 0.5 * x[r] + s.noise * rng.normal();
    }
  coorad::Table tab(n);
  tab.set("unit", unit);
  tab.set("time", time);
  tab.set("cluster", cl);
  tab.set("event_time", ev);
  tab.set("treat", tr);
  tab.set("post", post);
  tab.set("x", x);
  tab.set("y", y);
  return tab;
}

inline coorad::econ::RegressionSpec event_spec() {
  coorad::econ::RegressionSpec s;
  s.outcome = "y";
  s.treatments = {"treat"};
  s.event_time = "event_time";
  s.omitted_event_time = -1;
  s.controls = {"x"};
  s.unit = "unit";
  s.time = "time";
  s.cluster = "cluster";
  return s;
}

/// Plain OLS on explicit unit and period dummies (first period dropped).
/// Returns coefficients of `regressors` followed by the dummies.
inline Eigen::VectorXd dummy_ols(const coorad::Table& t, const std::vector<std::vector<double>>& regressors,
                                 const std::string& unit, const std::string& time, int n_units, int n_times,
                                 const std::string& y, Eigen::VectorXd* resid = nullptr,
                                 Eigen::MatrixXd* design = nullptr) {
  const auto n = static_cast<Eigen::Index>(t.rows());
  const auto k = static_cast<Eigen::Index>(regressors.size());
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k + n_units + n_times - 1);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) X(i, j) = regressors[j][i];
    X(i, k + static_cast<int>(t.col(unit)[i])) = 1.0;
    const int tt = static_cast<int>(t.col(time)[i]);
    if (tt > 0) X(i, k + n_units + tt - 1) = 1.0;
    Y(i) = t.col(y)[i];
  }
  Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
  if (resid) *resid = Y - X * b;
  if (design) *design = X;
  return b;
}

}  // namespace fixtures
