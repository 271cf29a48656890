#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coorad/econometrics.hpp"
#include "coorad/error.hpp"
#include "coorad/rng.hpp"
#include "fixtures.hpp"

using namespace coorad;
using namespace coorad::econ;

TEST_CASE("fast bootstrap matches the generic refit path") {
  fixtures::PanelShape shape;
  shape.units = 24;
  shape.periods = 6;
  shape.launch = 3;
  shape.effects = {{0, -1.0}, {1, -1.5}};
  const auto t = fixtures::random_panel(41, shape);
  const auto spec = fixtures::event_spec();
  const auto design = build_design(t, spec);
  REQUIRE(BalancedBootstrap::applicable(design));
  const BalancedBootstrap fast(design);

  std::vector<double> ones(static_cast<std::size_t>(shape.units), 1.0);
  const auto full = fe_ols(t, spec);
  const auto b1 = fast.fit(ones);
  for (Eigen::Index j = 0; j < b1.size(); ++j) CHECK(b1(j) == doctest::Approx(full.coef(j)).epsilon(1e-8));

  const auto quick = fast.run(60, 77);
  const auto slow = cluster_bootstrap([&](const Table& d) { return fe_ols(d, spec); }, t, "cluster", 60, 77, {"unit"});
  REQUIRE(quick.draws.rows() == slow.draws.rows());
  CHECK((quick.draws - slow.draws).cwiseAbs().maxCoeff() < 1e-7);
  for (Eigen::Index j = 0; j < quick.se.size(); ++j) CHECK(quick.se(j) == doctest::Approx(slow.se(j)).epsilon(1e-7));

  const auto again = fast.run(60, 77, 3);
  CHECK(again.draws == quick.draws);

  auto unbalanced = design;
  unbalanced.unit.pop_back();
  CHECK_FALSE(BalancedBootstrap::applicable(unbalanced));
}

TEST_CASE("bootstrap contracts") {
  fixtures::PanelShape shape;
  shape.units = 12;
  auto t = fixtures::random_panel(2, shape);
  const auto spec = fixtures::event_spec();
  auto est = [&](const Table& d) { return fe_ols(d, spec); };

  SUBCASE("deterministic for a fixed seed") {
    const auto a = cluster_bootstrap(est, t, "cluster", 50, 9, {"unit"}, 2);
    const auto b = cluster_bootstrap(est, t, "cluster", 50, 9, {"unit"}, 1);
    CHECK(a.draws == b.draws);
    CHECK(a.reps == 50);
    CHECK(draw_clusters(7, 3, 5) == draw_clusters(7, 3, 5));
  }
  SUBCASE("exact fit gives zero SEs") {
    auto u = t;
    auto& y = u.col("y");
    for (std::size_t i = 0; i < u.rows(); ++i) y[i] = 1.0 + 2.0 * u.col("x")[i] + 0.3 * u.col("unit")[i];
    const auto r = cluster_bootstrap(est, u, "cluster", 50, 1, {"unit"});
    for (Eigen::Index j = 0; j < r.se.size(); ++j) CHECK(r.se(j) < 1e-8);
  }
  SUBCASE("errors") {
    auto u = t;
    for (double& v : u.col("cluster")) v = 0.0;
    CHECK_THROWS_AS(cluster_bootstrap(est, u, "cluster", 50, 1), ParameterError);
    CHECK_THROWS_AS(cluster_bootstrap(est, t, "cluster", 49, 1), ParameterError);
    auto failing = [](const Table&) -> FitResult { throw ComputationError("test", "boom"); };
    CHECK_THROWS_AS(cluster_bootstrap(failing, t, "cluster", 50, 1), ComputationError);
  }
}

TEST_CASE("event study with bootstrap SEs") {
  fixtures::PanelShape shape;
  shape.units = 30;
  const auto t = fixtures::random_panel(5, shape);
  EventStudyOptions o;
  o.bootstrap_reps = 60;
  o.seed = 4;
  const auto esr = event_study(t, fixtures::event_spec(), o);
  CHECK(esr.se_source == "bootstrap");
  CHECK(esr.clusters == 10);
  CHECK(esr.bootstrap_reps == 60);
  for (const auto& c : esr.path) {
    if (c.omitted) continue;
    CHECK(c.se > 0.0);
    CHECK(c.ci_high - c.ci_low == doctest::Approx(2 * 2.2621571627982 * c.se).epsilon(1e-9));  // t(9)
  }
}

namespace {
Table iv_data(std::uint64_t seed, int n, double first_stage, double effect) {
  Rng rng(seed);
  std::vector<double> z(n), x(n), y(n), w(n), g(n);
  for (int i = 0; i < n; ++i) {
    const double h = rng.normal();
    z[i] = rng.uniform();
    w[i] = rng.normal();
    x[i] = first_stage * z[i] + 0.8 * h + 0.2 * w[i] + rng.normal();
    y[i] = effect * x[i] + 1.5 * h + 0.3 * w[i] + rng.normal();
    g[i] = i % 25;
  }
  Table t(static_cast<std::size_t>(n));
  t.set("z", z);
  t.set("x", x);
  t.set("y", y);
  t.set("w", w);
  t.set("g", g);
  return t;
}
}  // namespace

TEST_CASE("just-identified 2SLS is the Wald ratio") {
  const auto t = iv_data(3, 500, 2.0, 0.5);
  IvSpec s;
  s.outcome = "y";
  s.endogenous = {"x"};
  s.instruments = {"z"};
  const auto fit = two_sls(t, s);
  auto cov = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0, c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= a.size();
    mb /= b.size();
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma) * (b[i] - mb);
    return c;
  };
  const double wald = cov(t.col("z"), t.col("y")) / cov(t.col("z"), t.col("x"));
  CHECK(std::abs(fit.estimate("x") - wald) < 1e-10);
  CHECK(fit.diagnostics.at("first_stage_F:x") > 10.0);
  CHECK(fit.index("const") >= 0);
}

TEST_CASE("2SLS with exogenous controls, absorb and clusters") {
  const auto t = iv_data(8, 3000, 2.0, 0.5);
  IvSpec s;
  s.outcome = "y";
  s.endogenous = {"x"};
  s.instruments = {"z"};
  s.exogenous = {"w"};
  s.absorb = "g";
  s.cluster = "g";
  const auto fit = two_sls(t, s);
  CHECK(fit.estimate("x") == doctest::Approx(0.5).epsilon(0.2));
  CHECK(fit.index("const") < 0);
  CHECK(fit.clusters == 25);
  // naive OLS is pulled up by the shared trait
  RegressionSpec o;
  o.outcome = "y";
  o.treatments = {"x"};
  o.controls = {"w"};
  o.unit = "g";
  CHECK(fe_ols(t, o).estimate("x") > 0.9);
}

TEST_CASE("weak and invalid instruments") {
  auto t = iv_data(5, 800, 0.0, 0.5);
  IvSpec s;
  s.outcome = "y";
  s.endogenous = {"x"};
  s.instruments = {"z"};
  const auto weak = two_sls(t, s);
  CHECK(weak.diagnostics.at("first_stage_F:x") < 10.0);
  CHECK(!weak.warnings.empty());

  t.set("z", std::vector<double>(t.rows(), 1.0));
  CHECK_THROWS_AS(two_sls(t, s), RankError);
  s.instruments.clear();
  CHECK_THROWS_AS(two_sls(t, s), ParameterError);
}

TEST_CASE("binned peer effects") {
  Rng rng(13);
  const int n = 3000;
  std::vector<double> p(n), y(n), g(n);
  for (int i = 0; i < n; ++i) {
    p[i] = rng.uniform();
    g[i] = i % 30;
    y[i] = 2.0 * p[i] * p[i] + 0.1 * rng.normal();
  }
  Table t(n);
  t.set("peer", p);
  t.set("y", y);
  t.set("g", g);
  PeerBinSpec s;
  s.outcome = "y";
  s.peer_share = "peer";
  s.cluster = "g";
  const auto names = peer_bin_names(s);
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "peer:<0.5");
  CHECK(names[1] == "peer:[0.5,0.7]");
  CHECK(names[2] == "peer:>0.7");
  const auto convex = binned_peer_effects(t, s);
  CHECK(convex.estimate(names[0]) < convex.estimate(names[1]));
  CHECK(convex.estimate(names[1]) < convex.estimate(names[2]));
  CHECK(convex.warnings.empty());

  for (int i = 0; i < n; ++i) {
    p[i] = 0.1 + 0.3 * rng.uniform();
    y[i] = 0.4 * p[i] + 0.1 * rng.normal();
  }
  t.set("peer", p);
  t.set("y", y);
  const auto degenerate = binned_peer_effects(t, s);
  CHECK(degenerate.index(names[0]) >= 0);
  CHECK(degenerate.index(names[1]) < 0);
  CHECK(degenerate.index(names[2]) < 0);
  CHECK(degenerate.warnings.size() == 2);

  s.cutpoints = {0.7, 0.5};
  CHECK_THROWS_AS(binned_peer_effects(t, s), ParameterError);
}
