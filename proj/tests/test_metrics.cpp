#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "coorad/epidemic.hpp"
#include "coorad/error.hpp"
#include "coorad/metrics.hpp"
#include "coorad/rng.hpp"
#include "coorad/terrain.hpp"

using namespace coorad;
using namespace coorad::metrics;

namespace {
econ::EventStudyResult path(const std::vector<std::pair<int, double>>& coefs) {
  econ::EventStudyResult r;
  r.treatment = "cov_local";
  for (const auto& [tau, beta] : coefs) {
    econ::EventCoefficient c;
    c.tau = tau;
    c.beta = beta;
    c.omitted = tau == -1;
    r.path.push_back(c);
  }
  return r;
}

// rows: (month, cases, cov_local); launch at month 2
Table panel(const std::vector<std::array<double, 3>>& rows) {
  Table t(rows.size());
  std::vector<double> m, c, cov, post;
  for (const auto& r : rows) {
    m.push_back(r[0]);
    c.push_back(r[1]);
    cov.push_back(r[2]);
    post.push_back(r[0] >= 2 ? 1.0 : 0.0);
  }
  t.set("month", m);
  t.set("cases", c);
  t.set("cov_local", cov);
  t.set("post_official", post);
  return t;
}
}  // namespace

TEST_CASE("fractionalization") {
  CHECK(fractionalization(GroupShares({1.0})) == 0.0);
  CHECK(fractionalization(GroupShares({0.5, 0.5})) == doctest::Approx(0.5));
  CHECK(fractionalization(GroupShares({0.5, 0.3, 0.2})) == doctest::Approx(0.62).epsilon(1e-12));
  for (int m = 1; m <= 10; ++m)
    CHECK(fractionalization(GroupShares(std::vector<double>(m, 1.0 / m))) == doctest::Approx(1.0 - 1.0 / m).epsilon(1e-12));
  CHECK_THROWS_AS(GroupShares({0.5, 0.4}), ParameterError);
  CHECK_THROWS_AS(GroupShares({1.2, -0.2}), ParameterError);
  CHECK_THROWS_AS(GroupShares({}), ParameterError);

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(2 + rng.below(6));
    double total = 0.0;
    for (double& v : s) total += (v = rng.uniform());
    for (double& v : s) v /= total;
    const double f = fractionalization(GroupShares(s));
    CHECK(f >= 0.0);
    CHECK(f < 1.0);
    std::reverse(s.begin(), s.end());
    CHECK(fractionalization(GroupShares(s)) == doctest::Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("fractionalization by location") {
  const auto grid = terrain::synth_terrain(5, 60, 50, 3000.0, 1.0);
  epidemic::RegionParams rp;
  rp.n_prefectures = 8;
  rp.n_subprefectures = 60;
  rp.n_regions = 3;
  const auto rs = epidemic::build_regions(5, rp, grid);
  const auto rows = fractionalization_by_location(rs);
  int counts[4] = {0, 0, 0, 0};
  for (const auto& r : rows) {
    CHECK(r.value >= 0.0);
    CHECK(r.value < 1.0);
    if (r.level == "country") ++counts[0];
    if (r.level == "region") ++counts[1];
    if (r.level == "prefecture") ++counts[2];
    if (r.level == "subprefecture") ++counts[3];
  }
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 3);
  CHECK(counts[2] == 8);
  CHECK(counts[3] == 60);
  const auto s = summarize_fractionalization(rows);
  CHECK(s.country >= s.subprefecture);
  CHECK(fractionalization_table(rows).rows() == rows.size());
}

TEST_CASE("prevented cases arithmetic") {
  // one post month, 100 untreated cases, -0.015 per pp at a 62pp gap
  const auto t = panel({{0, 40, 0.0}, {1, 50, 0.0}, {2, 100, 0.0}, {2, 30, 0.4}});
  const auto r = prevented_cases(path({{-2, 0.0}, {-1, 0.0}, {0, -1.5}}), t, 62.0);
  REQUIRE(r.prevented_by_month.size() == 1);
  CHECK(r.prevented_by_month[0] == doctest::Approx(93.0).epsilon(1e-12));
  CHECK(r.prevented_total == doctest::Approx(93.0).epsilon(1e-12));
  CHECK(r.total_cases == 220.0);
  CHECK(r.share_of_total_epidemic == doctest::Approx(93.0 / 220.0));
  CHECK(r.exponential_total == doctest::Approx(100.0 * (1.0 - std::exp(-0.015 * 62))).epsilon(1e-12));

  const auto expo = prevented_cases(path({{0, -1.5}}), t, 62.0, untreated_local(), CounterfactualMethod::exponential);
  CHECK(expo.prevented_total == doctest::Approx(r.exponential_total));
}

TEST_CASE("prevented cases properties") {
  const auto t = panel({{0, 10, 0.0}, {1, 20, 0.0}, {2, 80, 0.0}, {3, 60, 0.0}, {4, 30, 0.0}, {3, 9, 0.5}});
  const auto zero = prevented_cases(path({{-1, 0}, {0, 0}, {1, 0}, {2, 0}}), t, 62.0);
  CHECK(zero.prevented_total == 0.0);
  CHECK(zero.share_of_total_epidemic == 0.0);

  const auto esr = path({{-1, 0}, {0, -0.4}, {1, -1.2}, {2, 0.3}});
  const auto a = prevented_cases(esr, t, 30.0);
  const auto b = prevented_cases(esr, t, 60.0);
  CHECK(b.prevented_total == doctest::Approx(2.0 * a.prevented_total));
  CHECK(a.prevented_by_month[2] == 0.0);  // harmful estimates prevent nothing
  double sum = 0.0;
  for (double v : a.prevented_by_month) sum += v;
  CHECK(a.prevented_total == doctest::Approx(sum));
  CHECK(a.share_of_total_epidemic >= 0.0);
  CHECK(a.share_of_total_epidemic <= 1.0);

  const auto everyone = prevented_cases(esr, t, 30.0, nullptr);
  CHECK(everyone.base_cases[1] == 69.0);
  CHECK(a.base_cases[1] == 60.0);

  CHECK_THROWS_AS(prevented_cases(path({{0, -1}, {5, -1}}), t, 62.0), ParameterError);
  CHECK_THROWS_AS(prevented_cases(esr, t, 120.0), ParameterError);
}
