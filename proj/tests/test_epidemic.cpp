#include <doctest.h>

#include <cmath>
#include <numeric>

#include "coorad/epidemic.hpp"
#include "coorad/error.hpp"
#include "coorad/terrain.hpp"

using namespace coorad;
using namespace coorad::epidemic;

namespace {
// n identical sub-prefectures, one per prefecture, with the given local coverage
RegionSystem toy_system(const std::vector<double>& coverage, double population = 10000.0) {
  RegionSystem rs;
  const int n = static_cast<int>(coverage.size());
  rs.regions.nx = n;
  rs.regions.ny = 1;
  for (int s = 0; s < n; ++s) {
    rs.regions.cell_subpref.push_back(s);
    rs.regions.subpref_prefecture.push_back(s);
    SubPrefecture sp;
    sp.id = s;
    sp.prefecture_id = s;
    sp.population = population;
    sp.area_km2 = 100.0;
    sp.language_shares = {1.0};
    sp.coverage.local_community = coverage[s];
    sp.coverage.any_community = coverage[s];
    rs.subprefs.push_back(sp);
    rs.prefecture_region.push_back(0);
  }
  rs.regions.n_prefectures = n;
  rs.languages = {"A"};
  rs.epicenter = 0;
  return rs;
}

EpidemicConfig quiet() {
  EpidemicConfig c;
  c.noise_sd = 0.0;
  c.wave_amplitude = 0.0;
  c.beta2 = {0.0, 0.0};
  return c;
}

const PanelObservation& row(const Panel& p, int subpref, int month) {
  return p.rows.at(static_cast<std::size_t>(subpref) * p.timeline.horizon + month);
}
}  // namespace

TEST_CASE("pure growth doubles incidence each month") {
  auto c = quiet();
  c.rho = 1.0;
  c.beta0 = std::log(2.0);
  c.seed_cases = 4.0;
  CampaignTimeline tl;
  tl.horizon = 10;
  const auto p = simulate_panel(toy_system({0.0}), tl, c, 1);
  for (int t = 1; t < tl.horizon; ++t) {
    CHECK(row(p, 0, t).latent_log - row(p, 0, t - 1).latent_log == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(row(p, 0, t).cases == 2.0 * row(p, 0, t - 1).cases);
  }
  CHECK(row(p, 0, 0).cases == 4.0);
}

TEST_CASE("treatment shifts the latent path by the event-time effect") {
  auto c = quiet();
  c.beta1_path = {-0.0093};
  CampaignTimeline tl;
  tl.horizon = 10;
  const auto rs = toy_system({1.0, 0.0});
  const auto p = simulate_panel(rs, tl, c, 5);
  for (int t = 0; t < tl.horizon; ++t) {
    const double gap = row(p, 0, t).latent_log - row(p, 1, t).latent_log;
    if (t == tl.official_launch)
      CHECK(gap == doctest::Approx(-0.93).epsilon(1e-12));
    else
      CHECK(std::abs(gap) < 1e-12);
  }
  // literal innovation reading carries the shock forward through rho
  c.effect_kind = EffectKind::innovation;
  const auto q = simulate_panel(rs, tl, c, 5);
  const int t1 = tl.official_launch + 1;
  CHECK(row(q, 0, t1).latent_log - row(q, 1, t1).latent_log == doctest::Approx(-0.93 * c.rho).epsilon(1e-12));
}

TEST_CASE("null effect leaves treated and untreated paths equal") {
  auto c = quiet();
  c.beta1_path.assign(10, 0.0);
  const auto p = simulate_panel(toy_system({0.8, 0.0}), CampaignTimeline{}, c, 3);
  for (int t = 0; t < 29; ++t) CHECK(row(p, 0, t).cases == row(p, 1, t).cases);
}

TEST_CASE("reduced-form effects and innovations") {
  EpidemicConfig c;
  c.beta1_path = default_effect_path();
  for (int tau = 0; tau < 7; ++tau) CHECK(c.reduced_form_effect(tau) == 0.0);
  for (int tau = 7; tau <= 12; ++tau) {
    CHECK(c.reduced_form_effect(tau) <= -1.3 + 1e-12);
    CHECK(c.reduced_form_effect(tau) >= -1.8 - 1e-12);
  }
  CHECK(c.reduced_form_effect(-1) == 0.0);
  CHECK(c.reduced_form_effect(40) == 0.0);
  // accumulated innovations reproduce the reduced form
  double state = 0.0;
  for (int tau = 0; tau < 20; ++tau) {
    state = c.rho * state + c.innovation(tau);
    CHECK(state == doctest::Approx(c.reduced_form_effect(tau)).epsilon(1e-12));
  }
}

TEST_CASE("outcome transform and harm reduction") {
  EpidemicConfig c;
  CHECK(outcome_from_cases(0.0, 1e5, c) == doctest::Approx(std::log(0.01)));
  CHECK(outcome_from_cases(5.0, 1e5, c) == doctest::Approx(std::log(5.01)));

  auto q = quiet();
  q.beta1_path = default_effect_path();
  q.seed_cases = 200.0;
  std::vector<double> cov{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto p = simulate_panel(toy_system(cov, 50000.0), CampaignTimeline{}, q, 11);
  for (const auto& o : p.rows) CHECK(o.log_outcome == outcome_from_cases(o.cases, o.population, q));
  std::vector<double> totals(cov.size(), 0.0);
  for (const auto& o : p.rows) totals[o.subpref_id] += o.cases;
  for (std::size_t s = 1; s < cov.size(); ++s) CHECK(totals[s] <= totals[s - 1]);
  CHECK(totals.back() < totals.front());
}

TEST_CASE("configuration errors") {
  EpidemicConfig c;
  c.rho = 1.5;
  CHECK_THROWS_AS(simulate_panel(toy_system({0.0}), CampaignTimeline{}, c, 1), ParameterError);
  c = EpidemicConfig{};
  c.beta2 = {0.1};
  CHECK_THROWS_AS(simulate_panel(toy_system({0.0}), CampaignTimeline{}, c, 1), ParameterError);
  CHECK_THROWS_AS(simulate_panel(RegionSystem{}, CampaignTimeline{}, EpidemicConfig{}, 1), ParameterError);
  CampaignTimeline bad;
  bad.official_launch = 40;
  CHECK_THROWS(simulate_panel(toy_system({0.0}), bad, EpidemicConfig{}, 1));
}

TEST_CASE("region system") {
  const auto grid = terrain::synth_terrain(1, 40, 30, 3000.0, 1.0);
  RegionParams rp;
  rp.n_prefectures = 1;
  rp.n_subprefectures = 1;
  rp.n_regions = 1;
  const auto one = build_regions(4, rp, grid);
  REQUIRE(one.subprefs.size() == 1);
  CHECK(one.regions.n_prefectures == 1);
  double share_sum = std::accumulate(one.subprefs[0].language_shares.begin(), one.subprefs[0].language_shares.end(), 0.0);
  CHECK(share_sum == doctest::Approx(1.0));

  rp = RegionParams{};
  rp.n_prefectures = 6;
  rp.n_subprefectures = 40;
  rp.n_regions = 2;
  const auto a = build_regions(9, rp, grid);
  const auto b = build_regions(9, rp, grid);
  CHECK(a.regions.cell_subpref == b.regions.cell_subpref);
  a.regions.validate();
  for (std::size_t s = 0; s < a.subprefs.size(); ++s) {
    CHECK(a.subprefs[s].population == b.subprefs[s].population);
    CHECK(a.subprefs[s].prefecture_id == a.regions.subpref_prefecture[s]);
    const auto& sh = a.subprefs[s].language_shares;
    CHECK(std::accumulate(sh.begin(), sh.end(), 0.0) == doctest::Approx(1.0));
    CHECK(std::max_element(sh.begin(), sh.end()) - sh.begin() == a.subprefs[s].majority_language);
  }
  CHECK(a.subprefs[a.epicenter].distance_to_epicenter_km == 0.0);

  rp.n_prefectures = 50;
  CHECK_THROWS_AS(build_regions(9, rp, grid), ParameterError);
}

TEST_CASE("roster and coverage attachment") {
  const auto grid = terrain::synth_terrain(2, 50, 40, 3000.0, 1.0);
  RegionParams rp;
  rp.n_prefectures = 5;
  rp.n_subprefectures = 30;
  rp.n_regions = 2;
  auto rs = build_regions(3, rp, grid);
  RosterParams roster;
  const auto txs = synth_transmitters(3, rs, roster);
  int community = 0;
  for (const auto& t : txs) community += t.radio_class == terrain::RadioClass::community;
  CHECK(community == rp.n_prefectures);
  const auto cov = terrain::aggregate_coverage(grid, txs, rs.regions, terrain::PropagationParams{},
                                               rs.majority_language_names());
  attach_coverage(rs, cov, txs);
  for (const auto& sp : rs.subprefs) {
    CHECK(sp.lang_match_local.has_value());
    CHECK(sp.coverage.local_community <= sp.coverage.any_community);
  }
  attach_coverage(rs, cov, {});
  for (const auto& sp : rs.subprefs) CHECK_FALSE(sp.lang_match_local.has_value());
}

TEST_CASE("leave-one-out peer share") {
  const std::vector<double> v{1, 0, 1, 1, 0};
  const std::vector<int> g{0, 0, 0, 1, 1};
  const auto loo = leave_one_out_mean(v, g);
  CHECK(loo[0] == doctest::Approx(0.5));
  CHECK(loo[1] == doctest::Approx(1.0));
  CHECK(loo[3] == doctest::Approx(0.0));
  CHECK(loo[4] == doctest::Approx(1.0));
  // perturbing one respondent moves only the others in the same group
  auto w = v;
  w[0] = 0;
  const auto moved = leave_one_out_mean(w, g);
  CHECK(moved[0] == loo[0]);
  CHECK(moved[1] != loo[1]);
  CHECK(moved[3] == loo[3]);
}

TEST_CASE("survey") {
  const auto rs = toy_system({0.0, 0.3, 0.6, 0.9});
  SurveyConfig sc;
  sc.n_respondents = 400;
  const auto a = simulate_survey(rs, sc, 8);
  const auto b = simulate_survey(rs, sc, 8);
  REQUIRE(a.size() == 400);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].chlorine_use == b[i].chlorine_use);
    CHECK(a[i].peer_share_media >= 0.0);
    CHECK(a[i].peer_share_media <= 1.0);
    CHECK(a[i].cov_local == rs.subprefs[a[i].subpref_id].coverage.local_community);
  }
  CHECK(survey_table(a).rows() == 400);
  sc.n_respondents = 5;
  CHECK_THROWS_AS(simulate_survey(rs, sc, 8), ParameterError);
  sc = SurveyConfig{};
  sc.gamma = {0.0};
  CHECK_THROWS_AS(simulate_survey(rs, sc, 8), ParameterError);
}
