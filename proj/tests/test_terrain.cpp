#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "coorad/error.hpp"
#include "coorad/rng.hpp"
#include "coorad/terrain.hpp"

using namespace coorad;
using namespace coorad::terrain;

namespace {
ElevationGrid flat(int nx, int ny, double cell) {
  return {nx, ny, cell, std::vector<double>(static_cast<std::size_t>(nx) * ny, 0.0)};
}

Transmitter tx_at(double x, double y, double kw, RadioClass c = RadioClass::community, int pref = 0,
                  std::string lang = "A") {
  Transmitter t;
  t.id = "t";
  t.position = {x, y};
  t.mast_height = 30.0;
  t.power_kw = kw;
  t.radio_class = c;
  t.home_prefecture = pref;
  t.language = std::move(lang);
  return t;
}

double variance(const ElevationGrid& g) {
  double m = 0.0, v = 0.0;
  for (double h : g.heights) m += h;
  m /= g.heights.size();
  for (double h : g.heights) v += (h - m) * (h - m);
  return v / g.heights.size();
}

// one sub-prefecture per vertical strip of `width` columns, prefecture = strip / 2
RegionSet strips(int nx, int ny, int width) {
  RegionSet r;
  r.nx = nx;
  r.ny = ny;
  const int ns = (nx + width - 1) / width;
  r.cell_subpref.resize(static_cast<std::size_t>(nx) * ny);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) r.cell_subpref[static_cast<std::size_t>(y) * nx + x] = x / width;
  for (int s = 0; s < ns; ++s) r.subpref_prefecture.push_back(s / 2);
  r.n_prefectures = (ns + 1) / 2;
  return r;
}

// independent brute force: evaluate every cell for every transmitter, no pruning
std::vector<CoverageShares> brute_force(const ElevationGrid& g, const std::vector<Transmitter>& txs,
                                        const RegionSet& r, const PropagationParams& p,
                                        const std::vector<std::string>& lang) {
  const int ns = r.n_subpref();
  std::vector<double> cells(ns, 0), loc(ns, 0), any(ns, 0), nat(ns, 0), pri(ns, 0), intl(ns, 0);
  std::vector<std::vector<double>> per_tx(txs.size(), std::vector<double>(ns, 0));
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) {
      const int s = r.cell_subpref[static_cast<std::size_t>(y) * g.nx + x];
      cells[s] += 1;
      bool l = false, a = false, n = false, pr = false, in = false;
      for (std::size_t t = 0; t < txs.size(); ++t) {
        const bool hit = field_strength(g, txs[t], {double(x), double(y)}, p) >= p.threshold;
        if (!hit) continue;
        per_tx[t][s] += 1;
        switch (txs[t].radio_class) {
          case RadioClass::community:
            a = true;
            l = l || txs[t].home_prefecture == r.subpref_prefecture[s];
            break;
          case RadioClass::national: n = true; break;
          case RadioClass::private_station: pr = true; break;
          case RadioClass::international: in = true; break;
        }
      }
      loc[s] += l;
      any[s] += a;
      nat[s] += n;
      pri[s] += pr;
      intl[s] += in;
    }
  std::vector<CoverageShares> out(ns);
  for (int s = 0; s < ns; ++s) {
    out[s].local_community = loc[s] / cells[s];
    out[s].any_community = any[s] / cells[s];
    out[s].national = nat[s] / cells[s];
    out[s].private_station = pri[s] / cells[s];
    out[s].international = intl[s] / cells[s];
    for (std::size_t t = 0; t < txs.size(); ++t)
      if (txs[t].radio_class == RadioClass::community && txs[t].language == lang[s])
        out[s].ethnic_match = std::max(out[s].ethnic_match, per_tx[t][s] / cells[s]);
  }
  return out;
}
}  // namespace

TEST_CASE("synthetic terrain") {
  const auto f = synth_terrain(7, 64, 64, 500, 0.0);
  for (double h : f.heights) CHECK(h == f.heights.front());
  const auto a = synth_terrain(7, 64, 64, 500, 1.0);
  const auto b = synth_terrain(7, 64, 64, 500, 1.0);
  CHECK(a.heights == b.heights);
  CHECK(variance(synth_terrain(7, 64, 64, 500, 2.0)) > variance(synth_terrain(7, 64, 64, 500, 0.5)));
  CHECK_THROWS_AS(synth_terrain(7, 1, 64, 500, 1.0), ParameterError);
  CHECK_THROWS_AS(synth_terrain(7, 64, 64, 500, -1.0), ParameterError);
}

TEST_CASE("free-space field law") {
  PropagationParams p;
  p.mode = PropagationMode::free_space;
  const auto g = flat(100, 10, 100.0);
  const auto t = tx_at(0, 5, 1.0);
  const double e10 = field_strength(g, t, {10, 5}, p);
  const double e20 = field_strength(g, t, {20, 5}, p);
  CHECK(e10 - e20 == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(field_strength(g, t, {10, 5}, p) == doctest::Approx(106.9));  // 1 km, 1 kW
  // clamp: the transmitter cell is evaluated one cell away
  CHECK(field_strength(g, t, {0, 5}, p) == field_strength(g, t, {1, 5}, p));
  double prev = std::numeric_limits<double>::infinity();
  for (int x = 1; x < 100; ++x) {
    const double e = field_strength(g, t, {double(x), 5}, p);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("knife-edge behavior") {
  PropagationParams ke;
  PropagationParams fs;
  fs.mode = PropagationMode::free_space;
  const auto g = flat(60, 20, 200.0);
  const auto t = tx_at(2, 10, 1.0);
  for (int x = 3; x < 60; x += 7) CHECK(field_strength(g, t, {double(x), 10}, ke) == field_strength(g, t, {double(x), 10}, fs));

  // a ridge across row 10 only, between x = 20 and x = 22
  auto ridge = g;
  for (int x = 20; x <= 22; ++x) ridge.heights[static_cast<std::size_t>(10) * ridge.nx + x] = 300.0;
  const double behind = field_strength(ridge, t, {40, 10}, ke);
  const double clear_same_distance = field_strength(g, t, {40, 10}, ke);
  CHECK(behind < clear_same_distance);

  for (double v = -3.0; v <= 5.0; v += 0.01) CHECK(knife_edge_loss(v) >= 0.0);
  CHECK(knife_edge_loss(0.0) == doctest::Approx(6.9 + 20 * std::log10(std::sqrt(0.01 + 1) - 0.1)));
}

TEST_CASE("coverage share contracts") {
  const auto g = flat(41, 41, 100.0);
  RegionSet one;
  one.nx = 41;
  one.ny = 41;
  one.cell_subpref.assign(41 * 41, 0);
  one.subpref_prefecture = {0};
  one.n_prefectures = 1;
  PropagationParams p;
  p.mode = PropagationMode::free_space;

  CHECK(coverage_share(g, tx_at(20, 20, 1e-12), one, p)[0] == 0.0);
  auto all = p;
  all.threshold = -std::numeric_limits<double>::infinity();
  CHECK(coverage_share(g, tx_at(20, 20, 1e-12), one, all)[0] == 1.0);

  // disc: E >= 43 within d* km = 10^((106.9 + 10 log10 P - 43) / 20)
  const double kw = 1e-6;
  const double radius_cells = std::pow(10.0, (106.9 + 10 * std::log10(kw) - 43.0) / 20.0) * 1000.0 / 100.0;
  int inside = 0;
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x) inside += std::hypot(x - 20.0, y - 20.0) <= radius_cells ? 1 : 0;
  const double share = coverage_share(g, tx_at(20, 20, kw), one, p)[0];
  CHECK(share == doctest::Approx(inside / (41.0 * 41.0)).epsilon(1e-12));
  const double disc = M_PI * radius_cells * radius_cells / (41.0 * 41.0);
  const double ring = 2 * M_PI * radius_cells / (41.0 * 41.0);  // one boundary layer
  CHECK(std::abs(share - disc) <= ring);

  RegionSet holes = one;
  holes.subpref_prefecture = {0, 0};
  CHECK_THROWS_AS(coverage_share(g, tx_at(20, 20, kw), holes, p), ParameterError);
}

TEST_CASE("aggregate coverage: local versus neighbor station") {
  const auto g = flat(20, 10, 100.0);
  const auto regions = strips(20, 10, 5);  // 4 sub-prefectures, prefectures {0,0,1,1}
  PropagationParams p;
  std::vector<Transmitter> txs{tx_at(2, 5, 1.0, RadioClass::community, 1, "A")};  // strong, sits in prefecture 0
  const std::vector<std::string> lang(4, "A");
  const auto c = aggregate_coverage(g, txs, regions, p, lang);
  CHECK(c[0].local_community == 0.0);
  CHECK(c[0].any_community == 1.0);
  CHECK(c[2].local_community == 1.0);
  CHECK(c[2].any_community == 1.0);
  CHECK(c[0].ethnic_match == 1.0);
  CHECK(std::isnan(c[0].dist_national_km));
  CHECK(c[0].dist_community_km == doctest::Approx(0.05).epsilon(1e-12));  // centroid (2, 4.5)

  const auto none = aggregate_coverage(g, {}, regions, p, lang);
  for (const auto& s : none) CHECK(s.any_community == 0.0);
}

TEST_CASE("property: aggregate coverage equals brute-force cell enumeration") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = 24 + static_cast<int>(rng.below(10)), ny = 18 + static_cast<int>(rng.below(8));
    const auto g = synth_terrain(trial, nx, ny, 250.0, rng.uniform(0.0, 3.0), 60.0);
    const auto regions = strips(nx, ny, 4);
    const char* langs[] = {"A", "B"};
    std::vector<Transmitter> txs;
    for (int t = 0; t < 6; ++t) {
      auto tx = tx_at(rng.uniform(0, nx - 1), rng.uniform(0, ny - 1), rng.uniform(1e-5, 5e-4),
                      static_cast<RadioClass>(rng.below(4)), static_cast<int>(rng.below(regions.n_prefectures)),
                      langs[rng.below(2)]);
      tx.mast_height = rng.uniform(5, 60);
      txs.push_back(tx);
    }
    std::vector<std::string> lang;
    for (int s = 0; s < regions.n_subpref(); ++s) lang.push_back(langs[s % 2]);
    PropagationParams p;
    p.threshold = 40.0;
    const auto fast = aggregate_coverage(g, txs, regions, p, lang, 2);
    const auto slow = brute_force(g, txs, regions, p, lang);
    for (int s = 0; s < regions.n_subpref(); ++s) {
      CHECK(fast[s].local_community == slow[s].local_community);
      CHECK(fast[s].any_community == slow[s].any_community);
      CHECK(fast[s].national == slow[s].national);
      CHECK(fast[s].private_station == slow[s].private_station);
      CHECK(fast[s].international == slow[s].international);
      CHECK(fast[s].ethnic_match == slow[s].ethnic_match);
      CHECK(fast[s].local_community <= fast[s].any_community);
    }
    // raising the threshold never raises coverage
    auto q = p;
    q.threshold = 46.0;
    const auto tight = aggregate_coverage(g, txs, regions, q, lang);
    for (int s = 0; s < regions.n_subpref(); ++s) {
      CHECK(tight[s].any_community <= fast[s].any_community);
      CHECK(tight[s].national <= fast[s].national);
    }
    CHECK(aggregate_coverage(g, txs, regions, p, lang, 1)[0].any_community == fast[0].any_community);
  }
}

TEST_CASE("csv formats round trip") {
  const auto g = synth_terrain(3, 5, 4, 90.0, 1.0);
  std::stringstream gs;
  write_grid_csv(g, gs);
  const auto g2 = read_grid_csv(gs);
  CHECK(g2.heights == g.heights);
  CHECK(g2.cell_size == 90.0);

  std::vector<Transmitter> txs{tx_at(1.5, 2.25, 0.3, RadioClass::private_station, 2, "Pular")};
  std::stringstream ts;
  write_transmitters_csv(txs, ts);
  const auto back = read_transmitters_csv(ts);
  REQUIRE(back.size() == 1);
  CHECK(back[0].position.x == 1.5);
  CHECK(back[0].radio_class == RadioClass::private_station);
  CHECK(back[0].language == "Pular");

  std::stringstream bad("id,x\n");
  CHECK_THROWS_AS(read_transmitters_csv(bad), ParameterError);
  Transmitter outside = tx_at(10, 10, 1.0);
  CHECK_THROWS_AS(outside.validate(g), ParameterError);
}
