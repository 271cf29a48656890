#include "coorad/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "coorad/error.hpp"
#include "coorad/parallel.hpp"
#include "coorad/rng.hpp"
#include "coorad/table.hpp"

namespace coorad::terrain {

namespace {
constexpr const char* kModule = "terrain-propagation";
}

double ElevationGrid::sample(GridPoint p) const {
  const double x = std::clamp(p.x, 0.0, static_cast<double>(nx - 1));
  const double y = std::clamp(p.y, 0.0, static_cast<double>(ny - 1));
  const int x0 = std::min(static_cast<int>(x), nx - 2);
  const int y0 = std::min(static_cast<int>(y), ny - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double h00 = at(x0, y0), h10 = at(x0 + 1, y0);
  const double h01 = at(x0, y0 + 1), h11 = at(x0 + 1, y0 + 1);
  return (1 - fy) * ((1 - fx) * h00 + fx * h10) + fy * ((1 - fx) * h01 + fx * h11);
}

bool ElevationGrid::contains(GridPoint p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= nx - 1 && p.y <= ny - 1;
}

void ElevationGrid::validate() const {
  if (nx < 2 || ny < 2) throw ParameterError(kModule, fmt::format("grid must be at least 2x2, got {}x{}", nx, ny));
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw ParameterError(kModule, "cell_size must be positive");
  if (heights.size() != static_cast<std::size_t>(nx) * ny)
    throw ParameterError(kModule, fmt::format("grid has {} heights, expected {}", heights.size(),
                                              static_cast<std::size_t>(nx) * ny));
  for (double h : heights)
    if (!std::isfinite(h)) throw ParameterError(kModule, "grid heights must be finite");
}

const char* to_string(RadioClass c) {
  switch (c) {
    case RadioClass::community: return "community";
    case RadioClass::national: return "national";
    case RadioClass::private_station: return "private";
    case RadioClass::international: return "international";
  }
  return "?";
}

RadioClass radio_class_from_string(const std::string& s) {
  if (s == "community") return RadioClass::community;
  if (s == "national") return RadioClass::national;
  if (s == "private") return RadioClass::private_station;
  if (s == "international") return RadioClass::international;
  throw ParameterError(kModule, "unknown radio class '" + s + "'");
}

void Transmitter::validate(const ElevationGrid& grid) const {
  if (!(mast_height >= 0.0)) throw ParameterError(kModule, "transmitter " + id + ": mast_height must be >= 0");
  if (!(power_kw > 0.0) || !std::isfinite(power_kw))
    throw ParameterError(kModule, "transmitter " + id + ": power must be > 0");
  if (!grid.contains(position))
    throw ParameterError(kModule, fmt::format("transmitter {}: position ({}, {}) outside grid", id,
                                              position.x, position.y));
  if (home_prefecture < 0) throw ParameterError(kModule, "transmitter " + id + ": missing home prefecture");
}

void PropagationParams::validate() const {
  if (std::isnan(threshold) || threshold == std::numeric_limits<double>::infinity())
    throw ParameterError(kModule, "threshold must be finite or -inf");
  if (!(wavelength > 0.0)) throw ParameterError(kModule, "wavelength must be > 0");
  if (!std::isfinite(reference_field)) throw ParameterError(kModule, "reference_field must be finite");
  if (!(receiver_height >= 0.0)) throw ParameterError(kModule, "receiver_height must be >= 0");
}

double free_space_field(double reference_field, double power_kw, double distance_m) {
  return reference_field + 10.0 * std::log10(power_kw) - 20.0 * std::log10(distance_m / 1000.0);
}

double knife_edge_loss(double v) {
  if (v <= -0.78) return 0.0;
  const double a = v - 0.1;
  return std::max(0.0, 6.9 + 20.0 * std::log10(std::sqrt(a * a + 1.0) + a));
}

ItmLite::ItmLite(PropagationParams params) : params_(params) { params_.validate(); }

namespace {
// Transmitter on the cell itself is evaluated one cell away.
double path_length(const ElevationGrid& grid, const Transmitter& tx, GridPoint cell) {
  const double d = grid.cell_size * std::hypot(cell.x - tx.position.x, cell.y - tx.position.y);
  return std::max(d, grid.cell_size);
}
}  // namespace

double ItmLite::worst_fresnel_parameter(const ElevationGrid& grid, const Transmitter& tx,
                                        GridPoint cell) const {
  const double dx = cell.x - tx.position.x;
  const double dy = cell.y - tx.position.y;
  const double span_cells = std::hypot(dx, dy);
  const double d = grid.cell_size * span_cells;
  double worst = -std::numeric_limits<double>::infinity();
  if (span_cells <= 1.0) return worst;
  const double h_tx = grid.sample(tx.position) + tx.mast_height;
  const double h_rx = grid.sample(cell) + params_.receiver_height;
  // two profile samples per cell traversed, endpoints excluded
  const int steps = static_cast<int>(std::ceil(2.0 * span_cells));
  for (int k = 1; k < steps; ++k) {
    const double f = static_cast<double>(k) / steps;
    const double ground = grid.sample({tx.position.x + f * dx, tx.position.y + f * dy});
    const double clearance = ground - (h_tx + f * (h_rx - h_tx));
    if (clearance <= 0.0) continue;
    const double d1 = f * d;
    const double d2 = (1.0 - f) * d;
    const double v = clearance * std::sqrt(2.0 * d / (params_.wavelength * d1 * d2));
    worst = std::max(worst, v);
  }
  return worst;
}

double ItmLite::field_strength(const ElevationGrid& grid, const Transmitter& tx, GridPoint cell) const {
  const double e = free_space_field(params_.reference_field, tx.power_kw, path_length(grid, tx, cell));
  if (params_.mode == PropagationMode::free_space) return e;
  const double v = worst_fresnel_parameter(grid, tx, cell);
  if (!std::isfinite(v)) return e;
  return e - knife_edge_loss(v);
}

double ItmLite::field_bound(const Transmitter& tx, double distance_m) const {
  return free_space_field(params_.reference_field, tx.power_kw, distance_m);
}

double field_strength(const ElevationGrid& grid, const Transmitter& tx, GridPoint cell,
                      const PropagationParams& params) {
  return ItmLite(params).field_strength(grid, tx, cell);
}

ElevationGrid synth_terrain(std::uint64_t seed, int nx, int ny, double cell_size, double ruggedness,
                            double height_scale) {
  if (nx < 2 || ny < 2) throw ParameterError(kModule, fmt::format("grid must be at least 2x2, got {}x{}", nx, ny));
  if (!(cell_size > 0.0)) throw ParameterError(kModule, "cell_size must be positive");
  if (!(ruggedness >= 0.0) || !std::isfinite(ruggedness))
    throw ParameterError(kModule, "ruggedness must be a finite nonnegative number");
  ElevationGrid grid{nx, ny, cell_size, std::vector<double>(static_cast<std::size_t>(nx) * ny, 0.0)};
  if (ruggedness == 0.0) return grid;

  Rng rng(seed);
  const int extent = std::max(nx, ny);
  double amplitude = 1.0;
  for (int spacing = std::max(2, extent / 2); spacing >= 2; spacing /= 2, amplitude *= 0.5) {
    const int lx = (nx - 1) / spacing + 2;
    const int ly = (ny - 1) / spacing + 2;
    std::vector<double> lattice(static_cast<std::size_t>(lx) * ly);
    for (auto& v : lattice) v = rng.normal();
    for (int y = 0; y < ny; ++y) {
      const int gy = y / spacing;
      double fy = static_cast<double>(y % spacing) / spacing;
      fy = fy * fy * (3.0 - 2.0 * fy);
      for (int x = 0; x < nx; ++x) {
        const int gx = x / spacing;
        double fx = static_cast<double>(x % spacing) / spacing;
        fx = fx * fx * (3.0 - 2.0 * fx);
        auto l = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * lx + i]; };
        const double v = (1 - fy) * ((1 - fx) * l(gx, gy) + fx * l(gx + 1, gy)) +
                         fy * ((1 - fx) * l(gx, gy + 1) + fx * l(gx + 1, gy + 1));
        grid.heights[static_cast<std::size_t>(y) * nx + x] += amplitude * v;
      }
    }
  }
  // small-scale roughness so tiny grids are never accidentally flat
  for (auto& h : grid.heights) h += amplitude * rng.normal();

  double mean = 0.0;
  for (double h : grid.heights) mean += h;
  mean /= static_cast<double>(grid.heights.size());
  double var = 0.0;
  for (double h : grid.heights) var += (h - mean) * (h - mean);
  const double sd = std::sqrt(var / static_cast<double>(grid.heights.size()));
  const double scale = ruggedness * height_scale / sd;
  double lowest = std::numeric_limits<double>::infinity();
  for (auto& h : grid.heights) {
    h = (h - mean) * scale;
    lowest = std::min(lowest, h);
  }
  for (auto& h : grid.heights) h -= lowest;
  return grid;
}

void RegionSet::validate() const {
  if (nx < 1 || ny < 1 || cell_subpref.size() != static_cast<std::size_t>(nx) * ny)
    throw ParameterError(kModule, "region footprint does not match the grid");
  if (subpref_prefecture.empty()) throw ParameterError(kModule, "region set has no sub-prefectures");
  if (n_prefectures < 1 || n_prefectures > n_subpref())
    throw ParameterError(kModule, "need 1 <= #prefectures <= #sub-prefectures");
  for (int p : subpref_prefecture)
    if (p < 0 || p >= n_prefectures) throw ParameterError(kModule, "prefecture id out of range");
  std::vector<int> counts(subpref_prefecture.size(), 0);
  for (int s : cell_subpref) {
    if (s < 0 || s >= n_subpref()) throw ParameterError(kModule, "cell assigned to unknown sub-prefecture");
    ++counts[s];
  }
  for (std::size_t s = 0; s < counts.size(); ++s)
    if (counts[s] == 0)
      throw ParameterError(kModule, fmt::format("sub-prefecture {} has an empty footprint", s));
}

std::vector<int> RegionSet::cell_counts() const {
  std::vector<int> counts(subpref_prefecture.size(), 0);
  for (int s : cell_subpref) ++counts[s];
  return counts;
}

std::vector<GridPoint> RegionSet::centroids() const {
  std::vector<GridPoint> c(subpref_prefecture.size());
  std::vector<int> counts(subpref_prefecture.size(), 0);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const int s = cell_subpref[static_cast<std::size_t>(y) * nx + x];
      c[s].x += x;
      c[s].y += y;
      ++counts[s];
    }
  for (std::size_t s = 0; s < c.size(); ++s)
    if (counts[s] > 0) {
      c[s].x /= counts[s];
      c[s].y /= counts[s];
    }
  return c;
}

std::vector<char> covered_cells(const ElevationGrid& grid, const Transmitter& tx,
                                const PropagationModel& model) {
  std::vector<char> covered(grid.size(), 0);
  const double threshold = model.threshold();
  for (int y = 0; y < grid.ny; ++y)
    for (int x = 0; x < grid.nx; ++x) {
      const GridPoint cell{static_cast<double>(x), static_cast<double>(y)};
      const double d = std::max(grid.cell_size, grid.cell_size * std::hypot(x - tx.position.x, y - tx.position.y));
      if (model.field_bound(tx, d) < threshold) continue;
      if (model.field_strength(grid, tx, cell) >= threshold)
        covered[static_cast<std::size_t>(y) * grid.nx + x] = 1;
    }
  return covered;
}

namespace {
std::vector<double> shares_from_cells(const std::vector<char>& covered, const RegionSet& regions,
                                      const std::vector<int>& counts) {
  std::vector<double> hits(counts.size(), 0.0);
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (covered[i]) hits[regions.cell_subpref[i]] += 1.0;
  for (std::size_t s = 0; s < hits.size(); ++s) hits[s] /= counts[s];
  return hits;
}

void check_regions(const ElevationGrid& grid, const RegionSet& regions) {
  regions.validate();
  if (regions.nx != grid.nx || regions.ny != grid.ny)
    throw ParameterError(kModule, "region footprint and grid dimensions differ");
}
}  // namespace

std::vector<double> coverage_share(const ElevationGrid& grid, const Transmitter& tx,
                                   const RegionSet& regions, const PropagationParams& params) {
  grid.validate();
  check_regions(grid, regions);
  tx.validate(grid);
  const ItmLite model(params);
  return shares_from_cells(covered_cells(grid, tx, model), regions, regions.cell_counts());
}

std::vector<CoverageShares> aggregate_coverage(const ElevationGrid& grid,
                                               const std::vector<Transmitter>& txs,
                                               const RegionSet& regions,
                                               const PropagationModel& model,
                                               const std::vector<std::string>& majority_language,
                                               unsigned threads) {
  grid.validate();
  check_regions(grid, regions);
  const int ns = regions.n_subpref();
  if (majority_language.size() != static_cast<std::size_t>(ns))
    throw ParameterError(kModule, "majority language map does not cover every sub-prefecture");
  for (const auto& tx : txs) {
    tx.validate(grid);
    if (tx.home_prefecture >= regions.n_prefectures)
      throw ParameterError(kModule, "transmitter " + tx.id + ": unknown home prefecture");
  }

  std::vector<std::vector<char>> maps(txs.size());
  parallel_for(txs.size(), threads, [&](std::size_t i) { maps[i] = covered_cells(grid, txs[i], model); });

  const auto counts = regions.cell_counts();
  const std::size_t ncell = grid.size();
  std::vector<char> any_comm(ncell, 0), local(ncell, 0), national(ncell, 0), priv(ncell, 0), intl(ncell, 0);
  for (std::size_t t = 0; t < txs.size(); ++t) {
    const auto& tx = txs[t];
    const auto& m = maps[t];
    for (std::size_t c = 0; c < ncell; ++c) {
      if (!m[c]) continue;
      switch (tx.radio_class) {
        case RadioClass::community:
          any_comm[c] = 1;
          if (regions.subpref_prefecture[regions.cell_subpref[c]] == tx.home_prefecture) local[c] = 1;
          break;
        case RadioClass::national: national[c] = 1; break;
        case RadioClass::private_station: priv[c] = 1; break;
        case RadioClass::international: intl[c] = 1; break;
      }
    }
  }

  std::vector<CoverageShares> out(ns);
  const auto s_local = shares_from_cells(local, regions, counts);
  const auto s_any = shares_from_cells(any_comm, regions, counts);
  const auto s_nat = shares_from_cells(national, regions, counts);
  const auto s_priv = shares_from_cells(priv, regions, counts);
  const auto s_intl = shares_from_cells(intl, regions, counts);
  for (int s = 0; s < ns; ++s) {
    out[s].local_community = s_local[s];
    out[s].any_community = s_any[s];
    out[s].national = s_nat[s];
    out[s].private_station = s_priv[s];
    out[s].international = s_intl[s];
  }
  for (std::size_t t = 0; t < txs.size(); ++t) {
    if (txs[t].radio_class != RadioClass::community) continue;
    const auto share = shares_from_cells(maps[t], regions, counts);
    for (int s = 0; s < ns; ++s)
      if (majority_language[s] == txs[t].language)
        out[s].ethnic_match = std::max(out[s].ethnic_match, share[s]);
  }

  const auto centroids = regions.centroids();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < ns; ++s) {
    double best[4] = {nan, nan, nan, nan};
    for (const auto& tx : txs) {
      const double d = grid.cell_size / 1000.0 *
                       std::hypot(centroids[s].x - tx.position.x, centroids[s].y - tx.position.y);
      double& b = best[static_cast<int>(tx.radio_class)];
      if (std::isnan(b) || d < b) b = d;
    }
    out[s].dist_community_km = best[0];
    out[s].dist_national_km = best[1];
    out[s].dist_private_km = best[2];
    out[s].dist_international_km = best[3];
  }
  return out;
}

std::vector<CoverageShares> aggregate_coverage(const ElevationGrid& grid,
                                               const std::vector<Transmitter>& txs,
                                               const RegionSet& regions,
                                               const PropagationParams& params,
                                               const std::vector<std::string>& majority_language,
                                               unsigned threads) {
  const ItmLite model(params);
  return aggregate_coverage(grid, txs, regions, model, majority_language, threads);
}

void write_transmitters_csv(const std::vector<Transmitter>& txs, std::ostream& out) {
  out << "id,x,y,mast_height_m,power_kw,class,home_prefecture,language\n";
  for (const auto& tx : txs)
    out << tx.id << ',' << format_number(tx.position.x) << ',' << format_number(tx.position.y) << ','
        << format_number(tx.mast_height) << ',' << format_number(tx.power_kw) << ','
        << to_string(tx.radio_class) << ',' << tx.home_prefecture << ',' << tx.language << '\n';
}

std::vector<Transmitter> read_transmitters_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError(kModule, "empty transmitter CSV");
  const auto header = split_fields(line);
  const std::vector<std::string> expected{"id", "x", "y", "mast_height_m", "power_kw", "class",
                                          "home_prefecture", "language"};
  if (header != expected)
    throw ParameterError(kModule, "transmitter CSV header must be: id,x,y,mast_height_m,power_kw,class,home_prefecture,language");
  std::vector<Transmitter> txs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != expected.size())
      throw ParameterError(kModule, fmt::format("transmitter CSV line {}: expected 8 fields", lineno));
    try {
      Transmitter tx;
      tx.id = f[0];
      tx.position = {std::stod(f[1]), std::stod(f[2])};
      tx.mast_height = std::stod(f[3]);
      tx.power_kw = std::stod(f[4]);
      tx.radio_class = radio_class_from_string(f[5]);
      tx.home_prefecture = std::stoi(f[6]);
      tx.language = f[7];
      txs.push_back(std::move(tx));
    } catch (const std::logic_error&) {
      throw ParameterError(kModule, fmt::format("transmitter CSV line {}: malformed number", lineno));
    }
  }
  return txs;
}

void write_grid_csv(const ElevationGrid& grid, std::ostream& out) {
  out << "nx,ny,cell_size\n" << grid.nx << ',' << grid.ny << ',' << format_number(grid.cell_size) << '\n';
  for (int y = 0; y < grid.ny; ++y) {
    for (int x = 0; x < grid.nx; ++x) out << (x ? "," : "") << format_number(grid.at(x, y));
    out << '\n';
  }
}

ElevationGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != std::vector<std::string>{"nx", "ny", "cell_size"})
    throw ParameterError(kModule, "grid CSV must start with the header nx,ny,cell_size");
  ElevationGrid grid;
  try {
    std::getline(in, line);
    const auto h = split_fields(line);
    if (h.size() != 3) throw ParameterError(kModule, "grid CSV: malformed size line");
    grid.nx = std::stoi(h[0]);
    grid.ny = std::stoi(h[1]);
    grid.cell_size = std::stod(h[2]);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      for (const auto& f : split_fields(line)) grid.heights.push_back(std::stod(f));
    }
  } catch (const std::logic_error&) {
    throw ParameterError(kModule, "grid CSV: malformed number");
  }
  grid.validate();
  return grid;
}

void write_coverage_csv(const std::vector<CoverageShares>& shares, const RegionSet& regions,
                        std::ostream& out) {
  out << "subpref_id,pref_id,share_local_community,share_any_community,share_national,share_private,"
         "share_international,share_ethnic_match,dist_community_km,dist_national_km,dist_private_km,"
         "dist_international_km\n";
  for (std::size_t s = 0; s < shares.size(); ++s) {
    const auto& c = shares[s];
    out << s << ',' << regions.subpref_prefecture[s];
    for (double v : {c.local_community, c.any_community, c.national, c.private_station, c.international,
                     c.ethnic_match, c.dist_community_km, c.dist_national_km, c.dist_private_km,
                     c.dist_international_km})
      out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace coorad::terrain
