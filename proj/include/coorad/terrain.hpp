#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace coorad::terrain {

/// Continuous grid coordinates. Cell (i, j) has its center at (i, j).
struct GridPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Rectangular raster of terrain heights (meters), row-major: index = y * nx + x.
struct ElevationGrid {
  int nx = 0;
  int ny = 0;
  double cell_size = 1.0;  // meters per cell
  std::vector<double> heights;

  double at(int x, int y) const { return heights[static_cast<std::size_t>(y) * nx + x]; }
  /// Bilinear interpolation, clamped to the grid edge.
  double sample(GridPoint p) const;
  bool contains(GridPoint p) const;
  std::size_t size() const { return heights.size(); }
  /// Throws ParameterError if the invariants (nx, ny >= 2, cell_size > 0,
  /// finite heights of the right count) do not hold.
  void validate() const;
};

enum class RadioClass { community, national, private_station, international };

const char* to_string(RadioClass c);
RadioClass radio_class_from_string(const std::string& s);

struct Transmitter {
  std::string id;
  GridPoint position;
  double mast_height = 30.0;  // meters above ground
  double power_kw = 1.0;      // effective radiated power
  RadioClass radio_class = RadioClass::community;
  int home_prefecture = 0;
  std::string language;

  void validate(const ElevationGrid& grid) const;
};

enum class PropagationMode { free_space, knife_edge };

struct PropagationParams {
  PropagationMode mode = PropagationMode::knife_edge;
  /// Free-space field at 1 km for 1 kW ERP (dBuV/m). A broadcast convention.
  double reference_field = 106.9;
  /// Wavelength used in the Fresnel-Kirchhoff diffraction parameter (m).
  double wavelength = 3.0;
  /// Minimum field strength counted as coverage (dBuV/m).
  double threshold = 43.0;
  /// Receiver antenna height above ground (m).
  double receiver_height = 10.0;

  void validate() const;
};

/// Field strength model seam; ItmLite is the only implementation shipped.
class PropagationModel {
 public:
  virtual ~PropagationModel() = default;
  /// Field strength in dBuV/m at the center of `cell`.
  virtual double field_strength(const ElevationGrid& grid, const Transmitter& tx,
                                GridPoint cell) const = 0;
  virtual double threshold() const = 0;
  /// Upper bound on the field at the given distance, used to skip cells that
  /// cannot reach the threshold. Must never be below field_strength().
  virtual double field_bound(const Transmitter& tx, double distance_m) const = 0;
};

/// Free space plus, optionally, loss from the single worst knife edge on the
/// direct path. A path counts as obstructed only where terrain rises above
/// the straight ray between the antennas.
class ItmLite final : public PropagationModel {
 public:
  explicit ItmLite(PropagationParams params);
  double field_strength(const ElevationGrid& grid, const Transmitter& tx,
                        GridPoint cell) const override;
  double threshold() const override { return params_.threshold; }
  double field_bound(const Transmitter& tx, double distance_m) const override;
  const PropagationParams& params() const { return params_; }

  /// Largest Fresnel parameter over the obstructing profile points, or
  /// -infinity if the ray is clear.
  double worst_fresnel_parameter(const ElevationGrid& grid, const Transmitter& tx,
                                 GridPoint cell) const;

 private:
  PropagationParams params_;
};

double free_space_field(double reference_field, double power_kw, double distance_m);
/// Single knife-edge diffraction loss J(v) in dB (ITU-R P.526 approximation),
/// zero for v <= -0.78.
double knife_edge_loss(double v);

/// Ruggedness 0 gives a flat grid at height 0. Otherwise fractal value noise
/// (octave lattices with halving amplitude), standardized to zero mean and
/// unit variance, scaled by ruggedness * height_scale and shifted so the
/// lowest cell sits at 0. Height variance is therefore proportional to
/// ruggedness squared for a fixed seed.
ElevationGrid synth_terrain(std::uint64_t seed, int nx, int ny, double cell_size, double ruggedness,
                            double height_scale = 150.0);

double field_strength(const ElevationGrid& grid, const Transmitter& tx, GridPoint cell,
                      const PropagationParams& params);

/// Rasterized partition of the grid into sub-prefectures (decided by cell
/// center) with prefecture membership.
struct RegionSet {
  int nx = 0;
  int ny = 0;
  std::vector<int> cell_subpref;       // per cell, in [0, n_subpref)
  std::vector<int> subpref_prefecture; // per sub-prefecture, in [0, n_prefectures)
  int n_prefectures = 0;

  int n_subpref() const { return static_cast<int>(subpref_prefecture.size()); }
  /// Throws ParameterError unless every cell belongs to exactly one existing
  /// sub-prefecture, no sub-prefecture is empty, and prefectures are in range.
  void validate() const;
  std::vector<int> cell_counts() const;
  std::vector<GridPoint> centroids() const;
};

/// Per-cell coverage flags of one transmitter (field >= threshold).
std::vector<char> covered_cells(const ElevationGrid& grid, const Transmitter& tx,
                                const PropagationModel& model);

/// Share of each sub-prefecture's cells covered by one transmitter.
std::vector<double> coverage_share(const ElevationGrid& grid, const Transmitter& tx,
                                   const RegionSet& regions, const PropagationParams& params);

struct CoverageShares {
  double local_community = 0.0;
  double any_community = 0.0;
  double national = 0.0;
  double private_station = 0.0;
  double international = 0.0;
  double ethnic_match = 0.0;
  // km from the sub-prefecture centroid; NaN when the class has no transmitter
  double dist_community_km = 0.0;
  double dist_national_km = 0.0;
  double dist_private_km = 0.0;
  double dist_international_km = 0.0;
};

/// Class-level union coverage for every sub-prefecture. Local community
/// coverage uses only community transmitters whose home prefecture is the
/// sub-prefecture's prefecture; the ethnic-match share is the largest single
/// share among community transmitters broadcasting in the sub-prefecture's
/// majority language.
std::vector<CoverageShares> aggregate_coverage(const ElevationGrid& grid,
                                               const std::vector<Transmitter>& txs,
                                               const RegionSet& regions,
                                               const PropagationModel& model,
                                               const std::vector<std::string>& majority_language,
                                               unsigned threads = 1);

std::vector<CoverageShares> aggregate_coverage(const ElevationGrid& grid,
                                               const std::vector<Transmitter>& txs,
                                               const RegionSet& regions,
                                               const PropagationParams& params,
                                               const std::vector<std::string>& majority_language,
                                               unsigned threads = 1);

// CSV formats.
void write_transmitters_csv(const std::vector<Transmitter>& txs, std::ostream& out);
std::vector<Transmitter> read_transmitters_csv(std::istream& in);
void write_grid_csv(const ElevationGrid& grid, std::ostream& out);
ElevationGrid read_grid_csv(std::istream& in);
void write_coverage_csv(const std::vector<CoverageShares>& shares, const RegionSet& regions,
                        std::ostream& out);

}  // namespace coorad::terrain
