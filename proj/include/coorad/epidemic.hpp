#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coorad/game.hpp"
#include "coorad/table.hpp"
#include "coorad/terrain.hpp"

namespace coorad::epidemic {

struct RegionParams {
  int n_prefectures = 34;
  int n_subprefectures = 341;
  int n_regions = 8;   // administrative level above prefectures
  int n_languages = 6;
  double mean_population = 33000.0;
  double population_log_sd = 0.5;
  /// Probability that a prefecture's majority language is its region's.
  double pref_follows_region = 0.7;
  /// Probability that a sub-prefecture's majority language is its prefecture's.
  double subpref_follows_pref = 0.85;
  /// Range of the majority-language share inside a sub-prefecture.
  double majority_share_min = 0.78;
  double majority_share_max = 0.96;
  /// Fixed epicenter sub-prefecture, or -1 to draw one.
  int epicenter = -1;

  void validate() const;
};

struct SubPrefecture {
  int id = 0;
  int prefecture_id = 0;
  int region_id = 0;
  double population = 0.0;
  double area_km2 = 0.0;
  terrain::GridPoint centroid;
  double distance_to_epicenter_km = 0.0;
  std::vector<double> language_shares;  // indexed by language, sums to 1
  int majority_language = 0;
  terrain::CoverageShares coverage;
  /// Majority language equals the local community station's language; unset
  /// when the prefecture has no community transmitter.
  std::optional<bool> lang_match_local;
};

struct RegionSystem {
  terrain::RegionSet regions;
  std::vector<SubPrefecture> subprefs;
  std::vector<int> prefecture_region;
  int n_regions = 1;
  std::vector<std::string> languages;
  int epicenter = 0;

  std::vector<std::string> majority_language_names() const;
  /// Population-weighted language shares of each prefecture / region / the country.
  std::vector<std::vector<double>> prefecture_language_shares() const;
  std::vector<std::vector<double>> region_language_shares() const;
  std::vector<double> country_language_shares() const;
  /// Majority language of each prefecture (population weighted).
  std::vector<int> prefecture_majority_language() const;
};

/// Seeded Voronoi partition of the grid into sub-prefectures (distinct seed
/// cells, so no footprint is empty), sub-prefectures grouped into prefectures
/// and prefectures into regions by nearest center. Languages follow the
/// hierarchy: each region has a dominant language, prefectures and
/// sub-prefectures inherit their parent's majority with the configured
/// probabilities, and minority shares are spread over the other languages.
RegionSystem build_regions(std::uint64_t seed, const RegionParams& params,
                           const terrain::ElevationGrid& grid);

struct RosterParams {
  /// Fraction of prefectures hosting a community station.
  double community_prefecture_share = 1.0;
  double community_power_kw = 4.5e-4;
  double community_mast_m = 30.0;
  int n_national = 12;
  double national_power_kw = 2.0e-3;
  int n_private = 20;
  double private_power_kw = 4.0e-4;
  int n_international = 4;
  double international_power_kw = 8.0e-4;
  double mast_m = 60.0;

  void validate() const;
};

/// Synthetic roster: one community station at the most populous
/// sub-prefecture of each selected prefecture, broadcasting in the
/// prefecture's majority language; other classes at random sub-prefecture
/// centroids.
std::vector<terrain::Transmitter> synth_transmitters(std::uint64_t seed, const RegionSystem& rs,
                                                     const RosterParams& params);

/// Stores coverage on every sub-prefecture and sets lang_match_local.
void attach_coverage(RegionSystem& rs, const std::vector<terrain::CoverageShares>& coverage,
                     const std::vector<terrain::Transmitter>& txs);

struct CampaignTimeline {
  int official_launch = 5;      // tau = 0
  int effective_adoption = 8;
  int horizon = 29;             // months

  void validate() const;
};

enum class EffectKind {
  /// beta1_path is the effect on the log outcome at each event time; the
  /// recursion injects innovations delta_tau - rho * delta_{tau-1}.
  reduced_form,
  /// beta1_path enters the recursion directly as the innovation.
  innovation,
};

enum class OutcomeTransform {
  per_capita_offset,  // log(cases per 100k + log_offset)
  count_plus_one,     // log(cases + 1)
};

enum class TreatmentPathway {
  linear,      // coverage enters as beta1 * P
  structural,  // coverage enters through the equilibrium behavior b(P)
};

struct EpidemicConfig {
  double rho = 0.9;
  double beta0 = 0.45;
  /// Per-percentage-point effect by event time tau = 0, 1, ...; later
  /// event times are zero.
  std::vector<double> beta1_path;
  EffectKind effect_kind = EffectKind::reduced_form;
  /// Loadings on X_s = (distance to epicenter in 100 km, centered log density).
  std::vector<double> beta2 = {-0.02, 0.0};
  double noise_sd = 0.2;
  double log_offset = 0.01;
  double per_capita_base = 100000.0;
  double seed_cases = 50.0;
  /// Initial log incidence falls by this much per 100 km from the epicenter.
  double initial_decay_per_100km = 0.3;
  /// Common Gaussian bump added to the baseline transmission (epidemic wave).
  double wave_amplitude = 0.2;
  double wave_peak = 11.0;
  double wave_width = 3.0;
  OutcomeTransform outcome_transform = OutcomeTransform::per_capita_offset;

  TreatmentPathway pathway = TreatmentPathway::linear;
  game::GamePrimitives game;
  double theta = 1.0;
  double theta_pre = 0.0;
  std::vector<double> public_signal_bias;  // y_k = theta + bias_k

  void validate() const;
  /// Effect on the log outcome per unit coverage share at event time tau.
  double reduced_form_effect(int tau) const;
  /// Innovation per unit coverage share injected at event time tau.
  double innovation(int tau) const;
};

/// Default per-pp event-time profile: zero before tau = 7, -0.013 .. -0.018
/// over tau = 7..12, tapering to zero by tau = 15.
std::vector<double> default_effect_path();

struct PanelObservation {
  int subpref_id = 0;
  int pref_id = 0;
  int month = 0;
  double cases = 0.0;
  double population = 0.0;
  double log_outcome = 0.0;
  double latent_log = 0.0;  // log incidence per 100k before rounding
  double cov_local = 0.0;
  double cov_comm = 0.0;
  double cov_national = 0.0;
  double cov_private = 0.0;
  double cov_ethnic = 0.0;
  double dist_epicenter_km = 0.0;
  double dist_tx_comm_km = 0.0;
  double dist_tx_nat_km = 0.0;
  int lang_match = 0;
  int post_official = 0;
  int post_effective = 0;
};

struct Panel {
  CampaignTimeline timeline;
  std::vector<PanelObservation> rows;  // ordered by sub-prefecture, then month
};

/// Latent log incidence per 100k follows
///   L[s,t] = rho L[s,t-1] + beta0 + wave(t) + innovation * 100 * P[s] * 1[t >= launch]
///            + beta2 . X[s] + u[s,t],   u ~ N(0, noise_sd),
/// starting at L[s,0] = log(seed_cases per 100k at the epicenter) minus the
/// distance decay. Cases are round(exp(L) * population / 100k), floored at 0.
/// Each sub-prefecture draws its shocks from its own derived seed.
Panel simulate_panel(const RegionSystem& rs, const CampaignTimeline& timeline,
                     const EpidemicConfig& config, std::uint64_t seed);

double outcome_from_cases(double cases, double population, const EpidemicConfig& config);

/// Columns in the published CSV order.
const std::vector<std::string>& panel_columns();
Table panel_table(const Panel& panel);
void write_panel_csv(const Panel& panel, std::ostream& out);

struct SurveyConfig {
  int n_respondents = 2466;
  // media exposure: logistic(a0 + a1 * cov_local + a_h * h)
  double a0 = -1.0;
  double a1 = 3.0;
  double a_h = 1.0;
  // other-source exposure among those not reached by media
  double o0 = -0.3;
  double o_h = 0.0;
  // belief = b0 + b1 media + b_other other + b2 peer + b2_quad peer^2 + gamma.demo + belief_h h + e
  double b0 = 0.0;
  double b1 = 0.5;
  double b_other = 0.0;
  double b2 = 0.0;
  double b2_quad = 0.0;
  double belief_h = 0.8;
  double belief_noise = 1.0;
  // chlorine = c0 + c1 any_info + c_media media + c_h h + e
  double c0 = 0.0;
  double c1 = 0.3;
  double c_media = 0.0;
  double c_h = 0.5;
  double chlorine_noise = 1.0;
  /// Loadings on (age/10, education/4, wealth, gender, urban).
  std::vector<double> gamma = {0.02, 0.05, 0.1, 0.0, 0.1};

  void validate() const;
};

struct MicroRespondent {
  int id = 0;
  int subpref_id = 0;
  int pref_id = 0;
  int heard_on_media = 0;
  int heard_other_source = 0;
  double peer_share_media = 0.0;  // leave-one-out within the sub-prefecture
  double belief_neighbors_seek_treatment = 0.0;
  double chlorine_use = 0.0;
  double cov_local = 0.0;
  double cov_comm = 0.0;
  double age = 0.0;
  double education = 0.0;
  double wealth = 0.0;
  int gender = 0;
  int urban = 0;
};

/// Respondents are spread as evenly as possible over sub-prefectures; an
/// unobserved health-seeking trait raises both media exposure and the
/// outcomes, which is what makes naive OLS biased.
std::vector<MicroRespondent> simulate_survey(const RegionSystem& rs, const SurveyConfig& config,
                                             std::uint64_t seed);

/// Leave-one-out mean of `values` within each group.
std::vector<double> leave_one_out_mean(const std::vector<double>& values, const std::vector<int>& group);

const std::vector<std::string>& survey_columns();
Table survey_table(const std::vector<MicroRespondent>& survey);
void write_survey_csv(const std::vector<MicroRespondent>& survey, std::ostream& out);

}  // namespace coorad::epidemic
