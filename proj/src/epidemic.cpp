#include "coorad/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "coorad/error.hpp"
#include "coorad/rng.hpp"

namespace coorad::epidemic {

namespace {
constexpr const char* kModule = "epidemic-sim";

const std::vector<std::string> kLanguageNames{"Susu",  "Pular", "Maninka", "Kissi", "Kpelle",
                                              "Toma",  "Baga",  "Nalu",    "Landoma", "Coniagui"};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// k distinct values from [0, n), in draw order.
std::vector<int> sample_distinct(Rng& rng, int n, int k) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

double dist2(terrain::GridPoint a, terrain::GridPoint b) {
  return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

std::vector<int> nearest_center(const std::vector<terrain::GridPoint>& points,
                                const std::vector<terrain::GridPoint>& centers) {
  std::vector<int> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = dist2(points[i], centers[c]);
      if (d < best) {
        best = d;
        out[i] = static_cast<int>(c);
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> weighted_shares(const std::vector<SubPrefecture>& subprefs,
                                                 const std::vector<int>& group, int n_groups,
                                                 std::size_t n_lang) {
  std::vector<std::vector<double>> shares(n_groups, std::vector<double>(n_lang, 0.0));
  std::vector<double> pop(n_groups, 0.0);
  for (std::size_t s = 0; s < subprefs.size(); ++s) {
    const int g = group[s];
    pop[g] += subprefs[s].population;
    for (std::size_t l = 0; l < n_lang; ++l) shares[g][l] += subprefs[s].population * subprefs[s].language_shares[l];
  }
  for (int g = 0; g < n_groups; ++g)
    if (pop[g] > 0)
      for (auto& v : shares[g]) v /= pop[g];
  return shares;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}
}  // namespace

void RegionParams::validate() const {
  if (n_prefectures < 1) throw ParameterError(kModule, "need at least one prefecture");
  if (n_prefectures > n_subprefectures)
    throw ParameterError(kModule, fmt::format("{} prefectures exceed {} sub-prefectures", n_prefectures, n_subprefectures));
  if (n_regions < 1 || n_regions > n_prefectures)
    throw ParameterError(kModule, "need 1 <= #regions <= #prefectures");
  if (n_languages < 1 || n_languages > static_cast<int>(kLanguageNames.size()))
    throw ParameterError(kModule, fmt::format("n_languages must be in [1, {}]", kLanguageNames.size()));
  if (!(mean_population > 0.0) || !(population_log_sd >= 0.0))
    throw ParameterError(kModule, "population parameters must be positive");
  for (double p : {pref_follows_region, subpref_follows_pref})
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(kModule, "language inheritance probabilities must lie in [0, 1]");
  if (!(majority_share_min > 0.0 && majority_share_min <= majority_share_max && majority_share_max <= 1.0))
    throw ParameterError(kModule, "majority share range must satisfy 0 < min <= max <= 1");
  if (epicenter >= n_subprefectures) throw ParameterError(kModule, "epicenter id out of range");
}

std::vector<std::string> RegionSystem::majority_language_names() const {
  std::vector<std::string> out;
  out.reserve(subprefs.size());
  for (const auto& s : subprefs) out.push_back(languages[s.majority_language]);
  return out;
}

std::vector<std::vector<double>> RegionSystem::prefecture_language_shares() const {
  std::vector<int> group;
  for (const auto& s : subprefs) group.push_back(s.prefecture_id);
  return weighted_shares(subprefs, group, regions.n_prefectures, languages.size());
}

std::vector<std::vector<double>> RegionSystem::region_language_shares() const {
  std::vector<int> group;
  for (const auto& s : subprefs) group.push_back(s.region_id);
  return weighted_shares(subprefs, group, n_regions, languages.size());
}

std::vector<double> RegionSystem::country_language_shares() const {
  return weighted_shares(subprefs, std::vector<int>(subprefs.size(), 0), 1, languages.size()).front();
}

std::vector<int> RegionSystem::prefecture_majority_language() const {
  std::vector<int> out;
  for (const auto& shares : prefecture_language_shares()) out.push_back(argmax(shares));
  return out;
}

RegionSystem build_regions(std::uint64_t seed, const RegionParams& params, const terrain::ElevationGrid& grid) {
  params.validate();
  grid.validate();
  const int ncell = grid.nx * grid.ny;
  const int ns = params.n_subprefectures;
  if (ns > ncell) throw ParameterError(kModule, "more sub-prefectures than grid cells");
  Rng rng(seed);

  RegionSystem rs;
  rs.regions.nx = grid.nx;
  rs.regions.ny = grid.ny;
  rs.regions.n_prefectures = params.n_prefectures;

  // sub-prefecture footprints: Voronoi cells of distinct seed cells
  std::vector<terrain::GridPoint> seeds;
  for (int c : sample_distinct(rng, ncell, ns))
    seeds.push_back({static_cast<double>(c % grid.nx), static_cast<double>(c / grid.nx)});
  std::vector<terrain::GridPoint> cells(ncell);
  for (int c = 0; c < ncell; ++c) cells[c] = {static_cast<double>(c % grid.nx), static_cast<double>(c / grid.nx)};
  rs.regions.cell_subpref = nearest_center(cells, seeds);
  rs.regions.subpref_prefecture.assign(ns, 0);
  const auto centroids = rs.regions.centroids();

  // prefectures from sub-prefecture centroids, regions from prefecture centers
  const auto pref_centers_idx = sample_distinct(rng, ns, params.n_prefectures);
  std::vector<terrain::GridPoint> pref_centers;
  for (int i : pref_centers_idx) pref_centers.push_back(centroids[i]);
  rs.regions.subpref_prefecture = nearest_center(centroids, pref_centers);
  for (int p = 0; p < params.n_prefectures; ++p) rs.regions.subpref_prefecture[pref_centers_idx[p]] = p;

  const auto region_centers_idx = sample_distinct(rng, params.n_prefectures, params.n_regions);
  std::vector<terrain::GridPoint> region_centers;
  for (int p : region_centers_idx) region_centers.push_back(pref_centers[p]);
  rs.n_regions = params.n_regions;
  rs.prefecture_region = nearest_center(pref_centers, region_centers);
  for (int r = 0; r < params.n_regions; ++r) rs.prefecture_region[region_centers_idx[r]] = r;
  rs.regions.validate();

  // languages: region dominant -> prefecture majority -> sub-prefecture majority
  const int nl = params.n_languages;
  rs.languages.assign(kLanguageNames.begin(), kLanguageNames.begin() + nl);
  const auto perm = sample_distinct(rng, nl, nl);
  std::vector<int> region_lang(params.n_regions);
  for (int r = 0; r < params.n_regions; ++r) region_lang[r] = perm[r % nl];
  auto other_language = [&](int avoid) {
    if (nl == 1) return avoid;
    int l = static_cast<int>(rng.below(static_cast<std::uint64_t>(nl - 1)));
    return l >= avoid ? l + 1 : l;
  };
  std::vector<int> pref_lang(params.n_prefectures);
  for (int p = 0; p < params.n_prefectures; ++p) {
    const int dominant = region_lang[rs.prefecture_region[p]];
    pref_lang[p] = rng.bernoulli(params.pref_follows_region) ? dominant : other_language(dominant);
  }

  const auto counts = rs.regions.cell_counts();
  const double cell_km2 = grid.cell_size * grid.cell_size / 1e6;
  const double sigma = params.population_log_sd;
  rs.subprefs.resize(ns);
  for (int s = 0; s < ns; ++s) {
    auto& sp = rs.subprefs[s];
    sp.id = s;
    sp.prefecture_id = rs.regions.subpref_prefecture[s];
    sp.region_id = rs.prefecture_region[sp.prefecture_id];
    sp.centroid = centroids[s];
    sp.area_km2 = counts[s] * cell_km2;
    sp.population = std::max(500.0, std::round(params.mean_population * std::exp(sigma * rng.normal() - 0.5 * sigma * sigma)));
    const int plang = pref_lang[sp.prefecture_id];
    sp.majority_language = rng.bernoulli(params.subpref_follows_pref) ? plang : other_language(plang);
    sp.language_shares.assign(nl, 0.0);
    if (nl == 1) {
      sp.language_shares[0] = 1.0;
      continue;
    }
    const double major = rng.uniform(params.majority_share_min, params.majority_share_max);
    std::vector<double> w(nl, 0.0);
    double wsum = 0.0;
    for (int l = 0; l < nl; ++l) {
      if (l == sp.majority_language) continue;
      // minorities lean toward the prefecture's language
      w[l] = -std::log(1.0 - rng.uniform()) * (l == plang ? 3.0 : 1.0);
      wsum += w[l];
    }
    // keep the majority strictly largest
    const double rest = 1.0 - major;
    for (int l = 0; l < nl; ++l)
      sp.language_shares[l] = l == sp.majority_language ? major : std::min(rest * w[l] / wsum, 0.999 * major);
    const double total = std::accumulate(sp.language_shares.begin(), sp.language_shares.end(), 0.0);
    for (auto& v : sp.language_shares) v /= total;
  }

  rs.epicenter = params.epicenter >= 0 ? params.epicenter : static_cast<int>(rng.below(static_cast<std::uint64_t>(ns)));
  const double km_per_cell = grid.cell_size / 1000.0;
  for (auto& sp : rs.subprefs)
    sp.distance_to_epicenter_km = km_per_cell * std::sqrt(dist2(sp.centroid, rs.subprefs[rs.epicenter].centroid));
  return rs;
}

void RosterParams::validate() const {
  if (!(community_prefecture_share >= 0.0 && community_prefecture_share <= 1.0))
    throw ParameterError(kModule, "community_prefecture_share must lie in [0, 1]");
  for (double p : {community_power_kw, national_power_kw, private_power_kw, international_power_kw})
    if (!(p > 0.0)) throw ParameterError(kModule, "transmitter powers must be > 0");
  if (n_national < 0 || n_private < 0 || n_international < 0)
    throw ParameterError(kModule, "transmitter counts must be >= 0");
}

std::vector<terrain::Transmitter> synth_transmitters(std::uint64_t seed, const RegionSystem& rs,
                                                     const RosterParams& params) {
  params.validate();
  Rng rng(seed);
  const int np = rs.regions.n_prefectures;
  const int ns = rs.regions.n_subpref();
  std::vector<terrain::Transmitter> txs;

  const auto pref_lang = rs.prefecture_majority_language();
  const int n_comm = static_cast<int>(std::lround(params.community_prefecture_share * np));
  auto hosts = sample_distinct(rng, np, n_comm);
  std::sort(hosts.begin(), hosts.end());
  for (int p : hosts) {
    int capital = -1;
    for (const auto& sp : rs.subprefs)
      if (sp.prefecture_id == p && (capital < 0 || sp.population > rs.subprefs[capital].population)) capital = sp.id;
    txs.push_back({fmt::format("COM{:03d}", p), rs.subprefs[capital].centroid, params.community_mast_m,
                   params.community_power_kw, terrain::RadioClass::community, p, rs.languages[pref_lang[p]]});
  }
  auto scatter = [&](int count, terrain::RadioClass cls, double power, const char* prefix, const std::string& lang) {
    for (int i = 0; i < count; ++i) {
      const auto& sp = rs.subprefs[rng.below(static_cast<std::uint64_t>(ns))];
      txs.push_back({fmt::format("{}{:03d}", prefix, i), sp.centroid, params.mast_m, power, cls,
                     sp.prefecture_id, lang});
    }
  };
  scatter(params.n_national, terrain::RadioClass::national, params.national_power_kw, "NAT", "French");
  scatter(params.n_private, terrain::RadioClass::private_station, params.private_power_kw, "PRV", "French");
  scatter(params.n_international, terrain::RadioClass::international, params.international_power_kw, "INT", "French");
  return txs;
}

void attach_coverage(RegionSystem& rs, const std::vector<terrain::CoverageShares>& coverage,
                     const std::vector<terrain::Transmitter>& txs) {
  if (coverage.size() != rs.subprefs.size())
    throw ParameterError(kModule, "coverage does not match the sub-prefectures");
  for (auto& sp : rs.subprefs) {
    sp.coverage = coverage[sp.id];
    sp.lang_match_local.reset();
    for (const auto& tx : txs) {
      if (tx.radio_class != terrain::RadioClass::community || tx.home_prefecture != sp.prefecture_id) continue;
      const bool match = tx.language == rs.languages[sp.majority_language];
      sp.lang_match_local = sp.lang_match_local.value_or(false) || match;
    }
  }
}

void CampaignTimeline::validate() const {
  if (!(0 <= official_launch && official_launch < effective_adoption && effective_adoption < horizon))
    throw ParameterError(kModule, fmt::format("timeline needs 0 <= launch ({}) < adoption ({}) < horizon ({})",
                                              official_launch, effective_adoption, horizon));
}

void EpidemicConfig::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError(kModule, "rho must lie in [0, 1]");
  if (!(noise_sd >= 0.0)) throw ParameterError(kModule, "noise_sd must be >= 0");
  if (!(log_offset > 0.0)) throw ParameterError(kModule, "log_offset must be > 0");
  if (!(per_capita_base > 0.0)) throw ParameterError(kModule, "per_capita_base must be > 0");
  if (!(seed_cases > 0.0)) throw ParameterError(kModule, "seed_cases must be > 0");
  if (beta2.size() != 2) throw ParameterError(kModule, "beta2 needs two loadings (distance, density)");
  if (!(wave_width > 0.0)) throw ParameterError(kModule, "wave_width must be > 0");
  for (double b : beta1_path)
    if (!std::isfinite(b)) throw ParameterError(kModule, "beta1_path must be finite");
  if (pathway == TreatmentPathway::structural) {
    game.validate();
    if (theta == theta_pre) throw ParameterError(kModule, "structural pathway needs theta != theta_pre");
    if (!public_signal_bias.empty() && public_signal_bias.size() != game.alphas.size())
      throw ParameterError(kModule, "public_signal_bias must match the public precisions");
  }
}

double EpidemicConfig::reduced_form_effect(int tau) const {
  if (tau < 0 || tau >= static_cast<int>(beta1_path.size())) return 0.0;
  return 100.0 * beta1_path[tau];
}

double EpidemicConfig::innovation(int tau) const {
  if (effect_kind == EffectKind::innovation) return reduced_form_effect(tau);
  return reduced_form_effect(tau) - rho * reduced_form_effect(tau - 1);
}

std::vector<double> default_effect_path() {
  std::vector<double> path(16, 0.0);
  const double window[] = {-0.013, -0.016, -0.018, -0.017, -0.015, -0.014};
  for (int i = 0; i < 6; ++i) path[7 + i] = window[i];
  path[13] = -0.009;
  path[14] = -0.004;
  path[15] = 0.0;
  return path;
}

double outcome_from_cases(double cases, double population, const EpidemicConfig& config) {
  if (config.outcome_transform == OutcomeTransform::count_plus_one) return std::log(cases + 1.0);
  return std::log(cases * config.per_capita_base / population + config.log_offset);
}

Panel simulate_panel(const RegionSystem& rs, const CampaignTimeline& timeline, const EpidemicConfig& config,
                     std::uint64_t seed) {
  timeline.validate();
  config.validate();
  const auto& subs = rs.subprefs;
  if (subs.empty()) throw ParameterError(kModule, "no sub-prefectures");
  const auto& epi = subs.at(static_cast<std::size_t>(rs.epicenter));

  double mean_log_density = 0.0;
  for (const auto& sp : subs) mean_log_density += std::log(sp.population / sp.area_km2);
  mean_log_density /= static_cast<double>(subs.size());

  // treatment intensity per unit coverage
  auto intensity = [&](double coverage) {
    if (config.pathway == TreatmentPathway::linear) return coverage;
    std::vector<double> y(config.game.alphas.size(), config.theta);
    for (std::size_t k = 0; k < config.public_signal_bias.size(); ++k) y[k] += config.public_signal_bias[k];
    const double b = game::behavior_response(config.game, coverage, config.theta, config.theta_pre, y);
    return (b - config.theta_pre) / (config.theta - config.theta_pre);
  };

  const double initial_epicenter = std::log(config.seed_cases * config.per_capita_base / epi.population);
  constexpr double kMaxLog = 30.0;  // keeps exp() finite; saturates case counts

  Panel panel;
  panel.timeline = timeline;
  panel.rows.reserve(subs.size() * static_cast<std::size_t>(timeline.horizon));
  for (const auto& sp : subs) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sp.id)));
    const double x_dist = sp.distance_to_epicenter_km / 100.0;
    const double x_dens = std::log(sp.population / sp.area_km2) - mean_log_density;
    const double covariates = config.beta2[0] * x_dist + config.beta2[1] * x_dens;
    const double treated = intensity(sp.coverage.local_community);
    double latent = initial_epicenter - config.initial_decay_per_100km * x_dist;
    for (int t = 0; t < timeline.horizon; ++t) {
      if (t > 0) {
        const double wave = config.wave_amplitude *
                            std::exp(-0.5 * std::pow((t - config.wave_peak) / config.wave_width, 2));
        const double shock = config.noise_sd > 0.0 ? config.noise_sd * rng.normal() : 0.0;
        const int tau = t - timeline.official_launch;
        const double effect = tau >= 0 ? config.innovation(tau) * treated : 0.0;
        latent = config.rho * latent + config.beta0 + wave + effect + covariates + shock;
      }
      PanelObservation o;
      o.subpref_id = sp.id;
      o.pref_id = sp.prefecture_id;
      o.month = t;
      o.population = sp.population;
      o.latent_log = latent;
      o.cases = std::max(0.0, std::round(std::exp(std::min(latent, kMaxLog)) * sp.population / config.per_capita_base));
      o.log_outcome = outcome_from_cases(o.cases, sp.population, config);
      o.cov_local = sp.coverage.local_community;
      o.cov_comm = sp.coverage.any_community;
      o.cov_national = sp.coverage.national;
      o.cov_private = sp.coverage.private_station;
      o.cov_ethnic = sp.coverage.ethnic_match;
      o.dist_epicenter_km = sp.distance_to_epicenter_km;
      o.dist_tx_comm_km = sp.coverage.dist_community_km;
      o.dist_tx_nat_km = sp.coverage.dist_national_km;
      o.lang_match = sp.lang_match_local.value_or(false) ? 1 : 0;
      o.post_official = t >= timeline.official_launch ? 1 : 0;
      o.post_effective = t >= timeline.effective_adoption ? 1 : 0;
      panel.rows.push_back(o);
    }
  }
  return panel;
}

const std::vector<std::string>& panel_columns() {
  static const std::vector<std::string> cols{
      "subpref_id",   "pref_id",     "month",          "cases",          "population",        "log_outcome",
      "cov_local",    "cov_comm",    "cov_national",   "cov_private",    "cov_ethnic",        "dist_epicenter_km",
      "dist_tx_comm_km", "dist_tx_nat_km", "lang_match", "post_official", "post_effective"};
  return cols;
}

Table panel_table(const Panel& panel) {
  const auto n = panel.rows.size();
  std::vector<std::vector<double>> v(panel_columns().size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = panel.rows[i];
    const double row[] = {double(o.subpref_id), double(o.pref_id), double(o.month), o.cases, o.population,
                          o.log_outcome, o.cov_local, o.cov_comm, o.cov_national, o.cov_private, o.cov_ethnic,
                          o.dist_epicenter_km, o.dist_tx_comm_km, o.dist_tx_nat_km, double(o.lang_match),
                          double(o.post_official), double(o.post_effective)};
    for (std::size_t c = 0; c < v.size(); ++c) v[c][i] = row[c];
  }
  Table t(n);
  for (std::size_t c = 0; c < v.size(); ++c) t.set(panel_columns()[c], std::move(v[c]));
  return t;
}

void write_panel_csv(const Panel& panel, std::ostream& out) { write_csv(panel_table(panel), out); }

void SurveyConfig::validate() const {
  if (n_respondents < 2) throw ParameterError(kModule, "survey needs at least two respondents");
  if (!(belief_noise >= 0.0) || !(chlorine_noise >= 0.0)) throw ParameterError(kModule, "noise must be >= 0");
  if (gamma.size() != 5) throw ParameterError(kModule, "gamma needs five demographic loadings");
}

std::vector<double> leave_one_out_mean(const std::vector<double>& values, const std::vector<int>& group) {
  if (values.size() != group.size()) throw ParameterError(kModule, "values and groups differ in length");
  const int ng = group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;
  std::vector<double> sum(ng, 0.0);
  std::vector<int> count(ng, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[group[i]] += values[i];
    ++count[group[i]];
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int g = group[i];
    if (count[g] < 2) throw ParameterError(kModule, fmt::format("group {} has fewer than 2 members", g));
    out[i] = (sum[g] - values[i]) / (count[g] - 1);
  }
  return out;
}

std::vector<MicroRespondent> simulate_survey(const RegionSystem& rs, const SurveyConfig& config, std::uint64_t seed) {
  config.validate();
  const int ns = static_cast<int>(rs.subprefs.size());
  if (config.n_respondents < 2 * ns)
    throw ParameterError(kModule, fmt::format("{} respondents leave some of the {} sub-prefectures with fewer than 2",
                                              config.n_respondents, ns));
  double mean_log_density = 0.0;
  for (const auto& sp : rs.subprefs) mean_log_density += std::log(sp.population / sp.area_km2);
  mean_log_density /= ns;

  Rng rng(seed);
  std::vector<MicroRespondent> out(config.n_respondents);
  std::vector<double> health(config.n_respondents);
  for (int i = 0; i < config.n_respondents; ++i) {
    auto& m = out[i];
    const auto& sp = rs.subprefs[i % ns];
    m.id = i;
    m.subpref_id = sp.id;
    m.pref_id = sp.prefecture_id;
    m.cov_local = sp.coverage.local_community;
    m.cov_comm = sp.coverage.any_community;
    m.age = std::floor(rng.uniform(18.0, 70.0));
    m.education = static_cast<double>(rng.below(13));
    m.wealth = rng.normal();
    m.gender = rng.bernoulli(0.5) ? 1 : 0;
    m.urban = rng.bernoulli(logistic(std::log(sp.population / sp.area_km2) - mean_log_density)) ? 1 : 0;
    health[i] = rng.normal();
    m.heard_on_media = rng.bernoulli(logistic(config.a0 + config.a1 * m.cov_local + config.a_h * health[i])) ? 1 : 0;
    const bool other = rng.bernoulli(logistic(config.o0 + config.o_h * health[i]));
    m.heard_other_source = (!m.heard_on_media && other) ? 1 : 0;
  }
  std::vector<double> media(out.size());
  std::vector<int> group(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    media[i] = out[i].heard_on_media;
    group[i] = out[i].subpref_id;
  }
  const auto peer = leave_one_out_mean(media, group);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& m = out[i];
    m.peer_share_media = peer[i];
    const double demo = config.gamma[0] * m.age / 10.0 + config.gamma[1] * m.education / 4.0 +
                        config.gamma[2] * m.wealth + config.gamma[3] * m.gender + config.gamma[4] * m.urban;
    m.belief_neighbors_seek_treatment = config.b0 + config.b1 * m.heard_on_media +
                                        config.b_other * m.heard_other_source + config.b2 * peer[i] +
                                        config.b2_quad * peer[i] * peer[i] + demo + config.belief_h * health[i] +
                                        config.belief_noise * rng.normal();
    const int any_info = (m.heard_on_media || m.heard_other_source) ? 1 : 0;
    m.chlorine_use = config.c0 + config.c1 * any_info + config.c_media * m.heard_on_media +
                     config.c_h * health[i] + config.chlorine_noise * rng.normal();
  }
  return out;
}

const std::vector<std::string>& survey_columns() {
  static const std::vector<std::string> cols{
      "id",  "subpref_id", "pref_id", "heard_on_media", "heard_other_source", "peer_share_media",
      "belief_neighbors_seek_treatment", "chlorine_use", "cov_local", "cov_comm", "age", "education",
      "wealth", "gender", "urban"};
  return cols;
}

Table survey_table(const std::vector<MicroRespondent>& survey) {
  const auto n = survey.size();
  std::vector<std::vector<double>> v(survey_columns().size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = survey[i];
    const double row[] = {double(m.id), double(m.subpref_id), double(m.pref_id), double(m.heard_on_media),
                          double(m.heard_other_source), m.peer_share_media, m.belief_neighbors_seek_treatment,
                          m.chlorine_use, m.cov_local, m.cov_comm, m.age, m.education, m.wealth,
                          double(m.gender), double(m.urban)};
    for (std::size_t c = 0; c < v.size(); ++c) v[c][i] = row[c];
  }
  Table t(n);
  for (std::size_t c = 0; c < v.size(); ++c) t.set(survey_columns()[c], std::move(v[c]));
  return t;
}

void write_survey_csv(const std::vector<MicroRespondent>& survey, std::ostream& out) {
  write_csv(survey_table(survey), out);
}

}  // namespace coorad::epidemic
