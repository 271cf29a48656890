#include "coorad/scenario.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "coorad/error.hpp"
#include "coorad/hash.hpp"
#include "coorad/table.hpp"

namespace coorad::scenario {

namespace {
constexpr const char* kModule = "cli-pipeline";

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ParameterError(kModule, fmt::format("setting '{}' = '{}' is not {}", key, value, expected));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T x{};
  if (!(in >> x) || !(in >> std::ws).eof()) bad_value(key, v, "a number");
  if constexpr (std::is_unsigned_v<T>)
    if (!v.empty() && v.front() == '-') bad_value(key, v, "a nonnegative integer");
  return x;
}

// value <-> text, one overload pair per setting type
std::string show(double x) { return format_number(x); }
std::string show(int x) { return std::to_string(x); }
std::string show(unsigned x) { return std::to_string(x); }
std::string show(std::uint64_t x) { return std::to_string(x); }
std::string show(bool x) { return x ? "true" : "false"; }
std::string show(const std::string& x) { return x; }
std::string show(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}
std::string show(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}
std::string show(terrain::PropagationMode m) { return m == terrain::PropagationMode::knife_edge ? "knife_edge" : "free_space"; }
std::string show(epidemic::EffectKind k) { return k == epidemic::EffectKind::reduced_form ? "reduced_form" : "innovation"; }
std::string show(epidemic::OutcomeTransform t) {
  return t == epidemic::OutcomeTransform::per_capita_offset ? "per_capita_offset" : "count_plus_one";
}
std::string show(epidemic::TreatmentPathway p) { return p == epidemic::TreatmentPathway::linear ? "linear" : "structural"; }
std::string show(metrics::CounterfactualMethod m) {
  return m == metrics::CounterfactualMethod::linear ? "linear" : "exponential";
}

void read(const std::string& k, const std::string& v, double& x) { x = parse_number<double>(k, v); }
void read(const std::string& k, const std::string& v, int& x) { x = parse_number<int>(k, v); }
void read(const std::string& k, const std::string& v, unsigned& x) { x = parse_number<unsigned>(k, v); }
void read(const std::string& k, const std::string& v, std::uint64_t& x) { x = parse_number<std::uint64_t>(k, v); }
void read(const std::string& k, const std::string& v, bool& x) {
  if (v == "true" || v == "1") x = true;
  else if (v == "false" || v == "0") x = false;
  else bad_value(k, v, "true or false");
}
void read(const std::string&, const std::string& v, std::string& x) { x = v; }
void read(const std::string& k, const std::string& v, std::vector<double>& x) {
  x.clear();
  if (v.empty()) return;
  for (const auto& f : split_fields(v)) x.push_back(parse_number<double>(k, f));
}
void read(const std::string&, const std::string& v, std::vector<std::string>& x) {
  x.clear();
  if (v.empty()) return;
  for (const auto& f : split_fields(v))
    if (!f.empty()) x.push_back(f);
}
template <typename E>
void read_enum(const std::string& k, const std::string& v, E& x, std::initializer_list<E> options) {
  for (E o : options)
    if (show(o) == v) {
      x = o;
      return;
    }
  std::string names;
  for (E o : options) names += (names.empty() ? "" : " or ") + show(o);
  bad_value(k, v, names.c_str());
}
void read(const std::string& k, const std::string& v, terrain::PropagationMode& x) {
  read_enum(k, v, x, {terrain::PropagationMode::knife_edge, terrain::PropagationMode::free_space});
}
void read(const std::string& k, const std::string& v, epidemic::EffectKind& x) {
  read_enum(k, v, x, {epidemic::EffectKind::reduced_form, epidemic::EffectKind::innovation});
}
void read(const std::string& k, const std::string& v, epidemic::OutcomeTransform& x) {
  read_enum(k, v, x, {epidemic::OutcomeTransform::per_capita_offset, epidemic::OutcomeTransform::count_plus_one});
}
void read(const std::string& k, const std::string& v, epidemic::TreatmentPathway& x) {
  read_enum(k, v, x, {epidemic::TreatmentPathway::linear, epidemic::TreatmentPathway::structural});
}
void read(const std::string& k, const std::string& v, metrics::CounterfactualMethod& x) {
  read_enum(k, v, x, {metrics::CounterfactualMethod::linear, metrics::CounterfactualMethod::exponential});
}

struct Field {
  std::string section;
  std::string key;
  std::string help;
  bool hashed = true;
  std::function<std::string(const Scenario&)> get;
  std::function<void(Scenario&, const std::string&)> set;
};

template <typename Acc>
Field field(const char* section, const char* key, const char* help, Acc acc, bool hashed = true) {
  const std::string full = fmt::format("{}.{}", section, key);
  return {section, key, help, hashed, [acc](const Scenario& s) { return show(acc(const_cast<Scenario&>(s))); },
          [acc, full](Scenario& s, const std::string& v) { read(full, v, acc(s)); }};
}

const std::vector<Field>& fields() {
  using S = Scenario;
  static const std::vector<Field> f{
      field("run", "seed", "base seed; every stream is derived from it", [](S& s) -> auto& { return s.run.seed; }),
      field("run", "out", "output directory", [](S& s) -> auto& { return s.run.out; }, false),
      field("run", "threads", "worker threads for coverage, bootstrap and Monte Carlo", [](S& s) -> auto& { return s.run.threads; }, false),

      field("terrain", "nx", "grid columns", [](S& s) -> auto& { return s.terrain.nx; }),
      field("terrain", "ny", "grid rows", [](S& s) -> auto& { return s.terrain.ny; }),
      field("terrain", "cell_size_m", "cell edge length (m)", [](S& s) -> auto& { return s.terrain.cell_size_m; }),
      field("terrain", "ruggedness", "0 is flat; height sd = ruggedness * height_scale_m", [](S& s) -> auto& { return s.terrain.ruggedness; }),
      field("terrain", "height_scale_m", "height sd at ruggedness 1 (m)", [](S& s) -> auto& { return s.terrain.height_scale_m; }),
      field("terrain", "grid_csv", "elevation grid file; empty for synthetic terrain", [](S& s) -> auto& { return s.terrain.grid_csv; }),

      field("propagation", "mode", "knife_edge or free_space", [](S& s) -> auto& { return s.propagation.mode; }),
      field("propagation", "reference_field", "field at 1 km for 1 kW (dBuV/m)", [](S& s) -> auto& { return s.propagation.reference_field; }),
      field("propagation", "wavelength_m", "wavelength for the diffraction parameter (m)", [](S& s) -> auto& { return s.propagation.wavelength; }),
      field("propagation", "threshold", "coverage threshold (dBuV/m)", [](S& s) -> auto& { return s.propagation.threshold; }),
      field("propagation", "receiver_height_m", "receiver antenna height (m)", [](S& s) -> auto& { return s.propagation.receiver_height; }),

      field("transmitters", "csv", "transmitter roster file; empty for the synthetic roster", [](S& s) -> auto& { return s.transmitters.csv; }),
      field("transmitters", "community_prefecture_share", "share of prefectures with a community station", [](S& s) -> auto& { return s.transmitters.roster.community_prefecture_share; }),
      field("transmitters", "community_power_kw", "community station ERP (kW)", [](S& s) -> auto& { return s.transmitters.roster.community_power_kw; }),
      field("transmitters", "community_mast_m", "community mast height (m)", [](S& s) -> auto& { return s.transmitters.roster.community_mast_m; }),
      field("transmitters", "n_national", "national relay count", [](S& s) -> auto& { return s.transmitters.roster.n_national; }),
      field("transmitters", "national_power_kw", "national relay ERP (kW)", [](S& s) -> auto& { return s.transmitters.roster.national_power_kw; }),
      field("transmitters", "n_private", "private station count", [](S& s) -> auto& { return s.transmitters.roster.n_private; }),
      field("transmitters", "private_power_kw", "private station ERP (kW)", [](S& s) -> auto& { return s.transmitters.roster.private_power_kw; }),
      field("transmitters", "n_international", "international relay count", [](S& s) -> auto& { return s.transmitters.roster.n_international; }),
      field("transmitters", "international_power_kw", "international relay ERP (kW)", [](S& s) -> auto& { return s.transmitters.roster.international_power_kw; }),
      field("transmitters", "mast_m", "mast height of the other classes (m)", [](S& s) -> auto& { return s.transmitters.roster.mast_m; }),

      field("regions", "n_prefectures", "prefectures (clusters)", [](S& s) -> auto& { return s.regions.n_prefectures; }),
      field("regions", "n_subprefectures", "sub-prefectures (panel units)", [](S& s) -> auto& { return s.regions.n_subprefectures; }),
      field("regions", "n_regions", "regions above prefectures", [](S& s) -> auto& { return s.regions.n_regions; }),
      field("regions", "n_languages", "language groups", [](S& s) -> auto& { return s.regions.n_languages; }),
      field("regions", "mean_population", "mean sub-prefecture population", [](S& s) -> auto& { return s.regions.mean_population; }),
      field("regions", "population_log_sd", "log-normal sd of populations", [](S& s) -> auto& { return s.regions.population_log_sd; }),
      field("regions", "pref_follows_region", "P(prefecture majority = region majority)", [](S& s) -> auto& { return s.regions.pref_follows_region; }),
      field("regions", "subpref_follows_pref", "P(sub-prefecture majority = prefecture majority)", [](S& s) -> auto& { return s.regions.subpref_follows_pref; }),
      field("regions", "majority_share_min", "lowest majority-language share", [](S& s) -> auto& { return s.regions.majority_share_min; }),
      field("regions", "majority_share_max", "highest majority-language share", [](S& s) -> auto& { return s.regions.majority_share_max; }),
      field("regions", "epicenter", "epicenter sub-prefecture; -1 draws one", [](S& s) -> auto& { return s.regions.epicenter; }),

      field("game", "r", "strategic complementarity in [0, 1)", [](S& s) -> auto& { return s.epidemic.game.r; }),
      field("game", "beta_priv", "private-signal precision", [](S& s) -> auto& { return s.epidemic.game.beta_priv; }),
      field("game", "alphas", "public-signal precisions", [](S& s) -> auto& { return s.epidemic.game.alphas; }),
      field("game", "informed_share", "informed share P (replaced by coverage in the simulation)", [](S& s) -> auto& { return s.epidemic.game.informed_share; }),

      field("timeline", "official_launch", "campaign launch month (tau = 0)", [](S& s) -> auto& { return s.timeline.official_launch; }),
      field("timeline", "effective_adoption", "month most stations adopted", [](S& s) -> auto& { return s.timeline.effective_adoption; }),
      field("timeline", "horizon", "months simulated", [](S& s) -> auto& { return s.timeline.horizon; }),

      field("epidemic", "rho", "persistence of log incidence", [](S& s) -> auto& { return s.epidemic.rho; }),
      field("epidemic", "beta0", "baseline growth term", [](S& s) -> auto& { return s.epidemic.beta0; }),
      field("epidemic", "beta1_path", "per-pp effect by event time 0, 1, ...", [](S& s) -> auto& { return s.epidemic.beta1_path; }),
      field("epidemic", "effect_kind", "reduced_form or innovation", [](S& s) -> auto& { return s.epidemic.effect_kind; }),
      field("epidemic", "beta2", "loadings on distance (100 km) and centered log density", [](S& s) -> auto& { return s.epidemic.beta2; }),
      field("epidemic", "noise_sd", "sd of the monthly shock", [](S& s) -> auto& { return s.epidemic.noise_sd; }),
      field("epidemic", "log_offset", "offset inside the log outcome", [](S& s) -> auto& { return s.epidemic.log_offset; }),
      field("epidemic", "seed_cases", "month-0 cases per 100k scale at the epicenter", [](S& s) -> auto& { return s.epidemic.seed_cases; }),
      field("epidemic", "initial_decay_per_100km", "month-0 log incidence drop per 100 km", [](S& s) -> auto& { return s.epidemic.initial_decay_per_100km; }),
      field("epidemic", "wave_amplitude", "height of the common epidemic wave", [](S& s) -> auto& { return s.epidemic.wave_amplitude; }),
      field("epidemic", "wave_peak", "month of the wave peak", [](S& s) -> auto& { return s.epidemic.wave_peak; }),
      field("epidemic", "wave_width", "wave width (months)", [](S& s) -> auto& { return s.epidemic.wave_width; }),
      field("epidemic", "outcome_transform", "per_capita_offset or count_plus_one", [](S& s) -> auto& { return s.epidemic.outcome_transform; }),
      field("epidemic", "pathway", "linear or structural", [](S& s) -> auto& { return s.epidemic.pathway; }),
      field("epidemic", "theta", "true state (structural pathway)", [](S& s) -> auto& { return s.epidemic.theta; }),
      field("epidemic", "theta_pre", "pre-campaign norm (structural pathway)", [](S& s) -> auto& { return s.epidemic.theta_pre; }),
      field("epidemic", "public_signal_bias", "public draw minus theta, per source", [](S& s) -> auto& { return s.epidemic.public_signal_bias; }),

      field("survey", "n_respondents", "respondents", [](S& s) -> auto& { return s.survey.n_respondents; }),
      field("survey", "a0", "media exposure intercept (logit)", [](S& s) -> auto& { return s.survey.a0; }),
      field("survey", "a1", "media exposure per unit local coverage", [](S& s) -> auto& { return s.survey.a1; }),
      field("survey", "a_h", "media exposure per unit health trait", [](S& s) -> auto& { return s.survey.a_h; }),
      field("survey", "o0", "other-source intercept (logit)", [](S& s) -> auto& { return s.survey.o0; }),
      field("survey", "o_h", "other-source loading on the health trait", [](S& s) -> auto& { return s.survey.o_h; }),
      field("survey", "b0", "belief intercept", [](S& s) -> auto& { return s.survey.b0; }),
      field("survey", "b1", "belief effect of media", [](S& s) -> auto& { return s.survey.b1; }),
      field("survey", "b_other", "belief effect of other sources", [](S& s) -> auto& { return s.survey.b_other; }),
      field("survey", "b2", "belief slope in the peer media share", [](S& s) -> auto& { return s.survey.b2; }),
      field("survey", "b2_quad", "belief curvature in the peer media share", [](S& s) -> auto& { return s.survey.b2_quad; }),
      field("survey", "belief_h", "belief loading on the health trait", [](S& s) -> auto& { return s.survey.belief_h; }),
      field("survey", "belief_noise", "belief noise sd", [](S& s) -> auto& { return s.survey.belief_noise; }),
      field("survey", "c0", "chlorine intercept", [](S& s) -> auto& { return s.survey.c0; }),
      field("survey", "c1", "chlorine effect of any information", [](S& s) -> auto& { return s.survey.c1; }),
      field("survey", "c_media", "extra chlorine effect of media", [](S& s) -> auto& { return s.survey.c_media; }),
      field("survey", "c_h", "chlorine loading on the health trait", [](S& s) -> auto& { return s.survey.c_h; }),
      field("survey", "chlorine_noise", "chlorine noise sd", [](S& s) -> auto& { return s.survey.chlorine_noise; }),
      field("survey", "gamma", "loadings on age/10, education/4, wealth, gender, urban", [](S& s) -> auto& { return s.survey.gamma; }),

      field("estimation", "outcome", "outcome column", [](S& s) -> auto& { return s.estimation.outcome; }),
      field("estimation", "treatment", "treatment column", [](S& s) -> auto& { return s.estimation.treatment; }),
      field("estimation", "interacted_controls", "controls interacted with event time", [](S& s) -> auto& { return s.estimation.interacted_controls; }),
      field("estimation", "controls", "plain controls", [](S& s) -> auto& { return s.estimation.controls; }),
      field("estimation", "unit", "unit fixed effect", [](S& s) -> auto& { return s.estimation.unit; }),
      field("estimation", "time", "time fixed effect", [](S& s) -> auto& { return s.estimation.time; }),
      field("estimation", "cluster", "cluster column", [](S& s) -> auto& { return s.estimation.cluster; }),
      field("estimation", "omitted_event_time", "omitted event time", [](S& s) -> auto& { return s.estimation.omitted_event_time; }),
      field("estimation", "lagged_outcome", "include the lagged outcome", [](S& s) -> auto& { return s.estimation.lagged_outcome; }),
      field("estimation", "bootstrap_reps", "cluster bootstrap replications; 0 for analytic SEs", [](S& s) -> auto& { return s.estimation.bootstrap_reps; }),
      field("estimation", "confidence_level", "CI level; t(G - 1) multiplier with G clusters, normal otherwise", [](S& s) -> auto& { return s.estimation.confidence_level; }),
      field("estimation", "split_column", "binary split for heterogeneous paths; empty for none", [](S& s) -> auto& { return s.estimation.split_column; }),

      field("montecarlo", "reps", "simulated panels", [](S& s) -> auto& { return s.montecarlo.reps; }),
      field("montecarlo", "bootstrap_reps", "bootstrap replications per panel; 0 for analytic SEs", [](S& s) -> auto& { return s.montecarlo.bootstrap_reps; }),
      field("montecarlo", "null_effect", "simulate with a zero effect path", [](S& s) -> auto& { return s.montecarlo.null_effect; }),

      field("counterfactual", "coverage_gap_pp", "coverage gap applied to the estimates (pp)", [](S& s) -> auto& { return s.counterfactual.coverage_gap_pp; }),
      field("counterfactual", "method", "linear or exponential", [](S& s) -> auto& { return s.counterfactual.method; }),
  };
  return f;
}

std::string render(const Scenario& s, bool hashed_only) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (hashed_only && !f.hashed) continue;
    if (f.section != section) {
      out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", f.section);
      section = f.section;
    }
    if (!hashed_only) out += fmt::format("; {}\n", f.help);
    out += fmt::format("{} = {}\n", f.key, f.get(s));
  }
  return out;
}
}  // namespace

std::filesystem::path Scenario::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

void Scenario::validate() const {
  if (run.threads < 1) throw ParameterError(kModule, "run.threads must be >= 1");
  if (terrain.nx < 2 || terrain.ny < 2) throw ParameterError(kModule, "terrain grid needs nx, ny >= 2");
  if (!(terrain.cell_size_m > 0.0)) throw ParameterError(kModule, "terrain.cell_size_m must be > 0");
  if (!(terrain.ruggedness >= 0.0)) throw ParameterError(kModule, "terrain.ruggedness must be >= 0");
  if (!(terrain.height_scale_m > 0.0)) throw ParameterError(kModule, "terrain.height_scale_m must be > 0");
  for (const auto* path : {&terrain.grid_csv, &transmitters.csv})
    if (!path->empty() && !std::filesystem::exists(resolve(*path)))
      throw ParameterError(kModule, "referenced file does not exist: " + resolve(*path).string());
  propagation.validate();
  if (transmitters.csv.empty()) transmitters.roster.validate();
  regions.validate();
  if (terrain.grid_csv.empty() &&
      static_cast<long>(regions.n_subprefectures) > static_cast<long>(terrain.nx) * terrain.ny)
    throw ParameterError(kModule, "more sub-prefectures than grid cells");
  timeline.validate();
  epidemic.validate();
  survey.validate();
  const auto& e = estimation;
  for (const auto* c : {&e.outcome, &e.treatment, &e.unit, &e.time, &e.cluster})
    if (c->empty()) throw ParameterError(kModule, "estimation columns must not be empty");
  if (e.bootstrap_reps != 0 && e.bootstrap_reps < 50)
    throw ParameterError(kModule, "estimation.bootstrap_reps must be 0 or >= 50");
  if (!(e.confidence_level > 0.0 && e.confidence_level < 1.0))
    throw ParameterError(kModule, "estimation.confidence_level must be in (0, 1)");
  if (montecarlo.reps < 1) throw ParameterError(kModule, fmt::format("montecarlo.reps must be >= 1, got {}", montecarlo.reps));
  if (montecarlo.bootstrap_reps != 0 && montecarlo.bootstrap_reps < 50)
    throw ParameterError(kModule, "montecarlo.bootstrap_reps must be 0 or >= 50");
  if (!(counterfactual.coverage_gap_pp >= 0.0 && counterfactual.coverage_gap_pp <= 100.0))
    throw ParameterError(kModule, "counterfactual.coverage_gap_pp must be in [0, 100]");
}

Scenario default_scenario() {
  Scenario s;
  s.epidemic.beta1_path = epidemic::default_effect_path();
  s.epidemic.game.alphas = {1.0, 0.5};
  return s;
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParameterError(kModule, std::string("malformed scenario: ") + e.what());
  }
  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const auto& f : fields()) index[f.section][f.key] = &f;
  Scenario s = default_scenario();
  s.base_dir = base_dir;
  for (const auto& [section, entries] : tree) {
    auto sec = index.find(section);
    if (sec == index.end()) {
      if (entries.empty() && !entries.data().empty())
        throw ParameterError(kModule, "setting '" + section + "' is outside any section");
      throw ParameterError(kModule, "unknown scenario section [" + section + "]");
    }
    for (const auto& [key, value] : entries) {
      auto f = sec->second.find(key);
      if (f == sec->second.end()) throw ParameterError(kModule, fmt::format("unknown setting '{}.{}'", section, key));
      f->second->set(s, value.data());
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError(kModule, "cannot open scenario " + path.string());
  return parse_scenario(in, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string canonical_text(const Scenario& s) { return render(s, false); }

std::string scenario_hash(const Scenario& s) { return sha256_hex(render(s, true)); }

}  // namespace coorad::scenario
