#include "coorad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "coorad/error.hpp"

namespace coorad::metrics {

namespace {
constexpr const char* kModule = "analysis-metrics";

std::vector<double> normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0)
    for (double& x : v) x /= total;
  return v;
}
}  // namespace

GroupShares::GroupShares(std::vector<double> shares) : shares_(std::move(shares)) {
  if (shares_.empty()) throw ParameterError(kModule, "group shares are empty");
  double total = 0.0;
  for (double s : shares_) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError(kModule, "group shares must be finite and nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError(kModule, fmt::format("group shares sum to {}, not 1", total));
}

double fractionalization(const GroupShares& shares) {
  double sq = 0.0;
  for (double s : shares.values()) sq += s * s;
  return 1.0 - sq;
}

std::vector<LocationFractionalization> fractionalization_by_location(const epidemic::RegionSystem& rs) {
  std::vector<LocationFractionalization> rows;
  const auto add = [&rows](const char* level, int id, double pop, const std::vector<double>& shares) {
    rows.push_back({level, id, pop, fractionalization(GroupShares(normalized(shares)))});
  };
  std::vector<double> pref_pop(rs.prefecture_region.size(), 0.0);
  std::vector<double> region_pop(static_cast<std::size_t>(rs.n_regions), 0.0);
  double country_pop = 0.0;
  for (const auto& s : rs.subprefs) {
    pref_pop[s.prefecture_id] += s.population;
    region_pop[s.region_id] += s.population;
    country_pop += s.population;
  }
  add("country", 0, country_pop, rs.country_language_shares());
  const auto regions = rs.region_language_shares();
  for (std::size_t r = 0; r < regions.size(); ++r)
    if (region_pop[r] > 0) add("region", static_cast<int>(r), region_pop[r], regions[r]);
  const auto prefs = rs.prefecture_language_shares();
  for (std::size_t p = 0; p < prefs.size(); ++p)
    if (pref_pop[p] > 0) add("prefecture", static_cast<int>(p), pref_pop[p], prefs[p]);
  for (const auto& s : rs.subprefs) add("subprefecture", s.id, s.population, s.language_shares);
  return rows;
}

FractionalizationSummary summarize_fractionalization(const std::vector<LocationFractionalization>& rows) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& a = acc[r.level];
    a.first += r.value;
    a.second += 1;
  }
  const auto mean = [&acc](const char* level) {
    auto it = acc.find(level);
    return it == acc.end() || it->second.second == 0 ? 0.0 : it->second.first / it->second.second;
  };
  return {mean("country"), mean("region"), mean("prefecture"), mean("subprefecture")};
}

Table fractionalization_table(const std::vector<LocationFractionalization>& rows) {
  static const std::map<std::string, double> level_code{
      {"country", 0}, {"region", 1}, {"prefecture", 2}, {"subprefecture", 3}};
  std::vector<double> level, id, pop, value;
  for (const auto& r : rows) {
    level.push_back(level_code.at(r.level));
    id.push_back(r.id);
    pop.push_back(r.population);
    value.push_back(r.value);
  }
  Table t(rows.size());
  t.set("level", std::move(level));
  t.set("id", std::move(id));
  t.set("population", std::move(pop));
  t.set("fractionalization", std::move(value));
  return t;
}

RowFilter untreated_local() {
  return [](const Table& panel, std::size_t row) { return panel.col("cov_local")[row] == 0.0; };
}

CounterfactualResult prevented_cases(const econ::EventStudyResult& esr, const Table& panel, double coverage_gap_pp,
                                     const RowFilter& filter, CounterfactualMethod method) {
  if (!(coverage_gap_pp >= 0.0 && coverage_gap_pp <= 100.0))
    throw ParameterError(kModule, "coverage gap must be in [0, 100] percentage points");
  for (const char* c : {"month", "cases", "post_official"})
    if (!panel.has(c)) throw ParameterError(kModule, fmt::format("panel lacks column '{}'", c));
  const auto& month = panel.col("month");
  const auto& cases = panel.col("cases");
  const auto& post = panel.col("post_official");
  int launch = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < panel.rows(); ++i)
    if (post[i] == 1.0) launch = std::min(launch, static_cast<int>(std::lround(month[i])));
  if (launch == std::numeric_limits<int>::max()) throw ParameterError(kModule, "panel has no post-launch months");

  CounterfactualResult r;
  std::map<int, double> by_tau;
  std::map<int, bool> present;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    const int tau = static_cast<int>(std::lround(month[i])) - launch;
    r.total_cases += cases[i];
    present[tau] = true;
    if (!filter || filter(panel, i)) by_tau[tau] += cases[i];
  }
  for (const auto& c : esr.path) {
    if (c.omitted || c.tau < 0) continue;
    if (!present.count(c.tau))
      throw ParameterError(kModule, fmt::format("panel has no rows for post event time {}", c.tau));
    const double base = by_tau[c.tau];
    const double b = c.beta / 100.0;  // per pp
    const double linear = std::max(0.0, -b) * coverage_gap_pp * base;
    const double expo = std::max(0.0, base * (1.0 - std::exp(b * coverage_gap_pp)));
    r.event_times.push_back(c.tau);
    r.base_cases.push_back(base);
    r.prevented_by_month.push_back(method == CounterfactualMethod::linear ? linear : expo);
    r.linear_total += linear;
    r.exponential_total += expo;
  }
  for (double p : r.prevented_by_month) r.prevented_total += p;
  r.share_of_total_epidemic = r.total_cases > 0 ? r.prevented_total / r.total_cases : 0.0;
  return r;
}

}  // namespace coorad::metrics
