#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coorad/econometrics.hpp"
#include "coorad/epidemic.hpp"
#include "coorad/table.hpp"

namespace coorad::metrics {

/// Nonnegative group shares summing to 1 within 1e-9.
class GroupShares {
 public:
  explicit GroupShares(std::vector<double> shares);
  const std::vector<double>& values() const noexcept { return shares_; }

 private:
  std::vector<double> shares_;
};

/// 1 - sum of squared shares.
double fractionalization(const GroupShares& shares);

struct LocationFractionalization {
  std::string level;  // country, region, prefecture, subprefecture
  int id = 0;
  double population = 0.0;
  double value = 0.0;
};

/// Fractionalization of every location at every level, from
/// population-weighted language shares.
std::vector<LocationFractionalization> fractionalization_by_location(const epidemic::RegionSystem& rs);

struct FractionalizationSummary {
  double country = 0.0;
  double region = 0.0;        // unweighted means over locations
  double prefecture = 0.0;
  double subprefecture = 0.0;
};
FractionalizationSummary summarize_fractionalization(const std::vector<LocationFractionalization>& rows);

Table fractionalization_table(const std::vector<LocationFractionalization>& rows);

enum class CounterfactualMethod {
  linear,       // max(0, -beta) * gap * cases
  exponential,  // cases * (1 - exp(beta * gap))
};

struct CounterfactualResult {
  std::vector<int> event_times;
  std::vector<double> base_cases;          // filtered cases per post month
  std::vector<double> prevented_by_month;  // selected method
  double prevented_total = 0.0;
  double total_cases = 0.0;                // every unit, every month
  double share_of_total_epidemic = 0.0;
  double linear_total = 0.0;
  double exponential_total = 0.0;
};

/// Row predicate over a panel table.
using RowFilter = std::function<bool(const Table& panel, std::size_t row)>;

/// Units without any local community coverage.
RowFilter untreated_local();

/// Prevented cases implied by the post-launch event-study coefficients
/// (per unit coverage share, so beta / 100 per pp) applied to the monthly
/// case totals of the rows passing `filter` at a coverage gap in pp. The
/// panel table needs month, cases and post_official columns; the launch
/// month is the first month with post_official = 1. Throws ParameterError if
/// a post event time has no panel rows.
CounterfactualResult prevented_cases(const econ::EventStudyResult& esr, const Table& panel, double coverage_gap_pp,
                                     const RowFilter& filter = untreated_local(),
                                     CounterfactualMethod method = CounterfactualMethod::linear);

}  // namespace coorad::metrics
