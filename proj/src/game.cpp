#include "coorad/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace coorad::game {

namespace {
constexpr const char* kModule = "coordination-game";

double posterior_denominator(const GamePrimitives& p) {
  return p.beta_priv + std::accumulate(p.alphas.begin(), p.alphas.end(), 0.0);
}
}  // namespace

void GamePrimitives::validate() const {
  if (!(r >= 0.0 && r <= 1.0) || !(informed_share >= 0.0 && informed_share <= 1.0))
    throw ParameterError(kModule, fmt::format("r={} and P={} must lie in [0, 1]", r, informed_share));
  if (r * informed_share >= 1.0)
    throw DomainError(kModule, fmt::format("r*P = {} >= 1: equilibrium weights undefined", r * informed_share));
  if (r >= 1.0) throw ParameterError(kModule, "strategic complementarity r must be < 1");
  if (!(beta_priv > 0.0) || !std::isfinite(beta_priv))
    throw ParameterError(kModule, "private precision must be > 0");
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError(kModule, "public precisions must be >= 0");
}

double EquilibriumWeights::sum() const {
  return kappa_x + std::accumulate(kappa_y.begin(), kappa_y.end(), 0.0);
}

EquilibriumWeights equilibrium_weights(const GamePrimitives& prim) {
  prim.validate();
  const double damp = 1.0 - prim.r * prim.informed_share;
  const double denom = damp * prim.beta_priv + std::accumulate(prim.alphas.begin(), prim.alphas.end(), 0.0);
  EquilibriumWeights w;
  w.kappa_y.reserve(prim.alphas.size());
  for (double a : prim.alphas) w.kappa_y.push_back(a / denom);
  w.kappa_x = damp * prim.beta_priv / denom;
  return w;
}

double equilibrium_action(const EquilibriumWeights& w, const SignalRealization& s) {
  if (w.kappa_y.size() != s.y.size())
    throw ParameterError(kModule, fmt::format("{} public weights but {} public draws", w.kappa_y.size(), s.y.size()));
  double a = w.kappa_x * s.x;
  for (std::size_t k = 0; k < s.y.size(); ++k) a += w.kappa_y[k] * s.y[k];
  return a;
}

double expected_average_action(const GamePrimitives& prim, double theta, std::span<const double> y) {
  const auto w = equilibrium_weights(prim);
  if (y.size() != w.kappa_y.size())
    throw ParameterError(kModule, fmt::format("{} public precisions but {} public draws", w.kappa_y.size(), y.size()));
  double informed = w.kappa_x * theta;
  for (std::size_t k = 0; k < y.size(); ++k) informed += w.kappa_y[k] * y[k];
  return prim.informed_share * informed + (1.0 - prim.informed_share) * theta;
}

FixedPointResult fixed_point_oracle(const GamePrimitives& prim, double tol, int max_iter) {
  prim.validate();
  if (!(tol > 0.0)) throw ParameterError(kModule, "tolerance must be > 0");
  const double r = prim.r;
  const double P = prim.informed_share;
  const double denom = posterior_denominator(prim);
  // posterior weights of E_i(theta)
  std::vector<double> post_y;
  for (double a : prim.alphas) post_y.push_back(a / denom);
  const double post_x = prim.beta_priv / denom;

  EquilibriumWeights cur{post_y, post_x};
  for (int it = 1; it <= max_iter; ++it) {
    // Others: A-bar = P * sum c_k y_k + (P c_x + 1 - P) theta.
    // Best response: a_i = m * E_i(theta) + r P sum c_k y_k,
    // with m = (1 - r) + r (P c_x + 1 - P).
    const double m = (1.0 - r) + r * (P * cur.kappa_x + 1.0 - P);
    EquilibriumWeights next;
    next.kappa_x = m * post_x;
    double change = std::fabs(next.kappa_x - cur.kappa_x);
    next.kappa_y.resize(post_y.size());
    for (std::size_t k = 0; k < post_y.size(); ++k) {
      next.kappa_y[k] = m * post_y[k] + r * P * cur.kappa_y[k];
      change = std::max(change, std::fabs(next.kappa_y[k] - cur.kappa_y[k]));
    }
    cur = std::move(next);
    if (change < tol) return {cur, it};
  }
  throw ConvergenceError(fmt::format("best-response iteration did not converge in {} steps", max_iter), cur, max_iter);
}

double behavior_response(const GamePrimitives& prim_template, double coverage, double theta,
                         double theta_pre, std::span<const double> public_draws) {
  if (!(coverage >= 0.0 && coverage <= 1.0))
    throw ParameterError(kModule, fmt::format("coverage {} outside [0, 1]", coverage));
  GamePrimitives prim = prim_template;
  prim.informed_share = coverage;
  const auto w = equilibrium_weights(prim);
  std::vector<double> y(public_draws.begin(), public_draws.end());
  if (y.empty()) y.assign(w.kappa_y.size(), theta);
  if (y.size() != w.kappa_y.size())
    throw ParameterError(kModule, "public draws do not match the public precisions");
  double informed = w.kappa_x * theta;
  for (std::size_t k = 0; k < y.size(); ++k) informed += w.kappa_y[k] * y[k];
  return coverage * informed + (1.0 - coverage) * theta_pre;
}

}  // namespace coorad::game
