#pragma once

#include <span>
#include <string>
#include <vector>

#include "coorad/error.hpp"

namespace coorad::game {

/// Primitives of the coordination game with one private and several public
/// signals, a share `informed_share` of players receiving all public signals.
struct GamePrimitives {
  double r = 0.5;                  // strategic complementarity, [0, 1)
  double beta_priv = 1.0;          // precision of the private signal
  std::vector<double> alphas;      // public-signal precisions, one per source
  double informed_share = 1.0;     // P

  void validate() const;
};

struct SignalRealization {
  double theta = 0.0;
  std::vector<double> y;  // public draws, aligned with alphas
  double x = 0.0;         // private draw
};

/// Linear equilibrium strategy of an informed player. Weights are
/// nonnegative and sum to one.
struct EquilibriumWeights {
  std::vector<double> kappa_y;
  double kappa_x = 0.0;

  double sum() const;
};

/// Closed form: kappa_y[k] = alpha_k / D, kappa_x = (1 - rP) beta / D with
/// D = (1 - rP) beta + sum_j alpha_j. Throws DomainError when rP >= 1.
EquilibriumWeights equilibrium_weights(const GamePrimitives& prim);

double equilibrium_action(const EquilibriumWeights& w, const SignalRealization& s);

/// Players without public information act on their private signal alone.
inline double private_only_action(const SignalRealization& s) { return s.x; }

/// Population average action for given state and public draws; private
/// noise integrates out, uninformed players average to theta.
double expected_average_action(const GamePrimitives& prim, double theta, std::span<const double> y);

struct FixedPointResult {
  EquilibriumWeights weights;
  int iterations = 0;
};

class ConvergenceError : public ComputationError {
 public:
  ConvergenceError(const std::string& what, EquilibriumWeights last, int iterations)
      : ComputationError("coordination-game", what), last_(std::move(last)), iterations_(iterations) {}
  const EquilibriumWeights& last_iterate() const noexcept { return last_; }
  int iterations() const noexcept { return iterations_; }

 private:
  EquilibriumWeights last_;
  int iterations_;
};

/// Best-response iteration within linear strategies, started from the
/// Bayesian posterior weights. Informed players best-respond with
/// a = (1 - r) E[theta] + r E[A-bar] given the conjectured strategy of the
/// other informed players; the map is a contraction with factor rP. Stops
/// when the largest coefficient change is below `tol`.
FixedPointResult fixed_point_oracle(const GamePrimitives& prim, double tol = 1e-13, int max_iter = 100000);

/// Population-mean protective action when a share `coverage` is informed:
/// informed players play the equilibrium action evaluated at the realized
/// public draws (private noise averages to theta), uninformed players stay at
/// the pre-campaign norm theta_pre. Empty `public_draws` means every public
/// signal equals theta.
double behavior_response(const GamePrimitives& prim_template, double coverage, double theta,
                         double theta_pre, std::span<const double> public_draws = {});

}  // namespace coorad::game
