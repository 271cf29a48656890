#include <doctest.h>

#include <cmath>
#include <vector>

#include "coorad/game.hpp"
#include "coorad/rng.hpp"

using namespace coorad;
using namespace coorad::game;

namespace {
GamePrimitives prim(double r, double beta, std::vector<double> alphas, double P) {
  GamePrimitives p;
  p.r = r;
  p.beta_priv = beta;
  p.alphas = std::move(alphas);
  p.informed_share = P;
  return p;
}
}  // namespace

TEST_CASE("closed-form weights on worked examples") {
  auto w = equilibrium_weights(prim(0.0, 1.0, {1.0}, 0.3));
  CHECK(w.kappa_y[0] == doctest::Approx(0.5));
  CHECK(w.kappa_x == doctest::Approx(0.5));

  w = equilibrium_weights(prim(0.5, 1.0, {2.0, 1.0}, 0.0));
  CHECK(w.kappa_y[0] == doctest::Approx(0.5));
  CHECK(w.kappa_y[1] == doctest::Approx(0.25));
  CHECK(w.kappa_x == doctest::Approx(0.25));

  w = equilibrium_weights(prim(0.5, 1.0, {2.0, 1.0}, 1.0));
  CHECK(w.kappa_y[0] == doctest::Approx(2.0 / 3.5).epsilon(1e-12));
  CHECK(w.kappa_y[1] == doctest::Approx(1.0 / 3.5).epsilon(1e-12));
  CHECK(w.kappa_x == doctest::Approx(0.5 / 3.5).epsilon(1e-12));
}

TEST_CASE("primitive validation") {
  CHECK_THROWS_AS(equilibrium_weights(prim(1.0, 1.0, {1.0}, 1.0)), DomainError);
  CHECK_THROWS_AS(equilibrium_weights(prim(-0.1, 1.0, {1.0}, 1.0)), ParameterError);
  CHECK_THROWS_AS(equilibrium_weights(prim(0.5, 0.0, {1.0}, 1.0)), ParameterError);
  CHECK_THROWS_AS(equilibrium_weights(prim(0.5, 1.0, {-1.0}, 1.0)), ParameterError);
  CHECK_THROWS_AS(equilibrium_weights(prim(0.5, 1.0, {1.0}, 1.5)), ParameterError);
}

TEST_CASE("equilibrium actions") {
  const auto w = equilibrium_weights(prim(0.5, 1.0, {2.0, 1.0}, 1.0));
  CHECK(equilibrium_action(w, {3.0, {3.0, 3.0}, 3.0}) == doctest::Approx(3.0));
  const double expected = 2.0 / 3.5 * 1.0 - 1.0 / 3.5 + 0.5 / 3.5 * 0.5;
  CHECK(equilibrium_action(w, {0.0, {1.0, -1.0}, 0.5}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.357143).epsilon(1e-6));
  CHECK_THROWS_AS(equilibrium_action(w, {0.0, {1.0}, 0.5}), ParameterError);

  EquilibriumWeights half{{0.5}, 0.5};
  CHECK(equilibrium_action(half, {0.0, {2.0}, 4.0}) == doctest::Approx(3.0));
  for (double x : {0.0, 1.7, -2.0}) CHECK(private_only_action({x, {}, x}) == x);
}

TEST_CASE("expected average action") {
  const std::vector<double> y{1.0, -1.0};
  CHECK(expected_average_action(prim(0.5, 1.0, {2.0, 1.0}, 0.0), 0.7, y) == doctest::Approx(0.7));
  const std::vector<double> at_theta{0.7, 0.7};
  CHECK(expected_average_action(prim(0.5, 1.0, {2.0, 1.0}, 0.6), 0.7, at_theta) == doctest::Approx(0.7));
  CHECK(expected_average_action(prim(0.5, 1.0, {2.0, 1.0}, 1.0), 0.0, y) == doctest::Approx(1.0 / 3.5));
}

TEST_CASE("fixed-point oracle") {
  const auto r0 = fixed_point_oracle(prim(0.0, 1.0, {2.0, 1.0}, 1.0));
  CHECK(r0.iterations == 1);
  CHECK(r0.weights.kappa_y[0] == doctest::Approx(0.5));

  const auto hi = fixed_point_oracle(prim(0.99, 1.0, {2.0, 1.0}, 1.0));
  const auto mid = fixed_point_oracle(prim(0.5, 1.0, {2.0, 1.0}, 1.0));
  CHECK(hi.weights.kappa_x < mid.weights.kappa_x);
  CHECK(std::abs(hi.weights.kappa_x - equilibrium_weights(prim(0.99, 1.0, {2.0, 1.0}, 1.0)).kappa_x) < 1e-10);

  bool threw = false;
  try {
    fixed_point_oracle(prim(0.99, 1.0, {2.0, 1.0}, 1.0), 1e-15, 3);
  } catch (const ConvergenceError& e) {
    threw = true;
    CHECK(e.iterations() == 3);
    CHECK(e.last_iterate().kappa_y.size() == 2);
  }
  CHECK(threw);
}

TEST_CASE("property: weights are nonnegative, sum to one, match the oracle") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> alphas(1 + rng.below(3));
    for (auto& a : alphas) a = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.0, 5.0);
    const auto p = prim(rng.uniform(0.0, 0.95), rng.uniform(0.05, 5.0), alphas, rng.uniform());
    const auto w = equilibrium_weights(p);
    CHECK(std::abs(w.sum() - 1.0) < 1e-14);
    CHECK(w.kappa_x >= 0.0);
    for (double k : w.kappa_y) CHECK(k >= 0.0);
    const auto o = fixed_point_oracle(p).weights;
    for (std::size_t k = 0; k < alphas.size(); ++k) CHECK(std::abs(o.kappa_y[k] - w.kappa_y[k]) < 1e-10);
  }
}

TEST_CASE("property: comparative statics") {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const double aL = rng.uniform(0.1, 4.0), aN = rng.uniform(0.1, 4.0);
    const double P = rng.uniform(0.05, 1.0), r = rng.uniform(0.0, 0.9), beta = rng.uniform(0.1, 4.0);
    const auto w = equilibrium_weights(prim(r, beta, {aL, aN, 0.0}, P));
    const auto wr = equilibrium_weights(prim(r + 1e-6, beta, {aL, aN, 0.0}, P));
    const auto wp = equilibrium_weights(prim(r, beta, {aL, aN, 0.0}, std::min(1.0, P + 1e-6)));
    CHECK(wr.kappa_y[0] > w.kappa_y[0]);
    CHECK(wr.kappa_x < w.kappa_x);
    if (P + 1e-6 <= 1.0) CHECK(wp.kappa_y[0] > w.kappa_y[0]);
    CHECK((aL > aN) == (w.kappa_y[0] > w.kappa_y[1]));
    CHECK(w.kappa_y[2] == 0.0);
    CHECK((aL > (1 - r * P) * beta) == (w.kappa_y[0] > w.kappa_x));
  }
}

TEST_CASE("behavior response") {
  const auto t = prim(0.5, 1.0, {2.0, 1.0}, 1.0);
  CHECK(behavior_response(t, 0.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(behavior_response(t, 1.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(behavior_response(t, 0.5, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(behavior_response(t, 1.2, 1.0, 0.0), ParameterError);

  // oracle: 1e5 simulated agents with noiseless public signals
  Rng rng(5);
  const auto w = equilibrium_weights([&] { auto p = t; p.informed_share = 0.5; return p; }());
  const int n = 100000;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (rng.bernoulli(0.5)) {
      const double x = 1.0 + rng.normal();  // private noise with unit precision
      total += equilibrium_action(w, {1.0, {1.0, 1.0}, x});
    } else {
      total += 0.0;  // uninformed stay at the pre-campaign norm
    }
  }
  CHECK(std::abs(total / n - behavior_response(t, 0.5, 1.0, 0.0)) < 0.01);
}
