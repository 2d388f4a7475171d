#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "svw/config.hpp"
#include "svw/diagnostics.hpp"
#include "svw/error.hpp"
#include "svw/harness.hpp"

using namespace svw;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State state_of(Field R, Field S) {
  return State{std::move(R), std::move(S), 0.0, 0.0, false, std::nullopt};
}

}  // namespace

TEST_CASE("energy") {
  const Grid g(64);
  CHECK(energy(state_of(Field(g, 1.0), Field(g, 1.0))) == doctest::Approx(2.0));
  CHECK(energy(state_of(Field::sample(g, [](double x) { return std::cos(kTwoPi * x); }),
                        Field(g))) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Oleinik statistics") {
  const Grid g(64);
  OleinikStats o = oleinik_stats(state_of(Field(g, -2.0), Field(g, 3.0)));
  CHECK(o.sup_neg_R == 2.0);
  CHECK(o.sup_neg_S == 0.0);
  o = oleinik_stats(state_of(Field(g, 0.0), Field(g, 0.0)));
  CHECK(o.sup_neg_R == 0.0);
  // sin - 0.5 has min -1.5 at x = 3/4, a node of this grid
  const Field f = Field::sample(g, [](double x) { return std::sin(kTwoPi * x) - 0.5; });
  CHECK(oleinik_stats(state_of(f, f)).sup_neg_R == doctest::Approx(1.5).epsilon(1e-14));
  const Field h = Field::sample(Grid(50), [](double x) { return std::sin(kTwoPi * x) - 0.5; });
  CHECK(oleinik_stats(state_of(h, h)).sup_neg_R == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("weighted Lp integral") {
  const Grid g(64);
  const SpeedModel tanh_model = SpeedModel::tanh();
  const State s = state_of(Field(g, 2.0), Field(g, 0.0));
  CHECK(lp_weighted(s, Field(g, 0.3), SpeedModel::constant(2.0), 0.5) == 0.0);
  CHECK(lp_weighted(Field(g, 1.0), Field(g, 1.0), Field(g, 1.0), 0.5) == doctest::Approx(2.0));
  CHECK(lp_weighted(s, Field(g, 0.0), tanh_model, 0.5) ==
        doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-14));
  CHECK(lp_weighted(s, Field(g, 0.0), tanh_model, 0.5) == doctest::Approx(5.656854).epsilon(1e-6));
  CHECK_THROWS_AS(lp_weighted(s, Field(g, 0.0), tanh_model, 1.0), Error);
}

TEST_CASE("truncated square") {
  CHECK(q_kappa(-1.0, 0.0) == 0.5);
  CHECK(q_kappa(1.0, 0.0) == 0.0);
  CHECK(q_kappa(3.0, 1.0) == doctest::Approx(2.5));
  CHECK(q_kappa(0.5, 1.0) == 0.125);
  CHECK(q_kappa_prime(3.0, 1.0) == 1.0);
  CHECK(q_kappa_prime(-3.0, 1.0) == -3.0);
}

TEST_CASE("sample moments") {
  const std::vector<double> kappas{0.0, 1.0};
  const std::vector<double> same(10, 0.7);
  WindowMoments w = sample_moments(same, same, kappas);
  CHECK(w.delta == doctest::Approx(0.0));
  CHECK(w.delta_check == doctest::Approx(0.0));
  for (const KappaDefect& k : w.kappas) {
    CHECK(k.delta_R == doctest::Approx(0.0));
    CHECK(k.delta_S == doctest::Approx(0.0));
  }
  const std::vector<double> two{-1.0, 1.0};
  w = sample_moments(two, two, kappas);
  CHECK(w.samples == 2);
  CHECK(w.mean_R == 0.0);
  CHECK(w.mean_R2 == 1.0);
  CHECK(w.delta == 0.5);
  CHECK(w.kappas[0].kappa == 0.0);
  CHECK(w.kappas[0].delta_R == doctest::Approx(0.25));
  CHECK(w.kappas[0].delta_R <= w.delta);
  CHECK_THROWS_AS(sample_moments({}, {}, kappas), Error);
}

TEST_CASE("Jensen chain on random samples") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.5, 2.0);
  const std::vector<double> kappas{-1.0, 0.0, 0.5, 2.0, 10.0};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> R(200), S(200);
    for (double& r : R) r = nd(gen);
    for (double& s : S) s = std::exp(nd(gen));
    const WindowMoments w = sample_moments(R, S, kappas);
    CHECK(w.delta >= 0.0);
    CHECK(w.delta_check >= 0.0);
    for (const KappaDefect& k : w.kappas) {
      CHECK(k.delta_R >= -1e-12);
      CHECK(k.delta_R <= w.delta + 1e-12);
      CHECK(k.delta_S <= w.delta_check + 1e-12);
      CHECK(k.ts_R <= k.delta_R + 1e-12);
      CHECK(k.ts_S <= k.delta_S + 1e-12);
    }
  }
}

TEST_CASE("window selection") {
  const Grid g(8);
  std::vector<Snapshot> runs;
  for (int p = 0; p < 2; ++p) {
    for (double t : {0.0, 0.5, 1.0}) {
      runs.push_back({p, t, Field::sample(g, [&](double x) { return p + t + x; }), Field(g)});
    }
  }
  Window w;
  w.t_min = 0.4;
  w.t_max = 0.6;
  w.x_min = 0.0;
  w.x_max = 0.25;
  w.path_begin = 1;
  w.path_end = 2;
  const WindowMoments m = window_moments(runs, w, std::vector<double>{0.0});
  CHECK(m.samples == 3);
  CHECK(m.mean_R == doctest::Approx(1.5 + 0.125));
  w.t_min = 2.0;
  w.t_max = 3.0;
  CHECK_THROWS_AS(window_moments(runs, w, std::vector<double>{0.0}), Error);
}

TEST_CASE("ledger without noise or cut-off") {
  RunConfig cfg = parse_config(R"({
    "grid": {"n": 128},
    "noise": {"pairs": 0},
    "run": {"t_end": 0.5},
    "init": {"kind": "fourier", "u_cos": [0.05], "v_sin": [0.3]}
  })");
  const Setup setup = Setup::build(cfg);
  PathSimulator sim(setup, 0);
  while (!sim.finished()) {
    sim.advance();
    CHECK(sim.ledger().M() == 0.0);
    CHECK(sim.ledger().D() == 0.0);
  }
  CHECK(std::abs(sim.ledger().residual()) <= 5e-3 * sim.ledger().E0());
  CHECK(sim.ledger().residual() ==
        doctest::Approx(sim.ledger().E() - sim.ledger().E0()).epsilon(1e-12));
}

TEST_CASE("dissipation is nondecreasing in the regularized mode") {
  RunConfig cfg = parse_config(R"({
    "grid": {"n": 128},
    "noise": {"pairs": 4, "amplitude": 0.5, "seed": 3},
    "run": {"t_end": 0.3, "mode": "regularized", "epsilon": 0.1},
    "init": {"kind": "riemann", "r_cos": [14.0], "s_sin": [0.0, 3.0]}
  })");
  const Setup setup = Setup::build(cfg);
  PathSimulator sim(setup, 0);
  double prev = 0.0;
  while (!sim.finished()) {
    sim.advance();
    CHECK(sim.ledger().D() >= prev);
    prev = sim.ledger().D();
  }
  CHECK(prev > 0.0);
  const double scale = sim.ledger().E0() + 2.0 * setup.q_integral * sim.ledger().t();
  CHECK(std::abs(sim.ledger().residual()) <= 0.05 * scale);
}

TEST_CASE("martingale has mean zero") {
  RunConfig cfg = parse_config(R"({
    "grid": {"n": 64},
    "noise": {"pairs": 4, "amplitude": 0.5, "seed": 12},
    "run": {"t_end": 0.25},
    "init": {"kind": "fourier", "u_cos": [0.05], "v_sin": [0.5]},
    "output": {"paths": 400}
  })");
  const Setup setup = Setup::build(cfg);
  const std::vector<PathResult> res = run_paths(setup, 400, 0, PathOptions{});
  std::vector<double> M;
  for (const PathResult& r : res) M.push_back(r.record.M_T);
  const Stats s = compute_stats(M);
  CHECK(s.count == 400);
  CHECK(s.variance > 0.0);
  CHECK(std::abs(s.mean) <= 4.0 * s.se);
}
