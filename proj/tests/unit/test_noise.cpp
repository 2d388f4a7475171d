#include <cmath>

#include "doctest.h"
#include "svw/error.hpp"
#include "svw/grid.hpp"
#include "svw/noise.hpp"

using svw::Grid;
using svw::NoiseModel;
using svw::NoiseParams;

namespace {

NoiseParams params(int pairs, double amplitude = 0.25, double decay = 3.0) {
  NoiseParams p;
  p.pairs = pairs;
  p.amplitude = amplitude;
  p.decay = decay;
  return p;
}

}  // namespace

TEST_CASE("no modes means no forcing") {
  const Grid g(64);
  const NoiseModel nm = NoiseModel::build(g, params(0), 0.1);
  CHECK(nm.mode_count() == 0);
  CHECK(nm.q(false).sup_norm() == 0.0);
  CHECK(nm.q0() == 0.0);
  svw::NoiseStream stream(1, 0);
  const auto inc = svw::sample_increment(nm, 0.01, stream, true);
  CHECK(inc.forcing.sup_norm() == 0.0);
}

TEST_CASE("variance field for one and two pairs") {
  const Grid g(128);
  const NoiseModel one = NoiseModel::build(g, params(1), 0.0);
  CHECK(one.mode_count() == 2);
  for (int i = 0; i < g.n(); ++i) CHECK(one.q(false)[i] == doctest::Approx(0.125));
  const NoiseModel two = NoiseModel::build(g, params(2), 0.0);
  const double expected = 2.0 * (0.0625 + 0.0625 / 64.0);
  CHECK(expected == doctest::Approx(0.126953).epsilon(1e-6));
  for (int i = 0; i < g.n(); ++i) CHECK(two.q(false)[i] == doctest::Approx(expected));
  CHECK(two.q_integral(false) == doctest::Approx(expected));
}

TEST_CASE("q is the sum of squared modes") {
  const Grid g(256);
  const NoiseModel nm = NoiseModel::build(g, params(8), 0.1);
  for (bool moll : {false, true}) {
    for (int i = 0; i < g.n(); i += 7) {
      double s = 0.0;
      for (int k = 0; k < nm.mode_count(); ++k) s += nm.mode(k, moll)[i] * nm.mode(k, moll)[i];
      CHECK(nm.q(moll)[i] == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("parameter checks") {
  const Grid g(64);
  CHECK_THROWS_AS(NoiseModel::build(g, params(2, 0.25, 2.5), 0.0), svw::Error);
  CHECK_THROWS_AS(NoiseModel::build(g, params(2, -0.1, 3.0), 0.0), svw::Error);
  CHECK_THROWS_AS(NoiseModel::build(g, params(-1), 0.0), svw::Error);
}

TEST_CASE("mollified modes are dominated and converge") {
  const Grid g(512);
  double prev_gap = 1e300;
  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    const NoiseModel nm = NoiseModel::build(g, params(8), eps);
    for (int k = 0; k < nm.mode_count(); ++k) {
      CHECK(nm.mode(k, true).sup_norm() <= nm.mode(k, false).sup_norm() * (1.0 + 1e-14));
    }
    CHECK(nm.q0() >= nm.q_integral(false));
    double gap = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      gap = std::max(gap, std::abs(nm.q(true)[i] - nm.q(false)[i]));
    }
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.01 * NoiseModel::build(g, params(8), 0.0).q(false).sup_norm());
}

TEST_CASE("truncation tail of the default noise is small") {
  const NoiseModel nm = NoiseModel::build(Grid(256), params(8), 0.0);
  CHECK(nm.truncation_tail_ratio() > 0.0);
  CHECK(nm.truncation_tail_ratio() < 1e-3);
}

TEST_CASE("Brownian increment moments") {
  const int draws = 100000;
  const double dt = 0.004;
  svw::NoiseStream stream(42, 3);
  for (int mode : {0, 5}) {
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double b = stream.increments(k, 6, dt).dbeta[mode];
      sum += b;
      sum2 += b * b;
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / draws));
    CHECK(var == doctest::Approx(dt).epsilon(0.05));
  }
}

TEST_CASE("streams are counter based") {
  svw::NoiseStream a(9, 1), b(9, 1), c(9, 2);
  const auto x = a.increments(17, 4, 0.01);
  for (int k = 0; k < 17; ++k) b.next(4, 0.01);
  const auto y = b.next(4, 0.01);
  const auto z = c.increments(17, 4, 0.01);
  CHECK(x.dbeta == y.dbeta);
  CHECK(x.dbeta != z.dbeta);
}

TEST_CASE("pointwise Ito isometry of the forcing") {
  const Grid g(64);
  const NoiseModel nm = NoiseModel::build(g, params(4, 0.5), 0.1);
  const double dt = 0.01;
  const int draws = 20000;
  svw::NoiseStream stream(5, 0);
  std::vector<double> sum2(static_cast<std::size_t>(g.n()), 0.0);
  for (int k = 0; k < draws; ++k) {
    const auto inc = svw::sample_increment(nm, dt, stream, true);
    for (int i = 0; i < g.n(); ++i) sum2[i] += inc.forcing[i] * inc.forcing[i];
  }
  for (int i = 0; i < g.n(); i += 8) {
    CHECK(sum2[i] / draws == doctest::Approx(nm.q(true)[i] * dt).epsilon(0.05));
  }
}
