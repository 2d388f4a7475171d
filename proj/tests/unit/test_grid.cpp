#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "svw/error.hpp"
#include "svw/grid.hpp"

using svw::Field;
using svw::Grid;
using svw::Interpolation;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field random_field(Grid g, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Field f(g);
  for (int i = 0; i < g.n(); ++i) f[i] = d(gen);
  return f;
}

// Fourier multiplier of the continuous bump kernel at wavenumber 1, by
// dense midpoint quadrature on (-1, 1).
double kernel_multiplier(double eps) {
  const int m = 200000;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < m; ++j) {
    const double y = -1.0 + (j + 0.5) * 2.0 / m;
    const double rho = std::exp(-1.0 / (1.0 - y * y));
    num += rho * std::cos(kTwoPi * eps * y);
    den += rho;
  }
  return num / den;
}

}  // namespace

TEST_CASE("grid shape") {
  CHECK(Grid(8).dx() == 0.125);
  CHECK(Grid(64).x(16) == 0.25);
  CHECK_THROWS_AS(Grid(6), svw::Error);
  CHECK_THROWS_AS(Grid(33), svw::Error);
  CHECK_THROWS_AS(Field(Grid(8), std::vector<double>(7)), svw::Error);
  Field f = Field::sample(Grid(8), [](double x) { return x; });
  CHECK(f.wrap(-1) == f[7]);
  CHECK(f.wrap(9) == f[1]);
}

TEST_CASE("mollify basics") {
  const Grid g(256);
  const Field one(g, 1.0);
  const Field m1 = svw::mollify(one, 0.1);
  for (int i = 0; i < g.n(); ++i) CHECK(m1[i] == doctest::Approx(1.0).epsilon(1e-15));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Field f = random_field(g, seed);
    for (double eps : {0.3, 0.05, 0.01}) {
      const Field m = svw::mollify(f, eps);
      CHECK(std::abs(svw::periodic_integral(m) - svw::periodic_integral(f)) <= 1e-14);
      CHECK(m.max() <= f.max() + 1e-15);
      CHECK(m.min() >= f.min() - 1e-15);
    }
  }
  CHECK_THROWS_AS(svw::mollify(one, 0.0), svw::Error);
  double total = 0.0;
  for (double w : svw::mollifier_weights(g, 0.1)) {
    CHECK(w >= 0.0);
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mollify damps a harmonic by the kernel multiplier") {
  const Grid g(1024);
  const Field f = Field::sample(g, [](double x) { return std::cos(kTwoPi * x); });
  double prev = 1.0;
  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    const double amp = svw::mollify(f, eps)[0];
    CHECK(amp == doctest::Approx(kernel_multiplier(eps)).epsilon(1e-6));
    CHECK(amp < prev);
    prev = amp;
  }
  CHECK(svw::mollify(f, 0.01)[0] > 0.9995);
}

TEST_CASE("periodic integral") {
  const Grid g(64);
  CHECK(svw::periodic_integral(Field(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const Field c = Field::sample(g, [](double x) { return std::cos(kTwoPi * x); });
  const Field c2 = Field::sample(g, [](double x) { return std::pow(std::cos(kTwoPi * x), 2); });
  CHECK(std::abs(svw::periodic_integral(c)) <= 1e-14);
  CHECK(std::abs(svw::periodic_integral(c2) - 0.5) <= 1e-14);
}

TEST_CASE("antiderivative") {
  const Grid g(64);
  const Field z = svw::antiderivative_from_zero(Field(g, 0.0));
  CHECK(z.sup_norm() == 0.0);
  const Field two = svw::antiderivative_from_zero(Field(g, 2.0));
  for (int i = 0; i < g.n(); ++i) CHECK(two[i] == doctest::Approx(2.0 * g.x(i)).epsilon(1e-14));
  // a zero-mean field integrates to a periodic antiderivative
  for (std::uint64_t seed : {4u, 5u}) {
    Field f = random_field(g, seed);
    const double mean = svw::periodic_integral(f);
    for (int i = 0; i < g.n(); ++i) f[i] -= mean;
    const Field F = svw::antiderivative_from_zero(f);
    CHECK(F[0] == 0.0);
    const double wrap = F[g.n() - 1] + 0.5 * (f[g.n() - 1] + f[0]) * g.dx();
    CHECK(std::abs(wrap) <= 1e-13);
  }
}

TEST_CASE("centered difference is second order") {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const Grid g(n);
    const Field f = Field::sample(g, [](double x) { return std::sin(kTwoPi * x); });
    const Field d = svw::centered_difference(f);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] - kTwoPi * std::cos(kTwoPi * g.x(i))));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
    prev = err;
  }
}

TEST_CASE("interpolation examples") {
  const Grid g(40);
  const Field f = random_field(g, 8);
  for (Interpolation k : {Interpolation::Cubic, Interpolation::Linear}) {
    for (int i = 0; i < g.n(); ++i) CHECK(std::abs(svw::interpolate(f, g.x(i), k) - f[i]) <= 1e-14);
    CHECK(svw::interpolate(f, 1.0 + g.x(3), k) == doctest::Approx(f[3]));
    CHECK(svw::interpolate(f, -g.x(3), k) == doctest::Approx(f[g.n() - 3]));
    CHECK(svw::interpolate(Field(g, 1.5), 0.123, k) == 1.5);
  }
  const Field line = Field::sample(g, [](double x) { return 3.0 * x; });
  CHECK(svw::interpolate(line, 0.51, Interpolation::Linear) == doctest::Approx(1.53));
}

TEST_CASE("cubic interpolation of a sine converges") {
  const double target = std::sin(0.75 * std::numbers::pi);
  CHECK(target == doctest::Approx(0.707107).epsilon(1e-6));
  double prev = 0.0;
  for (int n : {10, 20, 40, 80, 160}) {
    const Grid g(n);
    const Field f = Field::sample(g, [](double x) { return std::sin(kTwoPi * x); });
    const double err = std::abs(svw::interpolate(f, 0.375) - target);
    CHECK(err <= std::pow(kTwoPi, 4) * std::pow(g.dx(), 3));
    if (prev > 0.0) CHECK(prev / err > 7.0);
    prev = err;
  }
}

TEST_CASE("interpolation stays inside the bracketing values") {
  const Grid g(32);
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> xd(-2.0, 3.0);
  for (std::uint64_t seed : {30u, 31u, 32u}) {
    Field f = random_field(g, seed);
    f[5] = 40.0;  // an isolated spike
    const svw::PeriodicInterpolant p(f, Interpolation::Cubic);
    for (int k = 0; k < 4000; ++k) {
      const double x = xd(gen);
      const double y = x - std::floor(x);
      const int j = static_cast<int>(std::floor(y / g.dx())) % g.n();
      const double lo = std::min(f.wrap(j), f.wrap(j + 1));
      const double hi = std::max(f.wrap(j), f.wrap(j + 1));
      for (Interpolation kind : {Interpolation::Cubic, Interpolation::Linear}) {
        const double v = svw::interpolate(f, x, kind);
        CHECK(v >= lo - 1e-14);
        CHECK(v <= hi + 1e-14);
      }
      CHECK(p(x) == doctest::Approx(svw::interpolate(f, x)).epsilon(1e-13));
    }
  }
}
