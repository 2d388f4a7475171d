#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "svw/error.hpp"
#include "svw/speed_model.hpp"

using svw::SpeedModel;

namespace {

// Adaptive Simpson, independent of the closed-form primitive.
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double quad(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-14, 50);
}

}  // namespace

TEST_CASE("speed of the default model") {
  const SpeedModel m = SpeedModel::tanh();
  CHECK(m.c(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.c(40.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m.c(1.0) == doctest::Approx(2.761594155955765).epsilon(1e-14));
  CHECK(m.c1() == 1.0);
  CHECK(m.c2() == 3.0);
}

TEST_CASE("ctilde prime") {
  const SpeedModel m = SpeedModel::tanh();
  CHECK(SpeedModel::constant(2.0).ctilde_prime(0.7) == 0.0);
  CHECK(m.ctilde_prime(0.0) == doctest::Approx(0.125).epsilon(1e-15));
  const double sech2 = 1.0 / (std::cosh(2.0) * std::cosh(2.0));
  CHECK(m.ctilde_prime(2.0) == doctest::Approx(sech2 / (4.0 * (2.0 + std::tanh(2.0)))));
  CHECK(m.ctilde_prime(2.0) == doctest::Approx(0.006048).epsilon(1e-4));
}

TEST_CASE("primitive against quadrature") {
  const SpeedModel m = SpeedModel::tanh();
  const auto c = [&](double s) { return 2.0 + std::tanh(s); };
  CHECK(m.primitive(0.0) == 0.0);
  const double q1 = quad(c, 0.0, 1.0);
  const double qm1 = -quad(c, -1.0, 0.0);
  CHECK(q1 == doctest::Approx(2.433781).epsilon(1e-6));
  CHECK(m.primitive(1.0) == doctest::Approx(q1).epsilon(1e-12));
  CHECK(m.primitive(1.0) + m.primitive(-1.0) == doctest::Approx(q1 + qm1).epsilon(1e-10));
  CHECK(m.primitive(1.0) + m.primitive(-1.0) == doctest::Approx(0.867562).epsilon(1e-6));
  for (double r : {-7.0, -0.4, 2.5, 30.0}) {
    CHECK(m.primitive(r) == doctest::Approx(r >= 0 ? quad(c, 0.0, r) : -quad(c, r, 0.0))
                                .epsilon(1e-11));
  }
}

TEST_CASE("inverse primitive") {
  const SpeedModel m = SpeedModel::tanh();
  CHECK(m.inverse_primitive(0.0) == 0.0);
  for (double r : {-5.0, -1.0, 0.3, 5.0}) {
    CHECK(std::abs(m.inverse_primitive(m.primitive(r)) - r) <= 1e-12);
  }
  CHECK(m.inverse_primitive(2.433781) == doctest::Approx(1.0).epsilon(1e-6));
  for (double y : {-1e4, -3.3, 1e-9, 17.0, 1e5}) {
    CHECK(std::abs(m.primitive(m.inverse_primitive(y)) - y) <= 1e-12 * std::max(1.0, std::abs(y)));
    CHECK(std::abs(m.primitive(m.inverse_primitive(y, -50.0)) - y) <=
          1e-12 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("cut-off") {
  CHECK(svw::chi_eps(1.9, 0.5) == 0.0);
  CHECK(svw::chi_eps(3.0, 0.5) == 1.0);
  CHECK(svw::chi_eps(25.0, 0.1) == doctest::Approx(225.0).epsilon(1e-14));
}

TEST_CASE("cut-off properties") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> xi_dist(-50.0, 50.0);
  for (double eps : {0.5, 0.1, 0.03}) {
    double prev = 0.0;
    for (double xi = -50.0; xi <= 50.0; xi += 0.01) {
      const double chi = svw::chi_eps(xi, eps);
      CHECK(chi >= prev);
      prev = chi;
    }
    for (int k = 0; k < 2000; ++k) {
      const double xi = xi_dist(gen);
      const double chi = svw::chi_eps(xi, eps);
      CHECK(chi >= 0.0);
      CHECK(xi * chi >= 0.0);
      CHECK(chi <= xi * xi);
      if (xi >= 1.0 / eps) CHECK(chi <= eps * xi * chi * (1.0 + 1e-15));
    }
  }
}

TEST_CASE("primitive bounds and ctilde range") {
  const SpeedModel m = SpeedModel::tanh();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-20.0, 20.0);
  for (int k = 0; k < 2000; ++k) {
    double a = d(gen), b = d(gen);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const double diff = m.primitive(b) - m.primitive(a);
    CHECK(diff > 0.0);
    CHECK(diff >= m.c1() * (b - a) * (1.0 - 1e-12));
    CHECK(diff <= m.c2() * (b - a) * (1.0 + 1e-12));
    const double ct = m.ctilde_prime(a);
    CHECK(ct >= 0.0);
    CHECK(ct <= m.c3() / (4.0 * m.c1()));
  }
}

TEST_CASE("speed table") {
  std::vector<double> u, c;
  for (int i = -20; i <= 20; ++i) {
    u.push_back(0.25 * i);
    c.push_back(2.0 + std::tanh(0.25 * i));
  }
  const SpeedModel m = SpeedModel::table(u, c);
  CHECK(m.c(0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.c(0.3) == doctest::Approx(2.0 + std::tanh(0.3)).epsilon(1e-3));
  CHECK(m.c(100.0) == doctest::Approx(c.back()));
  double prev = m.c(-10.0);
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    CHECK(m.c(x) >= prev - 1e-15);
    CHECK(m.c_prime(x) >= 0.0);
    prev = m.c(x);
  }
  for (double r : {-8.0, -1.0, 0.7, 6.0}) {
    CHECK(std::abs(m.inverse_primitive(m.primitive(r)) - r) <= 1e-11);
  }
  CHECK_THROWS_AS(SpeedModel::table({0.0, 1.0}, {2.0, 1.0}), svw::Error);
  CHECK_THROWS_AS(SpeedModel::table({0.0, 0.0}, {2.0, 2.0}), svw::Error);
  CHECK_THROWS_AS(SpeedModel::tanh(1.0, 1.0), svw::Error);
}
