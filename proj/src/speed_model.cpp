#include "svw/speed_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "svw/error.hpp"

namespace svw {

namespace {

// log(cosh(r)) without overflow for large |r|.
double log_cosh(double r) {
  const double a = std::fabs(r);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double sech2(double u) {
  const double t = std::tanh(u);
  return 1.0 - t * t;
}

// Fritsch-Carlson slopes for samples (x, y) with zero end slopes, so that the
// constant extension outside the table stays C^1.
std::vector<double> monotone_slopes(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> delta(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    delta[j] = (y[j + 1] - y[j]) / (x[j + 1] - x[j]);
  }
  std::vector<double> m(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (delta[j - 1] * delta[j] > 0.0) {
      m[j] = 0.5 * (delta[j - 1] + delta[j]);
    }
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (delta[j] == 0.0) {
      m[j] = 0.0;
      m[j + 1] = 0.0;
      continue;
    }
    const double a = m[j] / delta[j];
    const double b = m[j + 1] / delta[j];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[j] = tau * a * delta[j];
      m[j + 1] = tau * b * delta[j];
    }
  }
  return m;
}

}  // namespace

SpeedModel SpeedModel::tanh(double c_base, double c_amp) {
  if (!(c_amp >= 0.0) || !(c_base > c_amp)) {
    fail(ErrorCode::InvalidParameter,
         "tanh speed needs c_base > c_amp >= 0 (got c_base=" +
             std::to_string(c_base) + ", c_amp=" + std::to_string(c_amp) + ")");
  }
  if (c_amp == 0.0) return constant(c_base);
  SpeedModel m;
  m.kind_ = SpeedKind::Tanh;
  m.c_base_ = c_base;
  m.c_amp_ = c_amp;
  m.c1_ = c_base - c_amp;
  m.c2_ = c_base + c_amp;
  m.c3_ = c_amp;
  return m;
}

SpeedModel SpeedModel::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    fail(ErrorCode::InvalidParameter, "constant speed must be positive");
  }
  SpeedModel m;
  m.kind_ = SpeedKind::Constant;
  m.c_base_ = c;
  m.c_amp_ = 0.0;
  m.c1_ = c;
  m.c2_ = c;
  m.c3_ = 0.0;
  return m;
}

SpeedModel SpeedModel::table(std::vector<double> u, std::vector<double> c) {
  if (u.size() != c.size() || u.size() < 2) {
    fail(ErrorCode::InvalidParameter, "speed table needs >= 2 (u, c) samples");
  }
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j]) || !std::isfinite(c[j]) || !(c[j] > 0.0)) {
      fail(ErrorCode::InvalidParameter, "speed table values must be finite and c > 0");
    }
    if (j > 0 && !(u[j] > u[j - 1])) {
      fail(ErrorCode::InvalidParameter, "speed table u must be strictly increasing");
    }
    if (j > 0 && c[j] < c[j - 1]) {
      fail(ErrorCode::InvalidParameter,
           "speed table c must be nondecreasing (c' >= 0 is required)");
    }
  }
  SpeedModel m;
  m.kind_ = SpeedKind::Table;
  m.slopes_ = monotone_slopes(u, c);
  m.nodes_ = std::move(u);
  m.values_ = std::move(c);
  m.c1_ = m.values_.front();
  m.c2_ = m.values_.back();
  m.c_base_ = 0.5 * (m.c1_ + m.c2_);
  m.c_amp_ = 0.5 * (m.c2_ - m.c1_);

  // c3: the derivative of each Hermite piece is a quadratic in t; check the
  // end points and the vertex.
  double c3 = 0.0;
  m.cumulative_.assign(m.nodes_.size(), 0.0);
  for (std::size_t j = 0; j + 1 < m.nodes_.size(); ++j) {
    const double h = m.nodes_[j + 1] - m.nodes_[j];
    const double y0 = m.values_[j], y1 = m.values_[j + 1];
    const double m0 = m.slopes_[j], m1 = m.slopes_[j + 1];
    // p'(t)/h-scaled: d/dx p = (a t^2 + b t + m0)
    const double a = 6.0 * (y0 - y1) / h + 3.0 * (m0 + m1);
    const double b = 6.0 * (y1 - y0) / h - 4.0 * m0 - 2.0 * m1;
    c3 = std::max({c3, m0, m1});
    if (a != 0.0) {
      const double tv = -b / (2.0 * a);
      if (tv > 0.0 && tv < 1.0) c3 = std::max(c3, a * tv * tv + b * tv + m0);
    }
    m.cumulative_[j + 1] =
        m.cumulative_[j] + h * 0.5 * (y0 + y1) + h * h * (m0 - m1) / 12.0;
  }
  m.c3_ = c3;
  m.offset_at_zero_ = m.table_antiderivative(0.0);
  return m;
}

SpeedModel SpeedModel::table_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open speed table " + path.string());
  std::vector<double> u, c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) {
      if (u.empty()) continue;  // header
      fail(ErrorCode::ConfigInvalid, "malformed speed table row: " + line);
    }
    u.push_back(a);
    c.push_back(b);
  }
  return table(std::move(u), std::move(c));
}

double SpeedModel::table_c(double u) const {
  if (u <= nodes_.front()) return values_.front();
  if (u >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double h = nodes_[j + 1] - nodes_[j];
  const double t = (u - nodes_[j]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * values_[j] + (t3 - 2 * t2 + t) * h * slopes_[j] +
                   (-2 * t3 + 3 * t2) * values_[j + 1] + (t3 - t2) * h * slopes_[j + 1];
  return std::clamp(v, c1_, c2_);
}

double SpeedModel::table_c_prime(double u) const {
  if (u <= nodes_.front() || u >= nodes_.back()) return 0.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double h = nodes_[j + 1] - nodes_[j];
  const double t = (u - nodes_[j]) / h;
  const double t2 = t * t;
  const double d = (6 * t2 - 6 * t) * values_[j] / h + (3 * t2 - 4 * t + 1) * slopes_[j] +
                   (-6 * t2 + 6 * t) * values_[j + 1] / h + (3 * t2 - 2 * t) * slopes_[j + 1];
  return std::max(d, 0.0);
}

double SpeedModel::table_antiderivative(double u) const {
  if (u <= nodes_.front()) return (u - nodes_.front()) * values_.front();
  if (u >= nodes_.back()) {
    return cumulative_.back() + (u - nodes_.back()) * values_.back();
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double h = nodes_[j + 1] - nodes_[j];
  const double t = (u - nodes_[j]) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  const double part = (t - t3 + 0.5 * t4) * values_[j] +
                      (0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4) * h * slopes_[j] +
                      (t3 - 0.5 * t4) * values_[j + 1] +
                      (-t3 / 3.0 + 0.25 * t4) * h * slopes_[j + 1];
  return cumulative_[j] + h * part;
}

double SpeedModel::c(double u) const {
  switch (kind_) {
    case SpeedKind::Tanh: return c_base_ + c_amp_ * std::tanh(u);
    case SpeedKind::Constant: return c_base_;
    case SpeedKind::Table: return table_c(u);
  }
  return c_base_;
}

double SpeedModel::c_prime(double u) const {
  switch (kind_) {
    case SpeedKind::Tanh: return c_amp_ * sech2(u);
    case SpeedKind::Constant: return 0.0;
    case SpeedKind::Table: return table_c_prime(u);
  }
  return 0.0;
}

double SpeedModel::primitive(double r) const {
  switch (kind_) {
    case SpeedKind::Tanh: return c_base_ * r + c_amp_ * log_cosh(r);
    case SpeedKind::Constant: return c_base_ * r;
    case SpeedKind::Table: return table_antiderivative(r) - offset_at_zero_;
  }
  return c_base_ * r;
}

double SpeedModel::inverse_primitive(double y) const {
  return inverse_primitive(y, y / c(0.0));
}

SpeedModel::Sample SpeedModel::sample(double u) const {
  if (kind_ == SpeedKind::Tanh) {
    const double th = std::tanh(u);
    const double cv = c_base_ + c_amp_ * th;
    const double cp = c_amp_ * (1.0 - th) * (1.0 + th);
    return {cv, cp / (4.0 * cv)};
  }
  const double cv = c(u);
  return {cv, c_prime(u) / (4.0 * cv)};
}

double SpeedModel::inverse_primitive(double y, double guess) const {
  if (y == 0.0) return 0.0;
  if (kind_ == SpeedKind::Constant) return y / c_base_;
  const double tol = 1e-12 * std::max(1.0, std::fabs(y));
  // C is odd-bracketed: c1 |r| <= |C(r)| <= c2 |r| with sign(C(r)) = sign(r).
  double lo = y > 0 ? y / c2_ : y / c1_;
  double hi = y > 0 ? y / c1_ : y / c2_;
  double r = std::clamp(guess, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = primitive(r) - y;
    if (std::fabs(f) <= tol) return r;
    if (f > 0.0) {
      hi = r;
    } else {
      lo = r;
    }
    double next = r - f / c(r);
    // Newton error bound |next - r*| <= c3/(2 c1) (f/c1)^2; accept without a
    // further evaluation once it maps to a residual below tol.
    const double err = 0.5 * c3_ / c1_ * (f / c1_) * (f / c1_);
    if (next > lo && next < hi && err * c2_ <= 0.5 * tol) return next;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(r)) {
      // Bracket collapsed to rounding level; accept if the residual is at
      // the floating-point floor of C itself.
      const double floor_tol =
          8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(y));
      if (std::fabs(primitive(next) - y) <= std::max(tol, floor_tol)) return next;
      break;
    }
    r = next;
  }
  fail(ErrorCode::IterationFailure,
       "inverse primitive did not converge for y=" + std::to_string(y));
}

}  // namespace svw
