#include "svw/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "svw/error.hpp"
#include "svw/rng.hpp"

namespace svw {

double rng::standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                            std::uint64_t mode) {
  const double u1 = to_open_unit(key_hash(seed, path, step, mode, 0));
  const double u2 = to_open_unit(key_hash(seed, path, step, mode, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Squared W^{1,inf} norm of one pair (cos and sin member) at wavenumber k.
double pair_w1inf_squared(double gamma, int k) {
  const double one = gamma * std::sqrt(2.0) * (1.0 + 2.0 * std::numbers::pi * k);
  return 2.0 * one * one;
}

}  // namespace

NoiseModel NoiseModel::build(const Grid& grid, const NoiseParams& params, double eps) {
  if (params.pairs < 0) fail(ErrorCode::InvalidParameter, "noise pair count must be >= 0");
  if (!(params.amplitude >= 0.0)) {
    fail(ErrorCode::InvalidParameter, "noise amplitude must be >= 0");
  }
  if (!(params.decay >= 3.0)) {
    fail(ErrorCode::InvalidParameter,
         "noise decay exponent must be >= 3 (got " + std::to_string(params.decay) + ")");
  }
  if (2 * params.pairs >= grid.n()) {
    fail(ErrorCode::InvalidParameter, "noise wavenumbers exceed the grid Nyquist limit");
  }
  NoiseModel m(grid, params);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 1; k <= params.pairs; ++k) {
    const double g = m.gamma(k) * std::sqrt(2.0);
    m.modes_.push_back(Field::sample(grid, [&](double x) { return g * std::cos(two_pi * k * x); }));
    m.modes_.push_back(Field::sample(grid, [&](double x) { return g * std::sin(two_pi * k * x); }));
    m.q0_ += pair_w1inf_squared(m.gamma(k), k);
  }
  for (const Field& s : m.modes_) {
    m.mollified_.push_back(eps > 0.0 ? mollify(s, eps) : s);
  }
  for (std::size_t j = 0; j < m.modes_.size(); ++j) {
    for (std::size_t i = 0; i < m.q_.size(); ++i) {
      m.q_[i] += m.modes_[j][i] * m.modes_[j][i];
      m.q_eps_[i] += m.mollified_[j][i] * m.mollified_[j][i];
    }
  }
  m.q_integral_ = periodic_integral(m.q_);
  m.q_eps_integral_ = periodic_integral(m.q_eps_);
  return m;
}

double NoiseModel::gamma(int k) const {
  return params_.amplitude * std::pow(static_cast<double>(k), -params_.decay);
}

double NoiseModel::truncation_tail_ratio() const {
  if (params_.amplitude == 0.0) return 0.0;
  if (q0_ == 0.0) return std::numeric_limits<double>::infinity();
  // Terms decay like k^(2-2p) <= k^-4; sum directly far out and close the
  // remainder with the integral bound.
  double tail = 0.0;
  const int last = params_.pairs + 100000;
  for (int k = last; k > params_.pairs; --k) tail += pair_w1inf_squared(gamma(k), k);
  const double expo = 2.0 * params_.decay - 2.0;
  tail += pair_w1inf_squared(gamma(last), last) * last / (expo - 1.0);
  return tail / q0_;
}

ModeIncrements NoiseStream::increments(std::uint64_t step, int modes, double dt) const {
  ModeIncrements inc;
  inc.dt = dt;
  inc.dbeta.resize(static_cast<std::size_t>(modes));
  const double scale = std::sqrt(dt);
  for (int k = 0; k < modes; ++k) {
    inc.dbeta[static_cast<std::size_t>(k)] =
        scale * rng::standard_normal(seed_, path_, step, static_cast<std::uint64_t>(k));
  }
  return inc;
}

Field forcing_field(const NoiseModel& noise, const ModeIncrements& inc, bool mollified) {
  Field out(noise.grid());
  for (int k = 0; k < noise.mode_count(); ++k) {
    const Field& s = noise.mode(k, mollified);
    const double b = inc.dbeta[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s[i] * b;
  }
  return out;
}

SampledIncrement sample_increment(const NoiseModel& noise, double dt, NoiseStream& stream,
                                  bool mollified) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "time step must be positive");
  ModeIncrements inc = stream.next(noise.mode_count(), dt);
  Field f = forcing_field(noise, inc, mollified);
  return {std::move(inc), std::move(f)};
}

}  // namespace svw
