#include "svw/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "svw/error.hpp"

namespace svw {

double energy(const State& state) {
  double acc = 0.0;
  for (std::size_t i = 0; i < state.R.size(); ++i) {
    acc += state.R[i] * state.R[i] + state.S[i] * state.S[i];
  }
  return acc * state.R.grid().dx();
}

double dissipation_rate(const State& state, const Field& u, const SpeedModel& model,
                        const StepMode& mode) {
  if (!mode.is_regularized()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < state.R.size(); ++i) {
    const double R = state.R[i], S = state.S[i];
    const double sink = R * mode.chi(R) + S * mode.chi(S);
    if (sink != 0.0) acc += model.ctilde_prime(u[i]) * sink;
  }
  return 2.0 * acc * state.R.grid().dx();
}

EnergyLedger::EnergyLedger(const State& initial, double q_integral)
    : E0_(energy(initial)), q_integral_(q_integral) {
  current_ = {initial.t, E0_, 0.0, 0.0, 0.0};
}

void EnergyLedger::update(const State& before, const State& after, const Field& u_after,
                          const SpeedModel& model, const NoiseModel& noise,
                          const ModeIncrements& increments, const StepMode& mode) {
  if (after.exploded) return;
  const double dt = after.t - before.t;
  const double dx = before.R.grid().dx();
  const bool mollified = mode.is_regularized();

  double dM = 0.0;
  for (int k = 0; k < noise.mode_count(); ++k) {
    const Field& sigma = noise.mode(k, mollified);
    double proj = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      proj += (before.R[i] + before.S[i]) * sigma[i];
    }
    dM += proj * dx * increments.dbeta[static_cast<std::size_t>(k)];
  }

  current_.t = after.t;
  current_.E = energy(after);
  current_.D += dt * dissipation_rate(after, u_after, model, mode);
  current_.M += 2.0 * dM;
  current_.residual =
      current_.E + current_.D - E0_ - 2.0 * q_integral_ * (after.t) - current_.M;
  max_abs_residual_ = std::max(max_abs_residual_, std::fabs(current_.residual));
}

OleinikStats oleinik_stats(const State& state) {
  return {std::max(0.0, -state.R.min()), std::max(0.0, -state.S.min())};
}

double lp_weighted(const Field& R, const Field& S, const Field& weight, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    fail(ErrorCode::InvalidParameter, "alpha must lie in [0, 1)");
  }
  const bool half = alpha == 0.5;
  auto power = [&](double v) {
    const double a = std::fabs(v);
    return a * a * (half ? std::sqrt(a) : std::pow(a, alpha));
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (weight[i] == 0.0) continue;
    acc += weight[i] * (power(R[i]) + power(S[i]));
  }
  return acc * R.grid().dx();
}

double lp_weighted(const State& state, const Field& u, const SpeedModel& model, double alpha) {
  Field w(u.grid());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = model.c_prime(u[i]);
  return lp_weighted(state.R, state.S, w, alpha);
}

namespace {

// Jensen gaps of the truncated square about the sample mean, evaluated as
// averages of pointwise Bregman divergences so that
// 0 <= Delta_kappa <= Delta holds in floating point as well.
struct Gap {
  double delta;
  double delta_kappa;
  double ts;
};

Gap jensen_gaps(std::span<const double> v, double mean, double kappa) {
  double sum_full = 0.0, sum_trunc = 0.0, sum_slope = 0.0;
  const double qp_mean = q_kappa_prime(mean, kappa);
  for (double xi : v) {
    const double full = 0.5 * (xi - mean) * (xi - mean);
    // half Bregman divergence of ((. - kappa)^+)^2
    double tail;
    if (mean >= kappa) {
      tail = xi >= kappa ? full : 0.5 * (mean - kappa) * (mean + kappa - 2.0 * xi);
    } else {
      const double p = xi > kappa ? xi - kappa : 0.0;
      tail = 0.5 * p * p;
    }
    tail = std::clamp(tail, 0.0, full);
    sum_full += full;
    sum_trunc += full - tail;
    sum_slope += q_kappa_prime(xi, kappa) - qp_mean;
  }
  const double n = static_cast<double>(v.size());
  const double slope_gap = sum_slope / n;
  return {sum_full / n, sum_trunc / n, 0.5 * slope_gap * slope_gap};
}

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

WindowMoments sample_moments(std::span<const double> R, std::span<const double> S,
                             std::span<const double> kappas) {
  if (R.empty() || R.size() != S.size()) {
    fail(ErrorCode::EmptyWindow, "window selects no samples");
  }
  WindowMoments out;
  out.samples = R.size();
  const double n = static_cast<double>(R.size());
  out.mean_R = mean_of(R);
  out.mean_S = mean_of(S);
  double r2 = 0.0, s2 = 0.0, rs = 0.0;
  for (std::size_t j = 0; j < R.size(); ++j) {
    r2 += R[j] * R[j];
    s2 += S[j] * S[j];
    rs += R[j] * S[j];
  }
  out.mean_R2 = r2 / n;
  out.mean_S2 = s2 / n;
  out.mean_RS = rs / n;
  // Gap at kappa = +inf is the plain variance.
  out.delta = jensen_gaps(R, out.mean_R, INFINITY).delta;
  out.delta_check = jensen_gaps(S, out.mean_S, INFINITY).delta;
  for (double kappa : kappas) {
    const Gap gr = jensen_gaps(R, out.mean_R, kappa);
    const Gap gs = jensen_gaps(S, out.mean_S, kappa);
    out.kappas.push_back({kappa, gr.delta_kappa, gs.delta_kappa, gr.ts, gs.ts});
  }
  return out;
}

WindowMoments window_moments(std::span<const Snapshot> runs, const Window& window,
                             std::span<const double> kappas) {
  std::vector<double> R, S;
  for (const Snapshot& snap : runs) {
    if (snap.path < window.path_begin || snap.path >= window.path_end) continue;
    if (snap.t < window.t_min || snap.t > window.t_max) continue;
    const Grid& g = snap.R.grid();
    for (int i = 0; i < g.n(); ++i) {
      const double x = g.x(i);
      if (x < window.x_min || x > window.x_max) continue;
      R.push_back(snap.R[static_cast<std::size_t>(i)]);
      S.push_back(snap.S[static_cast<std::size_t>(i)]);
    }
  }
  if (R.empty()) fail(ErrorCode::EmptyWindow, "window selects no samples");
  WindowMoments out = sample_moments(R, S, kappas);
  out.window = window;
  return out;
}

}  // namespace svw
