#include "svw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svw/error.hpp"

namespace svw {

namespace {

inline double wrap_unit(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

}  // namespace

StepMode StepMode::regularized(double eps) {
  StepMode m;
  m.cutoff = Cutoff::Regularized;
  m.epsilon = eps;
  m.correction = true;
  m.validate();
  return m;
}

StepMode StepMode::regular() { return StepMode{}; }

void StepMode::validate() const {
  if (is_regularized()) {
    if (!(epsilon > 0.0)) fail(ErrorCode::InvalidParameter, "epsilon must be positive");
    if (!correction) {
      fail(ErrorCode::InvalidParameter, "the regularized system requires the correction term");
    }
  }
}

State init_state(const Field& u0, const Field& v0, const SpeedModel& model,
                 const StepMode& mode) {
  if (!(u0.grid() == v0.grid())) {
    fail(ErrorCode::GridMismatch, "u0 and v0 live on different grids");
  }
  Field Cu(u0.grid());
  for (std::size_t i = 0; i < u0.size(); ++i) Cu[i] = model.primitive(u0[i]);
  const Field cux = centered_difference(Cu);
  Field R(u0.grid()), S(u0.grid());
  for (std::size_t i = 0; i < u0.size(); ++i) {
    R[i] = v0[i] - cux[i];
    S[i] = v0[i] + cux[i];
  }
  return init_state_from_invariants(std::move(R), std::move(S), u0[0], mode);
}

State init_state_from_invariants(Field R0, Field S0, double u0_at_origin,
                                 const StepMode& mode) {
  if (!(R0.grid() == S0.grid())) {
    fail(ErrorCode::GridMismatch, "R0 and S0 live on different grids");
  }
  mode.validate();
  if (mode.is_regularized()) {
    R0 = mollify(R0, mode.epsilon);
    S0 = mollify(S0, mode.epsilon);
  }
  State s{std::move(R0), std::move(S0), 0.0, 0.0, false, std::nullopt};
  s.t = 0.0;
  s.boundary_accum = u0_at_origin;
  return s;
}

double theta(const State& state) {
  double acc = 0.0;
  for (std::size_t i = 0; i < state.R.size(); ++i) acc += state.S[i] - state.R[i];
  return 0.5 * acc * state.R.grid().dx();
}

Field reconstruct_u(const State& state, const SpeedModel& model) {
  const Grid& grid = state.R.grid();
  const double th = theta(state);
  Field integrand(grid);
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    integrand[i] = 0.5 * (state.S[i] - state.R[i]) - th;
  }
  const Field F = antiderivative_from_zero(integrand);
  const double base = model.primitive(state.boundary_accum);
  Field u(grid);
  u[0] = state.boundary_accum;
  // Newton warm-started from the linear extrapolation off the previous node.
  double y_prev = base;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double y = base + F[i];
    const double guess = u[i - 1] + (y - y_prev) / model.c(u[i - 1]);
    u[i] = model.inverse_primitive(y, guess);
    y_prev = y;
  }
  return u;
}

DerivedFields derived_fields(const State& state, const SpeedModel& model,
                             const StepMode& mode) {
  const Grid& grid = state.R.grid();
  const double th = mode.correction ? theta(state) : 0.0;
  const double th_full = theta(state);
  Field u = reconstruct_u(state, model);
  Field u_x(grid), zeta(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double R = state.R[i], S = state.S[i];
    const double c = model.c(u[i]);
    u_x[i] = (0.5 * (S - R) - th_full) / c;
    zeta[i] = model.ctilde_prime(u[i]) * (0.5 * (mode.chi(R) - mode.chi(S)) + (R + S) * th);
  }
  const double zeta_mean = periodic_integral(zeta);
  for (std::size_t i = 0; i < zeta.size(); ++i) zeta[i] -= zeta_mean;
  const Field Z = antiderivative_from_zero(zeta);
  Field xi(grid), u_t(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    xi[i] = Z[i] / model.c(u[i]);
    u_t[i] = 0.5 * (state.R[i] + state.S[i]) + xi[i];
  }
  return {std::move(u), std::move(u_x), std::move(u_t), std::move(xi)};
}

double max_time_step(const Grid& grid, const SpeedModel& model) {
  return grid.dx() / (2.0 * model.c2());
}

void check_time_step(const Grid& grid, const SpeedModel& model, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::CflViolation, "time step must be positive");
  const double bound = max_time_step(grid, model);
  if (dt > bound * (1.0 + 1e-12)) {
    fail(ErrorCode::CflViolation, "time step " + std::to_string(dt) +
                                      " exceeds dx/(2 c2) = " + std::to_string(bound));
  }
}

double default_explosion_threshold(const State& initial) {
  return 1e3 * (1.0 + std::max(initial.R.sup_norm(), initial.S.sup_norm()));
}

State step(const State& state, const Field& u, const SpeedModel& model,
           const NoiseModel& noise, const StepSettings& settings,
           const ModeIncrements& increments) {
  if (state.exploded) return state;
  const Grid& grid = state.R.grid();
  const double dt = settings.dt;
  check_time_step(grid, model, dt);
  const StepMode& mode = settings.mode;
  const bool mollified = mode.is_regularized();
  const double th = theta(state);
  const double th_src = mode.correction ? th : 0.0;

  Field c_node(grid), ctp_node(grid);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const SpeedModel::Sample sm = model.sample(u[k]);
    c_node[k] = sm.c;
    ctp_node[k] = sm.ctilde_prime;
  }
  // c(u) is interpolated directly at the midpoints; same order as
  // interpolating u and applying c.
  const PeriodicInterpolant c_at(c_node, settings.interpolation);
  const PeriodicInterpolant R_at(state.R, settings.interpolation);
  const PeriodicInterpolant S_at(state.S, settings.interpolation);
  const Field forcing = forcing_field(noise, increments, mollified);

  State next{Field(grid), Field(grid), 0.0, 0.0, false, std::nullopt};
  const int n = grid.n();
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double x = grid.x(i);
    const double ci = c_node[k];
    const double ctp = ctp_node[k];

    // foot points by the midpoint rule; R rides on +c, S on -c
    const double cR = c_at(wrap_unit(x - 0.5 * dt * ci));
    const double cS = c_at(wrap_unit(x + 0.5 * dt * ci));
    const double Rf = R_at(wrap_unit(x - dt * cR));
    const double Sf = S_at(wrap_unit(x + dt * cS));

    const double Ri = state.R[k], Si = state.S[k];
    const double srcR = ctp * (Rf * Rf - Si * Si - mode.chi(Rf) + 2.0 * Rf * th_src);
    const double srcS = ctp * (Sf * Sf - Ri * Ri - mode.chi(Sf) - 2.0 * Sf * th_src);
    next.R[k] = Rf + dt * srcR + forcing[k];
    next.S[k] = Sf + dt * srcS + forcing[k];
  }
  next.t = state.t + dt;
  next.boundary_accum = state.boundary_accum + dt * 0.5 * (state.R[0] + state.S[0]);

  const double threshold = settings.explosion_threshold > 0.0
                               ? settings.explosion_threshold
                               : default_explosion_threshold(state);
  if (!next.R.all_finite() || !next.S.all_finite() ||
      std::max(next.R.sup_norm(), next.S.sup_norm()) > threshold) {
    next.exploded = true;
    next.blowup_time = next.t;
  }
  return next;
}

State step(const State& state, const SpeedModel& model, const NoiseModel& noise,
           const StepSettings& settings, NoiseStream& stream, ModeIncrements* used) {
  ModeIncrements inc = stream.next(noise.mode_count(), settings.dt);
  State next = state.exploded ? state
                              : step(state, reconstruct_u(state, model), model, noise,
                                     settings, inc);
  if (used) *used = std::move(inc);
  return next;
}

std::optional<double> detect_explosion(const State& state, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidParameter, "threshold must be positive");
  if (state.blowup_time) return state.blowup_time;
  if (!state.R.all_finite() || !state.S.all_finite() ||
      std::max(state.R.sup_norm(), state.S.sup_norm()) > threshold) {
    return state.t;
  }
  return std::nullopt;
}

CharTracer start_tracer(int sign, double x0, const State& state, const Field& u,
                        Interpolation interpolation) {
  CharTracer tr;
  tr.sign = sign >= 0 ? 1 : -1;
  tr.x = wrap_unit(x0);
  tr.samples.push_back({state.t, tr.x, interpolate(state.R, tr.x, interpolation),
                        interpolate(state.S, tr.x, interpolation),
                        interpolate(u, tr.x, interpolation), NAN});
  return tr;
}

CharTracer start_carrying_tracer(int sign, double x0, const State& state, const Field& u,
                                 std::optional<double> initial_value,
                                 Interpolation interpolation) {
  CharTracer tr = start_tracer(sign, x0, state, u, interpolation);
  const TracerSample& s0 = tr.samples.back();
  tr.carries = true;
  tr.value = initial_value ? *initial_value : (tr.sign > 0 ? s0.R : s0.S);
  tr.u = s0.u;
  tr.samples.back().carried = tr.value;
  return tr;
}

namespace {

double move_tracer(CharTracer& tracer, const Field& u_before, const Field& u_after,
                   const SpeedModel& model, double dt, Interpolation interpolation) {
  const double s = tracer.sign;
  const double x_old = tracer.x;
  const double c0 = model.c(interpolate(u_before, x_old, interpolation));
  const double xh = wrap_unit(x_old + 0.5 * s * dt * c0);
  const double uh = 0.5 * (interpolate(u_before, xh, interpolation) +
                           interpolate(u_after, xh, interpolation));
  tracer.x = wrap_unit(x_old + s * dt * model.c(uh));
  return x_old;
}

void record(CharTracer& tracer, const State& after, const Field& u_after,
            Interpolation interpolation) {
  tracer.samples.push_back({after.t, tracer.x, interpolate(after.R, tracer.x, interpolation),
                            interpolate(after.S, tracer.x, interpolation),
                            interpolate(u_after, tracer.x, interpolation),
                            tracer.carries ? tracer.value : NAN});
}

}  // namespace

void advance_tracer(CharTracer& tracer, const State& before, const Field& u_before,
                    const State& after, const Field& u_after, const SpeedModel& model,
                    double dt, Interpolation interpolation) {
  (void)before;
  move_tracer(tracer, u_before, u_after, model, dt, interpolation);
  record(tracer, after, u_after, interpolation);
}

void advance_tracer(CharTracer& tracer, const State& before, const Field& u_before,
                    const State& after, const Field& u_after, const SpeedModel& model,
                    const NoiseModel& noise, const ModeIncrements& increments,
                    const StepSettings& settings) {
  const Interpolation interp = settings.interpolation;
  const double x_old = move_tracer(tracer, u_before, u_after, model, settings.dt, interp);
  if (tracer.carries && std::isfinite(tracer.value)) {
    const StepMode& mode = settings.mode;
    const double th = mode.correction ? theta(before) : 0.0;
    const double v = tracer.value;
    const double other = interpolate(tracer.sign > 0 ? before.S : before.R, x_old, interp);
    // In the regular system u moves along X+ with du/dt = S (R along X-);
    // carrying it keeps c~'(u) clear of grid artifacts once the peak is
    // under-resolved. The regularized system adds nonlocal corrections, so
    // there u is read from the grid.
    if (mode.is_regularized()) tracer.u = interpolate(u_before, x_old, interp);
    const double ctp = model.ctilde_prime(tracer.u);
    const double src = ctp * (v * v - other * other - mode.chi(v) +
                              (tracer.sign > 0 ? 2.0 : -2.0) * v * th);
    double kick = 0.0;
    const bool mollified = mode.is_regularized();
    for (int k = 0; k < noise.mode_count(); ++k) {
      kick += interpolate(noise.mode(k, mollified), tracer.x, interp) *
              increments.dbeta[static_cast<std::size_t>(k)];
    }
    tracer.value = v + settings.dt * src + kick;
    if (!mode.is_regularized()) tracer.u += settings.dt * other;
  }
  record(tracer, after, u_after, interp);
}

}  // namespace svw
