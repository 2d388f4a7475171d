#ifndef SVW_DYNAMICS_HPP_
#define SVW_DYNAMICS_HPP_

#include <optional>
#include <vector>

#include "svw/grid.hpp"
#include "svw/noise.hpp"
#include "svw/speed_model.hpp"

namespace svw {

// Which system is advanced: the regularized one (cut-off chi_eps, mollified
// data and noise) or the original one (no cut-off, raw noise).
struct StepMode {
  enum class Cutoff { Regularized, Off };

  Cutoff cutoff = Cutoff::Off;
  double epsilon = 0.0;
  // Keeps the 2 R Theta / -2 S Theta source terms. Must be on when the
  // cut-off is on.
  bool correction = true;

  static StepMode regularized(double eps);
  static StepMode regular();

  bool is_regularized() const { return cutoff == Cutoff::Regularized; }
  double chi(double xi) const { return is_regularized() ? chi_eps(xi, epsilon) : 0.0; }
  void validate() const;
};

// Riemann invariants R = u_t - c(u) u_x, S = u_t + c(u) u_x on the grid,
// plus a(t) = u(t, 0), which closes the reconstruction of u.
struct State {
  Field R;
  Field S;
  double t = 0.0;
  double boundary_accum = 0.0;
  bool exploded = false;
  std::optional<double> blowup_time;
};

// R0 = v0 - c(u0) u0', S0 = v0 + c(u0) u0'. The product c(u0) u0' is taken
// as the centered difference of C(u0), which keeps int (S0 - R0) = 0 exact
// on the grid for periodic u0. Mollified in regularized mode.
State init_state(const Field& u0, const Field& v0, const SpeedModel& model,
                 const StepMode& mode);

// Direct initialization from invariants; mean(S0) must equal mean(R0).
State init_state_from_invariants(Field R0, Field S0, double u0_at_origin,
                                 const StepMode& mode);

// Theta = int (S - R)/2 dx.
double theta(const State& state);

// u(x) = C^-1( C(a) + int_0^x [(S - R)/2 - Theta] dy ).
Field reconstruct_u(const State& state, const SpeedModel& model);

struct DerivedFields {
  Field u;
  Field u_x;
  Field u_t;
  Field xi;  // u_t - (R + S)/2
};

DerivedFields derived_fields(const State& state, const SpeedModel& model,
                             const StepMode& mode);

struct StepSettings {
  double dt = 0.0;
  StepMode mode;
  Interpolation interpolation = Interpolation::Cubic;
  double explosion_threshold = 0.0;
};

// Largest admissible step dx / (2 c2).
double max_time_step(const Grid& grid, const SpeedModel& model);
// Throws Error(CflViolation) if dt exceeds max_time_step.
void check_time_step(const Grid& grid, const SpeedModel& model, double dt);

// Default explosion level 1e3 (1 + sup(|R0|, |S0|)).
double default_explosion_threshold(const State& initial);

// One semi-Lagrangian Euler-Maruyama step. `u` must be reconstruct_u(state).
// Exploded states are returned unchanged.
State step(const State& state, const Field& u, const SpeedModel& model,
           const NoiseModel& noise, const StepSettings& settings,
           const ModeIncrements& increments);

State step(const State& state, const SpeedModel& model, const NoiseModel& noise,
           const StepSettings& settings, NoiseStream& stream,
           ModeIncrements* used = nullptr);

// First time at which sup(|R|, |S|) exceeded the threshold (or a
// non-finite value appeared).
std::optional<double> detect_explosion(const State& state, double threshold);

struct TracerSample {
  double t;
  double x;
  double R;
  double S;
  double u;
  double carried;  // NaN unless the tracer carries its own invariant
};

// Point moving along dX/dt = sign * c(u(t, X)). A carrying tracer also
// integrates its own invariant (R for sign +, S for sign -) along the path,
// which follows steep data without the grid's interpolation smoothing.
struct CharTracer {
  int sign = 1;
  double x = 0.0;
  bool carries = false;
  double value = 0.0;
  double u = 0.0;  // u along the path (carried in the regular mode)
  std::vector<TracerSample> samples;
};

CharTracer start_tracer(int sign, double x0, const State& state, const Field& u,
                        Interpolation interpolation = Interpolation::Cubic);

// Carrying tracer; the initial value is the interpolated grid invariant
// unless `initial_value` is given.
CharTracer start_carrying_tracer(int sign, double x0, const State& state, const Field& u,
                                 std::optional<double> initial_value = std::nullopt,
                                 Interpolation interpolation = Interpolation::Cubic);

// Midpoint rule between two consecutive states; appends the sample at the
// new position.
void advance_tracer(CharTracer& tracer, const State& before, const Field& u_before,
                    const State& after, const Field& u_after, const SpeedModel& model,
                    double dt, Interpolation interpolation = Interpolation::Cubic);

// Same, and for a carrying tracer one Euler-Maruyama step of
//   dR = ctilde'(u)[R^2 - S^2 - chi(R) + 2 R Theta] dt + sum_k sigma_k(X) dbeta_k
// (S analogously) with S, Theta read from `before` and the increments the
// grid step consumed. In the regular mode u is carried too, du = S dt along
// X+ and du = R dt along X-; in the regularized mode it is read from the grid.
void advance_tracer(CharTracer& tracer, const State& before, const Field& u_before,
                    const State& after, const Field& u_after, const SpeedModel& model,
                    const NoiseModel& noise, const ModeIncrements& increments,
                    const StepSettings& settings);

}  // namespace svw

#endif  // SVW_DYNAMICS_HPP_
