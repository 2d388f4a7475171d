#ifndef SVW_DIAGNOSTICS_HPP_
#define SVW_DIAGNOSTICS_HPP_

#include <span>
#include <vector>

#include "svw/dynamics.hpp"
#include "svw/grid.hpp"
#include "svw/noise.hpp"
#include "svw/speed_model.hpp"

namespace svw {

// Energy balance of one path:
//   E(t) + D(t) = E(0) + 2 int q dx t + M(t) + residual(t)
// with D the cut-off dissipation and M the discrete martingale built from
// the very increments that drove the step.
class EnergyLedger {
 public:
  struct Row {
    double t;
    double E;
    double D;
    double M;
    double residual;
  };

  EnergyLedger() = default;
  // q_integral is int q dx of the noise actually applied (q^eps when
  // regularized).
  EnergyLedger(const State& initial, double q_integral);

  // `u_after` must be reconstruct_u(after).
  void update(const State& before, const State& after, const Field& u_after,
              const SpeedModel& model, const NoiseModel& noise,
              const ModeIncrements& increments, const StepMode& mode);

  double E0() const { return E0_; }
  double E() const { return current_.E; }
  double D() const { return current_.D; }
  double M() const { return current_.M; }
  double residual() const { return current_.residual; }
  double t() const { return current_.t; }
  double max_abs_residual() const { return max_abs_residual_; }
  const Row& current() const { return current_; }

 private:
  double E0_ = 0.0;
  double q_integral_ = 0.0;
  double max_abs_residual_ = 0.0;
  Row current_{0.0, 0.0, 0.0, 0.0, 0.0};
};

// int (R^2 + S^2) dx
double energy(const State& state);

// 2 int ctilde'(u) [R chi(R) + S chi(S)] dx, the instantaneous cut-off
// dissipation rate.
double dissipation_rate(const State& state, const Field& u, const SpeedModel& model,
                        const StepMode& mode);

struct OleinikStats {
  double sup_neg_R;
  double sup_neg_S;
};

// Sup of the negative parts, max(0, -min R) and max(0, -min S).
OleinikStats oleinik_stats(const State& state);

// int c'(u) (|R|^(2+alpha) + |S|^(2+alpha)) dx for 0 <= alpha < 1.
double lp_weighted(const State& state, const Field& u, const SpeedModel& model, double alpha);
// Same with an explicit weight field in place of c'(u).
double lp_weighted(const Field& R, const Field& S, const Field& weight, double alpha);

// Truncated square Q_kappa(xi) = xi^2/2 - ((xi - kappa)^+)^2 / 2.
inline double q_kappa(double xi, double kappa) {
  const double p = xi > kappa ? xi - kappa : 0.0;
  return 0.5 * xi * xi - 0.5 * p * p;
}
inline double q_kappa_prime(double xi, double kappa) { return xi < kappa ? xi : kappa; }

struct Snapshot {
  int path = 0;
  double t = 0.0;
  Field R;
  Field S;
};

// Selects samples with t in [t_min, t_max], x in [x_min, x_max] and path in
// [path_begin, path_end).
struct Window {
  double t_min = 0.0;
  double t_max = 0.0;
  double x_min = 0.0;
  double x_max = 1.0;
  int path_begin = 0;
  int path_end = 1;
};

struct KappaDefect {
  double kappa;
  double delta_R;  // <Q(R)> - Q(<R>)
  double delta_S;
  double ts_R;  // (<Q'(R)> - Q'(<R>))^2 / 2
  double ts_S;
};

struct WindowMoments {
  Window window;
  std::size_t samples = 0;
  double mean_R = 0.0;
  double mean_R2 = 0.0;
  double mean_S = 0.0;
  double mean_S2 = 0.0;
  double mean_RS = 0.0;
  double delta = 0.0;        // (<R^2> - <R>^2) / 2
  double delta_check = 0.0;  // (<S^2> - <S>^2) / 2
  std::vector<KappaDefect> kappas;
};

// Empirical moments over all (path, t, x) samples inside the window.
// Throws Error(EmptyWindow) if nothing is selected.
WindowMoments window_moments(std::span<const Snapshot> runs, const Window& window,
                             std::span<const double> kappas);

// Moments of an explicit sample list (R_j, S_j).
WindowMoments sample_moments(std::span<const double> R, std::span<const double> S,
                             std::span<const double> kappas);

}  // namespace svw

#endif  // SVW_DIAGNOSTICS_HPP_
