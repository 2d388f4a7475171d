#ifndef SVW_NOISE_HPP_
#define SVW_NOISE_HPP_

#include <cstdint>
#include <vector>

#include "svw/grid.hpp"

namespace svw {

struct NoiseParams {
  int pairs = 8;           // K
  double amplitude = 0.25; // A
  double decay = 3.0;      // p, gamma_k = A k^-p
};

// Finite-mode additive forcing sum_k sigma_k d beta_k built from Fourier pairs
//   sigma_{2k-1} = gamma_k sqrt(2) cos(2 pi k x),
//   sigma_{2k}   = gamma_k sqrt(2) sin(2 pi k x),
// plus the mollified family sigma_k^eps = J_eps sigma_k.
class NoiseModel {
 public:
  // eps <= 0 skips mollification (the mollified family equals the raw one).
  static NoiseModel build(const Grid& grid, const NoiseParams& params, double eps);

  const Grid& grid() const { return grid_; }
  const NoiseParams& params() const { return params_; }
  int mode_count() const { return static_cast<int>(modes_.size()); }
  double gamma(int k) const;  // k = 1..K

  const Field& mode(int index, bool mollified) const {
    return mollified ? mollified_[static_cast<std::size_t>(index)]
                     : modes_[static_cast<std::size_t>(index)];
  }
  const Field& q(bool mollified) const { return mollified ? q_eps_ : q_; }
  double q_integral(bool mollified) const {
    return mollified ? q_eps_integral_ : q_integral_;
  }
  // sum over modes of ||sigma_k||_{W^{1,inf}}^2 with the norm taken as
  // sup|sigma| + sup|sigma'|.
  double q0() const { return q0_; }
  // Tail of q0 beyond the K retained pairs relative to the retained part
  // (infinite series summed to convergence).
  double truncation_tail_ratio() const;

 private:
  NoiseModel(Grid grid, NoiseParams params)
      : grid_(grid), params_(params), q_(grid), q_eps_(grid) {}

  Grid grid_;
  NoiseParams params_;
  std::vector<Field> modes_;
  std::vector<Field> mollified_;
  Field q_;
  Field q_eps_;
  double q_integral_ = 0.0;
  double q_eps_integral_ = 0.0;
  double q0_ = 0.0;
};

struct ModeIncrements {
  std::vector<double> dbeta;  // one per mode
  double dt = 0.0;
};

// Per-path stream of Brownian increments; step k of path p always yields
// the same numbers for a given master seed.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint64_t path)
      : seed_(master_seed), path_(path) {}

  ModeIncrements increments(std::uint64_t step, int modes, double dt) const;
  ModeIncrements next(int modes, double dt) { return increments(step_++, modes, dt); }
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  std::uint64_t step_ = 0;
};

// sum_k sigma_k(x) dbeta_k on the grid.
Field forcing_field(const NoiseModel& noise, const ModeIncrements& inc, bool mollified);

struct SampledIncrement {
  ModeIncrements increments;
  Field forcing;
};

SampledIncrement sample_increment(const NoiseModel& noise, double dt, NoiseStream& stream,
                                  bool mollified);

}  // namespace svw

#endif  // SVW_NOISE_HPP_
