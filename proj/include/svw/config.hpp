#ifndef SVW_CONFIG_HPP_
#define SVW_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svw/dynamics.hpp"
#include "svw/grid.hpp"
#include "svw/noise.hpp"
#include "svw/speed_model.hpp"

namespace svw {

struct ModelConfig {
  std::string kind = "tanh";  // tanh | constant | table
  double c_base = 2.0;
  double c_amp = 1.0;
  std::string table_path;
};

struct NoiseConfig {
  NoiseParams params;
  std::uint64_t seed = 0;
  // Mollifier width of the noise in regularized mode when it should differ
  // from run.epsilon. The regular mode always uses the raw modes.
  std::optional<double> epsilon;
};

struct RunSection {
  double t_end = 1.0;
  std::optional<double> dt;
  double cfl = 0.5;  // dt = cfl dx / c2 when dt is absent
  std::string mode = "regular";  // regular | regularized
  double epsilon = 0.0;
  double explosion_threshold = 0.0;  // <= 0: default level
};

// Initial data. Kinds and their keys:
//   constant: u, v
//   fourier:  u_mean, u_cos[k-1], u_sin[k-1], v_mean, v_cos, v_sin
//   bump:     u_star, amplitude, scale, shift;
//             u = u_star + amplitude phi((x - shift)/scale), v = 0 with
//             phi(y) = exp(-1/(1 - (4y-2)^2)) on (1/4, 3/4)
//   file:     path to CSV with columns u,v (or x,u,v), one row per node
//   riemann:  r_mean, r_cos, r_sin, s_cos, s_sin, u_origin; R0 and S0 given
//             directly (shared mean keeps Theta(0) = 0)
struct InitConfig {
  std::string kind = "constant";
  double u = 0.0;
  double v = 0.0;
  double u_mean = 0.0;
  double v_mean = 0.0;
  std::vector<double> u_cos, u_sin, v_cos, v_sin;
  double u_star = 0.0;
  double amplitude = 0.0;
  double scale = 1.0;
  double shift = 0.0;
  std::string path;
  double r_mean = 0.0;
  std::vector<double> r_cos, r_sin, s_cos, s_sin;
  double u_origin = 0.0;
};

struct OutputConfig {
  int stride = 10;
  int paths = 1;
  int workers = 0;  // 0: hardware concurrency
};

struct DiagnosticsConfig {
  double lp_alpha = 0.5;
  std::vector<double> kappas{0.0, 1.0, 5.0};
  // Window-moment selection inside each run: t in [t_min, t_max] (t_max < 0
  // means t_end) and x in [x_min, x_max].
  double t_min = -1.0;  // < 0: final time only
  double t_max = -1.0;
  double x_min = 0.0;
  double x_max = 1.0;
};

struct RunConfig {
  int n = 512;
  ModelConfig model;
  NoiseConfig noise;
  RunSection run;
  InitConfig init;
  Interpolation interpolation = Interpolation::Cubic;
  OutputConfig output;
  DiagnosticsConfig diagnostics;
  // Directory used to resolve relative file paths in the config.
  std::filesystem::path base_dir;
};

// Parses and validates. Unknown sections or keys, wrong types and violated
// cross-field preconditions throw Error(ConfigInvalid).
RunConfig parse_config(const std::string& json_text,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON of every setting (defaults included).
std::string config_to_json(const RunConfig& cfg);
// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Throws Error(ConfigInvalid) naming the offending key.
void validate_config(const RunConfig& cfg);

// Objects derived from a validated config.
SpeedModel make_speed_model(const RunConfig& cfg);
StepMode make_step_mode(const RunConfig& cfg);
double noise_epsilon(const RunConfig& cfg);
double time_step(const RunConfig& cfg, const SpeedModel& model);

// u0, v0 for the non-riemann kinds.
std::pair<Field, Field> make_initial_fields(const RunConfig& cfg, const Grid& grid);
State make_initial_state(const RunConfig& cfg, const Grid& grid, const SpeedModel& model);

// The bump profile phi above.
double bump_profile(double y);
double bump_profile_slope(double y);

}  // namespace svw

#endif  // SVW_CONFIG_HPP_
