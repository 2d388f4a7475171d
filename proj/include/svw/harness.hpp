#ifndef SVW_HARNESS_HPP_
#define SVW_HARNESS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svw/config.hpp"
#include "svw/diagnostics.hpp"
#include "svw/dynamics.hpp"
#include "svw/noise.hpp"

namespace svw {

// Everything a path needs, derived once from a validated config and shared
// read-only by all workers.
struct Setup {
  RunConfig cfg;
  Grid grid;
  SpeedModel model;
  NoiseModel noise;
  StepSettings settings;  // explosion threshold resolved from the initial state
  State initial;
  Field u_initial;
  int nsteps;
  double q_integral;  // int q dx of the noise actually applied

  static Setup build(const RunConfig& cfg);
};

// One CSV row: path,t,E,D,M,residual,maxR,minR,maxS,minS,supNegR,supNegS,theta,lip_u
struct TimeseriesRow {
  int path;
  double t, E, D, M, residual;
  double maxR, minR, maxS, minS;
  double supNegR, supNegS;
  double theta;
  double lip_u;
};

extern const char* const kTimeseriesHeader;
std::string format_row(const TimeseriesRow& row);

struct TracerSeed {
  int sign;
  double x0;
  // Exact initial invariant when known; the grid value otherwise.
  std::optional<double> value;
};

struct PathOptions {
  int stride = 0;          // 0: no time series rows
  bool track_lp = false;   // accumulate int_0^t lp_weighted(alpha) dt
  bool keep_final_state = false;
  // Snapshots for window moments at output times inside [t_min, t_max];
  // t_min < 0 keeps the final state only. Disabled when false.
  bool snapshots = false;
  double snap_t_min = -1.0;
  double snap_t_max = -1.0;
  std::vector<TracerSeed> tracers;  // carrying tracers
  bool stop_on_tracer_blowup = false;
};

// Single path driven step by step. The reconstructed u of the current
// state is cached and shared by the step, the ledger and the tracers.
class PathSimulator {
 public:
  PathSimulator(const Setup& setup, int path, PathOptions options = {});

  bool finished() const;
  void advance();

  int path() const { return path_; }
  int steps_taken() const { return steps_; }
  const State& state() const { return state_; }
  const Field& u() const { return u_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const ModeIncrements& last_increments() const { return last_inc_; }
  double sup_abs_theta() const { return sup_theta_; }
  double lp_integral() const { return lp_integral_; }
  const std::vector<CharTracer>& tracers() const { return tracers_; }
  std::optional<double> grid_blowup_time() const { return state_.blowup_time; }
  std::optional<double> tracer_blowup_time() const { return tracer_blowup_; }
  // Earlier of the grid and tracer detections.
  std::optional<double> blowup_time() const;

  TimeseriesRow row() const;

 private:
  const Setup* setup_;
  PathOptions options_;
  int path_;
  int steps_ = 0;
  NoiseStream stream_;
  State state_;
  Field u_;
  EnergyLedger ledger_;
  ModeIncrements last_inc_;
  double sup_theta_ = 0.0;
  double lp_integral_ = 0.0;
  std::vector<CharTracer> tracers_;
  std::optional<double> tracer_blowup_;
};

struct PathRecord {
  int path = 0;
  std::optional<double> blowup_time;
  std::optional<double> grid_blowup_time;
  std::optional<double> tracer_blowup_time;
  double t_final = 0.0;
  double E_T = 0.0;
  double D_T = 0.0;
  double M_T = 0.0;
  double max_abs_residual = 0.0;
  double sup_abs_theta = 0.0;
  double lp_integral = 0.0;
};

struct PathResult {
  PathRecord record;
  std::vector<TimeseriesRow> rows;
  std::vector<Snapshot> snapshots;
  std::optional<State> final_state;
  std::optional<Field> final_u;
};

PathResult run_path(const Setup& setup, int path, const PathOptions& options);

// Paths [0, paths) on `workers` threads (0: hardware concurrency). Results
// are ordered by path and independent of the worker count.
std::vector<PathResult> run_paths(const Setup& setup, int paths, int workers,
                                  const PathOptions& options);

struct Stats {
  int count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;
  double min = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double max = 0.0;
};
Stats compute_stats(std::vector<double> values);

// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(int k, int n, double z = 1.959963984540054);

// Least-squares slope and its standard error of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct RunOutput {
  std::string config_hash;
  std::uint64_t seed = 0;
  PathRecord record;
  TimeseriesRow final_row;
  State final_state;
};

// Writes timeseries.csv, final_state.csv, summary.json and report.txt.
RunOutput run_single(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct EnsembleRow {
  double t;
  int count;  // paths still alive
  double mean_E, se_E;
  double mean_M;
  double mean_supNegR, mean_supNegS;
  double mean_abs_theta;
};

struct EnsembleSummary {
  std::string config_hash;
  std::uint64_t seed = 0;
  int paths = 0;
  double t_end = 0.0;
  double E0 = 0.0;
  double q_integral = 0.0;
  int exploded = 0;
  std::vector<PathRecord> records;
  Stats E_T, D_T, max_abs_residual, sup_abs_theta, lp_integral, blowup_time;
  std::vector<EnsembleRow> timeseries;
  std::optional<WindowMoments> window;
};

EnsembleSummary summarize(const Setup& setup, const std::vector<PathResult>& results);

// Writes timeseries.csv, paths.csv, ensemble_timeseries.csv, summary.json,
// window_moments.json and report.txt when out_dir is non-empty.
EnsembleSummary run_ensemble(const RunConfig& cfg, const std::filesystem::path& out_dir);

std::string summary_to_json(const EnsembleSummary& s);

struct BlowupParams {
  std::vector<double> eps_list{0.4, 0.2, 0.1};
  double alpha = 1.5;
  double nu = 0.25;
  double gamma = 0.4;
  double u_star = 0.0;
  // Bump point with phi'(x0) < 0; nullopt picks the steepest descent point.
  std::optional<double> x0;
  int paths = 200;
  // Grid cells across the bump support; n is the next power of two, at
  // least 256 and at most grid.n of the config.
  double cells_per_support = 8.0;
};

struct BlowupRow {
  double eps = 0.0;
  int n = 0;
  double dt = 0.0;
  double horizon = 0.0;   // eps^gamma
  double scale = 0.0;     // eps^(alpha+nu+gamma)
  double x_eps = 0.0;
  double R0_at_x = 0.0;   // -c(u0(x_eps)) eps^(-nu-gamma) phi'(x0)
  double riccati_time = 0.0;
  std::optional<double> deterministic_time;
  std::optional<double> deterministic_grid_time;
  std::optional<double> deterministic_tracer_time;
  int paths = 0;
  int blowups = 0;  // detected before the horizon
  double fraction = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  Stats blowup_time;
};

struct BlowupTable {
  std::string config_hash;
  std::uint64_t seed = 0;
  BlowupParams params;
  double x0 = 0.0;
  std::vector<BlowupRow> rows;
};

// Throws Error(InvalidParameter) unless alpha > 1, 0 < nu < alpha - 1,
// gamma > 1/3 and c'(u_star) > 0.
void validate_blowup(const BlowupParams& p, const SpeedModel& model);
// argmin of phi' on (1/4, 3/4).
double steepest_bump_point();
// Config of the ensemble run at one eps (bump data, regular mode, horizon
// eps^gamma, adapted grid).
RunConfig blowup_config(const RunConfig& base, const BlowupParams& p, double eps);
BlowupTable preset_blowup(const RunConfig& cfg, const BlowupParams& params,
                          const std::filesystem::path& out_dir);
std::string blowup_to_json(const BlowupTable& t);

struct ConvergenceParams {
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  int paths = 0;  // 0: output.paths of the config
  bool track_lp = true;
};

struct ConvergenceRow {
  double eps = 0.0;
  int paths = 0;
  int exploded = 0;
  Stats sup_abs_theta;
  Stats D_T;
  Stats l2_to_reference;
  Stats lp_integral;
  // Mean over x (and paths) of the two-sample defect between this eps and
  // the next smaller one; nullopt for the smallest.
  std::optional<double> pair_delta;
  WindowMoments window;
};

struct ConvergenceTable {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<ConvergenceRow> rows;
  LineFit theta_fit;  // log E[sup|Theta|] against log eps
  double lp_variation = 0.0;  // (max - min) / min of the mean lp integrals
};

ConvergenceTable preset_convergence(const RunConfig& cfg, const ConvergenceParams& params,
                                    const std::filesystem::path& out_dir);
std::string convergence_to_json(const ConvergenceTable& t);

// Mean over nodes of (1/2) Var of the values the runs take at each node
// (R and S reported separately).
std::pair<double, double> pointwise_defect(const std::vector<const State*>& runs);

}  // namespace svw

#endif  // SVW_HARNESS_HPP_
