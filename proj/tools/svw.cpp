// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svw/svw.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code(svw_status st) {
  switch (st) {
    case SVW_OK: return kExitOk;
    case SVW_CONFIG_INVALID:
    case SVW_INVALID_PARAMETER:
    case SVW_CFL_VIOLATION: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report_failure(svw_status st) {
  std::fprintf(stderr, "svw: %s: %s\n", svw_status_string(st), svw_last_error());
  return exit_code(st);
}

// An unreadable config file counts as an invalid config.
int report_load_failure(svw_status st) {
  report_failure(st);
  return kExitConfig;
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->required();
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides noise.seed)");
  cmd->add_option("--workers", c.workers, "worker threads, 0 for all cores")
      ->check(CLI::NonNegativeNumber);
}

// Owns a loaded config for the duration of a command.
class Config {
 public:
  ~Config() { svw_config_free(cfg_); }
  svw_status load(const Common& c) {
    svw_status st = svw_config_load(c.config.c_str(), &cfg_);
    if (st != SVW_OK) return st;
    if (c.seed) st = svw_config_set_seed(cfg_, *c.seed);
    if (st == SVW_OK && c.workers) st = svw_config_set_workers(cfg_, *c.workers);
    return st;
  }
  svw_config* get() const { return cfg_; }

 private:
  svw_config* cfg_ = nullptr;
};

std::string hash_of(const svw_config* cfg) {
  char h[17] = {0};
  svw_config_hash(cfg, h);
  return h;
}

int cmd_run(const Common& c) {
  Config cfg;
  if (svw_status st = cfg.load(c); st != SVW_OK) return report_load_failure(st);
  svw_run_result r{};
  if (svw_status st = svw_run(cfg.get(), c.out.c_str(), &r); st != SVW_OK) {
    return report_failure(st);
  }
  std::printf("config %s  t=%.6g  E0=%.6g  E=%.6g  D=%.6g  M=%.6g  max|residual|=%.3g",
              hash_of(cfg.get()).c_str(), r.t_final, r.E0, r.E_T, r.D_T, r.M_T,
              r.max_abs_residual);
  if (r.exploded) std::printf("  blow-up at t=%.6g", r.blowup_time);
  std::printf("\n");
  return kExitOk;
}

int cmd_ensemble(const Common& c, std::optional<int> paths) {
  Config cfg;
  if (svw_status st = cfg.load(c); st != SVW_OK) return report_load_failure(st);
  if (paths) {
    if (svw_status st = svw_config_set_paths(cfg.get(), *paths); st != SVW_OK) {
      return report_failure(st);
    }
  }
  svw_ensemble_result r{};
  if (svw_status st = svw_ensemble(cfg.get(), c.out.c_str(), &r); st != SVW_OK) {
    return report_failure(st);
  }
  const double expected = r.E0 + 2.0 * r.q_integral * r.t_end;
  std::printf("config %s  paths=%d  exploded=%d  mean E(T)=%.6g +- %.3g  expected %.6g\n",
              hash_of(cfg.get()).c_str(), r.paths, r.exploded, r.mean_E_T, r.se_E_T,
              expected);
  return kExitOk;
}

int cmd_blowup(const Common& c, const std::vector<double>& eps, double alpha, double nu,
               double gamma, double ustar, std::optional<double> x0, int paths) {
  Config cfg;
  if (svw_status st = cfg.load(c); st != SVW_OK) return report_load_failure(st);
  svw_blowup_params p;
  svw_blowup_defaults(&p);
  p.eps = eps.data();
  p.eps_count = eps.size();
  p.alpha = alpha;
  p.nu = nu;
  p.gamma = gamma;
  p.u_star = ustar;
  p.has_x0 = x0 ? 1 : 0;
  p.x0 = x0.value_or(0.0);
  p.paths = paths;
  std::vector<svw_blowup_row> rows(eps.size());
  if (svw_status st = svw_blowup(cfg.get(), &p, c.out.c_str(), rows.data()); st != SVW_OK) {
    return report_failure(st);
  }
  std::printf("config %s\n", hash_of(cfg.get()).c_str());
  for (const svw_blowup_row& r : rows) {
    std::printf("eps=%-6g horizon=%.4g riccati=%.4g zero-noise=%.4g fraction=%d/%d [%.3f, %.3f]\n",
                r.eps, r.horizon, r.riccati_time, r.deterministic_time, r.blowups, r.paths,
                r.wilson_lo, r.wilson_hi);
  }
  return kExitOk;
}

int cmd_converge(const Common& c, const std::vector<double>& eps, std::optional<int> paths) {
  Config cfg;
  if (svw_status st = cfg.load(c); st != SVW_OK) return report_load_failure(st);
  svw_converge_result r{};
  if (svw_status st =
          svw_converge(cfg.get(), eps.data(), eps.size(), paths.value_or(0), c.out.c_str(), &r);
      st != SVW_OK) {
    return report_failure(st);
  }
  std::printf("config %s  theta slope=%.4g +- %.3g  lp variation=%.4g\n",
              hash_of(cfg.get()).c_str(), r.theta_slope, r.theta_slope_se, r.lp_variation);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the stochastic variational wave equation"};
  app.set_version_flag("--version", std::string(svw_version()));
  app.require_subcommand(1);

  Common common;
  std::optional<int> paths;
  std::vector<double> blow_eps{0.4, 0.2, 0.1};
  std::vector<double> conv_eps{0.2, 0.1, 0.05, 0.025};
  double alpha = 1.5, nu = 0.25, gamma = 0.4, ustar = 0.0;
  std::optional<double> x0;
  int blow_paths = 200;

  CLI::App* run = app.add_subcommand("run", "single path");
  add_common(run, common);

  CLI::App* ens = app.add_subcommand("ensemble", "independent paths with statistics");
  add_common(ens, common);
  ens->add_option("--paths", paths, "number of paths")->check(CLI::PositiveNumber);

  CLI::App* blow = app.add_subcommand("blowup", "blow-up sweep over eps");
  add_common(blow, common);
  blow->add_option("--eps", blow_eps, "comma-separated eps values")->delimiter(',');
  blow->add_option("--alpha", alpha, "amplitude exponent");
  blow->add_option("--nu", nu, "steepness exponent");
  blow->add_option("--gamma", gamma, "horizon exponent");
  blow->add_option("--ustar", ustar, "base state u*");
  blow->add_option("--x0", x0, "bump point with phi'(x0) < 0");
  blow->add_option("--paths", blow_paths, "paths per eps")->check(CLI::PositiveNumber);

  CLI::App* conv = app.add_subcommand("converge", "regularization sweep over eps");
  add_common(conv, common);
  conv->add_option("--eps", conv_eps, "comma-separated decreasing eps values")->delimiter(',');
  conv->add_option("--paths", paths, "paths per eps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) return cmd_run(common);
  if (ens->parsed()) return cmd_ensemble(common, paths);
  if (blow->parsed()) {
    return cmd_blowup(common, blow_eps, alpha, nu, gamma, ustar, x0, blow_paths);
  }
  return cmd_converge(common, conv_eps, paths);
}
