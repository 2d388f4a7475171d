#include "svw/svw.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "svw/config.hpp"
#include "svw/error.hpp"
#include "svw/harness.hpp"

struct svw_config {
  svw::RunConfig cfg;
};

struct svw_sim {
  // The simulator refers into the setup, so both live here.
  std::unique_ptr<svw::Setup> setup;
  std::unique_ptr<svw::PathSimulator> sim;
};

namespace {

thread_local std::string g_last_error;

svw_status to_status(svw::ErrorCode code) {
  switch (code) {
    case svw::ErrorCode::InvalidParameter: return SVW_INVALID_PARAMETER;
    case svw::ErrorCode::ConfigInvalid: return SVW_CONFIG_INVALID;
    case svw::ErrorCode::Io: return SVW_IO_ERROR;
    case svw::ErrorCode::CflViolation: return SVW_CFL_VIOLATION;
    case svw::ErrorCode::GridMismatch: return SVW_GRID_MISMATCH;
    case svw::ErrorCode::IterationFailure: return SVW_ITERATION_FAILURE;
    case svw::ErrorCode::EmptyWindow: return SVW_EMPTY_WINDOW;
    case svw::ErrorCode::Runtime: return SVW_RUNTIME_ERROR;
  }
  return SVW_RUNTIME_ERROR;
}

svw_status set_error(svw_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
svw_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SVW_OK;
  } catch (const svw::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SVW_RUNTIME_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SVW_RUNTIME_ERROR, e.what());
  }
}

std::filesystem::path dir_or_empty(const char* out_dir) {
  return out_dir ? std::filesystem::path(out_dir) : std::filesystem::path();
}

double nan_if_none(const std::optional<double>& v) { return v ? *v : NAN; }

}  // namespace

extern "C" {

const char* svw_version(void) { return "0.1.0"; }

const char* svw_status_string(svw_status status) {
  switch (status) {
    case SVW_OK: return "ok";
    case SVW_INVALID_PARAMETER: return "invalid parameter";
    case SVW_CONFIG_INVALID: return "invalid configuration";
    case SVW_IO_ERROR: return "i/o error";
    case SVW_CFL_VIOLATION: return "time step violates the CFL bound";
    case SVW_GRID_MISMATCH: return "grid mismatch";
    case SVW_ITERATION_FAILURE: return "iteration failed to converge";
    case SVW_EMPTY_WINDOW: return "empty window";
    case SVW_RUNTIME_ERROR: return "runtime error";
    case SVW_NULL_ARGUMENT: return "null argument";
    case SVW_BUFFER_TOO_SMALL: return "buffer too small";
  }
  return "unknown status";
}

const char* svw_last_error(void) { return g_last_error.c_str(); }

svw_status svw_config_load(const char* path, svw_config** out) {
  if (!path || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new svw_config{svw::load_config(path)}; });
}

svw_status svw_config_parse(const char* json, const char* base_dir, svw_config** out) {
  if (!json || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new svw_config{svw::parse_config(json, dir_or_empty(base_dir))}; });
}

svw_status svw_config_clone(const svw_config* config, svw_config** out) {
  if (!config || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new svw_config{config->cfg}; });
}

void svw_config_free(svw_config* config) { delete config; }

svw_status svw_config_set_seed(svw_config* config, uint64_t seed) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  config->cfg.noise.seed = seed;
  return SVW_OK;
}

svw_status svw_config_set_paths(svw_config* config, int paths) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  if (paths < 1) return set_error(SVW_CONFIG_INVALID, "output.paths must be >= 1");
  config->cfg.output.paths = paths;
  return SVW_OK;
}

svw_status svw_config_set_workers(svw_config* config, int workers) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  if (workers < 0) return set_error(SVW_CONFIG_INVALID, "output.workers must be >= 0");
  config->cfg.output.workers = workers;
  return SVW_OK;
}

svw_status svw_config_grid_size(const svw_config* config, int* n) {
  if (!config || !n) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *n = config->cfg.n;
  return SVW_OK;
}

svw_status svw_config_hash(const svw_config* config, char out[17]) {
  if (!config || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string h = svw::config_hash(config->cfg);
    std::memcpy(out, h.c_str(), 17);
  });
}

svw_status svw_config_to_json(const svw_config* config, char* buffer, size_t capacity,
                              size_t* needed) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  std::string text;
  const svw_status st = guarded([&] { text = svw::config_to_json(config->cfg); });
  if (st != SVW_OK) return st;
  if (needed) *needed = text.size() + 1;
  if (!buffer || capacity < text.size() + 1) {
    return set_error(SVW_BUFFER_TOO_SMALL, "buffer too small for the configuration JSON");
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return SVW_OK;
}

svw_status svw_run(const svw_config* config, const char* out_dir, svw_run_result* result) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const svw::RunOutput o = svw::run_single(config->cfg, dir_or_empty(out_dir));
    if (!result) return;
    const svw::PathRecord& r = o.record;
    result->t_final = r.t_final;
    result->E0 = svw::energy(svw::Setup::build(config->cfg).initial);
    result->E_T = r.E_T;
    result->D_T = r.D_T;
    result->M_T = r.M_T;
    result->max_abs_residual = r.max_abs_residual;
    result->sup_abs_theta = r.sup_abs_theta;
    result->exploded = r.blowup_time ? 1 : 0;
    result->blowup_time = nan_if_none(r.blowup_time);
  });
}

svw_status svw_ensemble(const svw_config* config, const char* out_dir,
                        svw_ensemble_result* result) {
  if (!config) return set_error(SVW_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const svw::EnsembleSummary s = svw::run_ensemble(config->cfg, dir_or_empty(out_dir));
    if (!result) return;
    result->paths = s.paths;
    result->exploded = s.exploded;
    result->E0 = s.E0;
    result->q_integral = s.q_integral;
    result->t_end = s.t_end;
    result->mean_E_T = s.E_T.mean;
    result->se_E_T = s.E_T.se;
    result->max_abs_residual = s.max_abs_residual.max;
  });
}

void svw_blowup_defaults(svw_blowup_params* params) {
  if (!params) return;
  static const double kEps[] = {0.4, 0.2, 0.1};
  const svw::BlowupParams d;
  params->eps = kEps;
  params->eps_count = 3;
  params->alpha = d.alpha;
  params->nu = d.nu;
  params->gamma = d.gamma;
  params->u_star = d.u_star;
  params->has_x0 = 0;
  params->x0 = 0.0;
  params->paths = d.paths;
}

svw_status svw_blowup(const svw_config* config, const svw_blowup_params* params,
                      const char* out_dir, svw_blowup_row* rows) {
  if (!config || !params) return set_error(SVW_NULL_ARGUMENT, "null argument");
  if (params->eps_count > 0 && !params->eps) return set_error(SVW_NULL_ARGUMENT, "null eps");
  return guarded([&] {
    svw::BlowupParams p;
    p.eps_list.assign(params->eps, params->eps + params->eps_count);
    p.alpha = params->alpha;
    p.nu = params->nu;
    p.gamma = params->gamma;
    p.u_star = params->u_star;
    if (params->has_x0) p.x0 = params->x0;
    p.paths = params->paths;
    const svw::BlowupTable t = svw::preset_blowup(config->cfg, p, dir_or_empty(out_dir));
    if (!rows) return;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const svw::BlowupRow& r = t.rows[i];
      rows[i] = {r.eps,  r.horizon, r.riccati_time, nan_if_none(r.deterministic_time),
                 r.paths, r.blowups, r.fraction,     r.wilson_lo,
                 r.wilson_hi};
    }
  });
}

svw_status svw_converge(const svw_config* config, const double* eps, size_t eps_count,
                        int paths, const char* out_dir, svw_converge_result* result) {
  if (!config || (eps_count > 0 && !eps)) return set_error(SVW_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    svw::ConvergenceParams p;
    p.eps_list.assign(eps, eps + eps_count);
    p.paths = paths;
    const svw::ConvergenceTable t =
        svw::preset_convergence(config->cfg, p, dir_or_empty(out_dir));
    if (!result) return;
    result->theta_slope = t.theta_fit.slope;
    result->theta_slope_se = t.theta_fit.slope_se;
    result->lp_variation = t.lp_variation;
  });
}

svw_status svw_sim_create(const svw_config* config, int path, svw_sim** out) {
  if (!config || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  if (path < 0) return set_error(SVW_INVALID_PARAMETER, "path index must be >= 0");
  return guarded([&] {
    auto sim = std::make_unique<svw_sim>();
    sim->setup = std::make_unique<svw::Setup>(svw::Setup::build(config->cfg));
    sim->sim = std::make_unique<svw::PathSimulator>(*sim->setup, path);
    *out = sim.release();
  });
}

void svw_sim_free(svw_sim* sim) { delete sim; }

svw_status svw_sim_step(svw_sim* sim, int steps, int* taken) {
  if (!sim) return set_error(SVW_NULL_ARGUMENT, "null argument");
  if (steps < 0) return set_error(SVW_INVALID_PARAMETER, "steps must be >= 0");
  int done = 0;
  const svw_status st = guarded([&] {
    while (done < steps && !sim->sim->finished()) {
      sim->sim->advance();
      ++done;
    }
  });
  if (taken) *taken = done;
  return st;
}

svw_status svw_sim_time(const svw_sim* sim, double* t) {
  if (!sim || !t) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *t = sim->sim->state().t;
  return SVW_OK;
}

svw_status svw_sim_finished(const svw_sim* sim, int* finished) {
  if (!sim || !finished) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *finished = sim->sim->finished() ? 1 : 0;
  return SVW_OK;
}

svw_status svw_sim_exploded(const svw_sim* sim, int* exploded) {
  if (!sim || !exploded) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *exploded = sim->sim->state().exploded ? 1 : 0;
  return SVW_OK;
}

svw_status svw_sim_grid_size(const svw_sim* sim, int* n) {
  if (!sim || !n) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *n = sim->setup->grid.n();
  return SVW_OK;
}

svw_status svw_sim_theta(const svw_sim* sim, double* theta) {
  if (!sim || !theta) return set_error(SVW_NULL_ARGUMENT, "null argument");
  *theta = svw::theta(sim->sim->state());
  return SVW_OK;
}

svw_status svw_sim_get_field(const svw_sim* sim, svw_field field, double* out, size_t count) {
  if (!sim || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  const svw::State& s = sim->sim->state();
  const svw::Field* f = nullptr;
  switch (field) {
    case SVW_FIELD_R: f = &s.R; break;
    case SVW_FIELD_S: f = &s.S; break;
    case SVW_FIELD_U: f = &sim->sim->u(); break;
    default: return set_error(SVW_INVALID_PARAMETER, "unknown field");
  }
  if (count < f->size()) return set_error(SVW_BUFFER_TOO_SMALL, "buffer smaller than the grid");
  std::memcpy(out, f->values().data(), f->size() * sizeof(double));
  return SVW_OK;
}

svw_status svw_sim_ledger(const svw_sim* sim, svw_ledger* out) {
  if (!sim || !out) return set_error(SVW_NULL_ARGUMENT, "null argument");
  const svw::EnergyLedger& l = sim->sim->ledger();
  *out = {l.t(), l.E(), l.D(), l.M(), l.residual(), l.max_abs_residual()};
  return SVW_OK;
}

}  // extern "C"
