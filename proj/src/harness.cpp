#include "svw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include "json.hpp"
#include "svw/error.hpp"

namespace svw {

using nlohmann::json;

Setup Setup::build(const RunConfig& cfg) {
  validate_config(cfg);
  const Grid grid(cfg.n);
  SpeedModel model = make_speed_model(cfg);
  const StepMode mode = make_step_mode(cfg);
  NoiseModel noise = NoiseModel::build(grid, cfg.noise.params, noise_epsilon(cfg));
  const double dt_max = time_step(cfg, model);
  const int nsteps = std::max(1, static_cast<int>(std::ceil(cfg.run.t_end / dt_max - 1e-9)));
  StepSettings settings;
  settings.dt = cfg.run.t_end / nsteps;
  settings.mode = mode;
  settings.interpolation = cfg.interpolation;
  check_time_step(grid, model, settings.dt);
  State initial = make_initial_state(cfg, grid, model);
  settings.explosion_threshold = cfg.run.explosion_threshold > 0.0
                                     ? cfg.run.explosion_threshold
                                     : default_explosion_threshold(initial);
  Field u0 = reconstruct_u(initial, model);
  const double qi = noise.q_integral(mode.is_regularized());
  return Setup{cfg,      grid,           std::move(model), std::move(noise), settings,
               initial,  std::move(u0),  nsteps,           qi};
}

const char* const kTimeseriesHeader =
    "path,t,E,D,M,residual,maxR,minR,maxS,minS,supNegR,supNegS,theta,lip_u";

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string format_row(const TimeseriesRow& r) {
  std::string s = std::to_string(r.path);
  for (double v : {r.t, r.E, r.D, r.M, r.residual, r.maxR, r.minR, r.maxS, r.minS, r.supNegR,
                   r.supNegS, r.theta, r.lip_u}) {
    s += ',';
    s += num(v);
  }
  return s;
}

PathSimulator::PathSimulator(const Setup& setup, int path, PathOptions options)
    : setup_(&setup),
      options_(std::move(options)),
      path_(path),
      stream_(setup.cfg.noise.seed, static_cast<std::uint64_t>(path)),
      state_(setup.initial),
      u_(setup.u_initial),
      ledger_(setup.initial, setup.q_integral) {
  sup_theta_ = std::fabs(theta(state_));
  for (const TracerSeed& seed : options_.tracers) {
    tracers_.push_back(start_carrying_tracer(seed.sign, seed.x0, state_, u_, seed.value,
                                             setup.settings.interpolation));
  }
}

bool PathSimulator::finished() const {
  return steps_ >= setup_->nsteps || state_.exploded ||
         (options_.stop_on_tracer_blowup && tracer_blowup_.has_value());
}

std::optional<double> PathSimulator::blowup_time() const {
  const auto& g = state_.blowup_time;
  if (g && tracer_blowup_) return std::min(*g, *tracer_blowup_);
  return g ? g : tracer_blowup_;
}

void PathSimulator::advance() {
  if (finished()) return;
  const Setup& s = *setup_;
  last_inc_ = stream_.next(s.noise.mode_count(), s.settings.dt);
  if (options_.track_lp) {
    lp_integral_ +=
        s.settings.dt * lp_weighted(state_, u_, s.model, s.cfg.diagnostics.lp_alpha);
  }
  State next = step(state_, u_, s.model, s.noise, s.settings, last_inc_);
  if (!next.exploded) {
    Field u_next = reconstruct_u(next, s.model);
    ledger_.update(state_, next, u_next, s.model, s.noise, last_inc_, s.settings.mode);
    for (CharTracer& tr : tracers_) {
      advance_tracer(tr, state_, u_, next, u_next, s.model, s.noise, last_inc_, s.settings);
      const double v = tr.value;
      if (!tracer_blowup_ && (!std::isfinite(v) || std::fabs(v) > s.settings.explosion_threshold)) {
        tracer_blowup_ = next.t;
      }
    }
    u_ = std::move(u_next);
    sup_theta_ = std::max(sup_theta_, std::fabs(theta(next)));
  }
  state_ = std::move(next);
  ++steps_;
}

TimeseriesRow PathSimulator::row() const {
  const EnergyLedger::Row& l = ledger_.current();
  const OleinikStats ol = oleinik_stats(state_);
  const double th = theta(state_);
  double lip = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    const double ux = (0.5 * (state_.S[i] - state_.R[i]) - th) / setup_->model.c(u_[i]);
    lip = std::max(lip, std::fabs(ux));
  }
  return {path_,          state_.t,       l.E,           l.D,          l.M,
          l.residual,     state_.R.max(), state_.R.min(), state_.S.max(), state_.S.min(),
          ol.sup_neg_R,   ol.sup_neg_S,   th,            lip};
}

PathResult run_path(const Setup& setup, int path, const PathOptions& options) {
  PathSimulator sim(setup, path, options);
  PathResult out;
  const double dt = setup.settings.dt;
  auto in_snap_window = [&](double t) {
    return options.snap_t_min >= 0.0 && t >= options.snap_t_min - 0.5 * dt &&
           (options.snap_t_max < 0.0 || t <= options.snap_t_max + 0.5 * dt);
  };
  auto take_snapshot = [&] {
    out.snapshots.push_back({path, sim.state().t, sim.state().R, sim.state().S});
  };
  if (options.stride > 0) out.rows.push_back(sim.row());
  if (options.snapshots && in_snap_window(0.0)) take_snapshot();
  while (!sim.finished()) {
    sim.advance();
    const bool on_stride = options.stride > 0 && sim.steps_taken() % options.stride == 0;
    if (options.stride > 0 && (on_stride || sim.finished())) out.rows.push_back(sim.row());
    if (options.snapshots && !sim.state().exploded && in_snap_window(sim.state().t) &&
        (options.stride == 0 || on_stride || sim.finished())) {
      take_snapshot();
    }
  }
  if (options.snapshots && options.snap_t_min < 0.0 && !sim.state().exploded) take_snapshot();

  PathRecord& rec = out.record;
  rec.path = path;
  rec.blowup_time = sim.blowup_time();
  rec.grid_blowup_time = sim.grid_blowup_time();
  rec.tracer_blowup_time = sim.tracer_blowup_time();
  rec.t_final = sim.state().t;
  rec.E_T = sim.ledger().E();
  rec.D_T = sim.ledger().D();
  rec.M_T = sim.ledger().M();
  rec.max_abs_residual = sim.ledger().max_abs_residual();
  rec.sup_abs_theta = sim.sup_abs_theta();
  rec.lp_integral = sim.lp_integral();
  if (options.keep_final_state) {
    out.final_state = sim.state();
    out.final_u = sim.u();
  }
  return out;
}

std::vector<PathResult> run_paths(const Setup& setup, int paths, int workers,
                                  const PathOptions& options) {
  if (paths < 1) fail(ErrorCode::InvalidParameter, "path count must be >= 1");
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, paths);
  std::vector<PathResult> results(static_cast<std::size_t>(paths));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(paths));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int p = next++; p < paths; p = next++) {
      try {
        results[static_cast<std::size_t>(p)] = run_path(setup, p, options);
      } catch (...) {
        errors[static_cast<std::size_t>(p)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

Stats compute_stats(std::vector<double> v) {
  Stats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.count > 1 ? ss / (s.count - 1) : 0.0;
  s.se = std::sqrt(s.variance / s.count);
  auto quantile = [&](double q) {
    const double pos = q * (s.count - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  s.min = v.front();
  s.max = v.back();
  s.q05 = quantile(0.05);
  s.q50 = quantile(0.5);
  s.q95 = quantile(0.95);
  return s;
}

std::pair<double, double> wilson_interval(int k, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(k) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorCode::InvalidParameter, "line fit needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

namespace {

json stats_json(const Stats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"variance", s.variance}, {"se", s.se},
          {"min", s.min},     {"q05", s.q05},   {"q50", s.q50},           {"q95", s.q95},
          {"max", s.max}};
}

json record_json(const PathRecord& r) {
  return {{"path", r.path},
          {"blowup_time", opt(r.blowup_time)},
          {"grid_blowup_time", opt(r.grid_blowup_time)},
          {"tracer_blowup_time", opt(r.tracer_blowup_time)},
          {"t_final", r.t_final},
          {"E_T", r.E_T},
          {"D_T", r.D_T},
          {"M_T", r.M_T},
          {"max_abs_residual", r.max_abs_residual},
          {"sup_abs_theta", r.sup_abs_theta},
          {"lp_integral", r.lp_integral}};
}

json moments_json(const WindowMoments& m) {
  json kappas = json::array();
  for (const KappaDefect& k : m.kappas) {
    kappas.push_back({{"kappa", k.kappa},
                      {"delta_kappa_R", k.delta_R},
                      {"delta_kappa_S", k.delta_S},
                      {"ts_R", k.ts_R},
                      {"ts_S", k.ts_S}});
  }
  return {{"window",
           {{"t_min", m.window.t_min},
            {"t_max", m.window.t_max},
            {"x_min", m.window.x_min},
            {"x_max", m.window.x_max},
            {"path_begin", m.window.path_begin},
            {"path_end", m.window.path_end}}},
          {"samples", m.samples},
          {"mean_R", m.mean_R},
          {"mean_R2", m.mean_R2},
          {"mean_S", m.mean_S},
          {"mean_S2", m.mean_S2},
          {"mean_RS", m.mean_RS},
          {"delta", m.delta},
          {"delta_check", m.delta_check},
          {"kappas", kappas}};
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string record_csv_header() {
  return "path,blowup_time,grid_blowup_time,tracer_blowup_time,t_final,E_T,D_T,M_T,"
         "max_abs_residual,sup_abs_theta,lp_integral\n";
}

std::string record_csv(const PathRecord& r) {
  return std::to_string(r.path) + ',' + opt_num(r.blowup_time) + ',' +
         opt_num(r.grid_blowup_time) + ',' + opt_num(r.tracer_blowup_time) + ',' +
         num(r.t_final) + ',' + num(r.E_T) + ',' + num(r.D_T) + ',' + num(r.M_T) + ',' +
         num(r.max_abs_residual) + ',' + num(r.sup_abs_theta) + ',' + num(r.lp_integral) + '\n';
}

PathOptions ensemble_options(const RunConfig& cfg) {
  PathOptions o;
  o.stride = cfg.output.stride;
  o.track_lp = true;
  o.snapshots = true;
  o.snap_t_min = cfg.diagnostics.t_min;
  o.snap_t_max = cfg.diagnostics.t_max;
  return o;
}

Window snapshot_window(const RunConfig& cfg, double dt, int paths) {
  Window w;
  if (cfg.diagnostics.t_min < 0.0) {
    w.t_min = cfg.run.t_end - 0.5 * dt;
    w.t_max = cfg.run.t_end + 0.5 * dt;
  } else {
    w.t_min = cfg.diagnostics.t_min - 0.5 * dt;
    w.t_max = (cfg.diagnostics.t_max < 0.0 ? cfg.run.t_end : cfg.diagnostics.t_max) + 0.5 * dt;
  }
  w.x_min = cfg.diagnostics.x_min;
  w.x_max = cfg.diagnostics.x_max;
  w.path_begin = 0;
  w.path_end = paths;
  return w;
}

std::optional<WindowMoments> pooled_moments(const RunConfig& cfg, double dt,
                                            const std::vector<PathResult>& results) {
  std::vector<Snapshot> snaps;
  for (const PathResult& r : results) {
    snaps.insert(snaps.end(), r.snapshots.begin(), r.snapshots.end());
  }
  if (snaps.empty()) return std::nullopt;
  try {
    return window_moments(snaps, snapshot_window(cfg, dt, static_cast<int>(results.size())),
                          cfg.diagnostics.kappas);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyWindow) return std::nullopt;
    throw;
  }
}

}  // namespace

RunOutput run_single(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const Setup setup = Setup::build(cfg);
  PathOptions opts;
  opts.stride = cfg.output.stride;
  opts.keep_final_state = true;
  opts.track_lp = true;
  PathResult res = run_path(setup, 0, opts);

  RunOutput out{config_hash(cfg), cfg.noise.seed, res.record, res.rows.back(),
                *res.final_state};
  if (out_dir.empty()) return out;
  ensure_dir(out_dir);

  std::string csv = std::string(kTimeseriesHeader) + '\n';
  for (const TimeseriesRow& r : res.rows) csv += format_row(r) + '\n';
  write_text(out_dir / "timeseries.csv", csv);

  std::string fin = "x,R,S,u\n";
  const State& st = *res.final_state;
  for (int i = 0; i < setup.grid.n(); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    fin += num(setup.grid.x(i)) + ',' + num(st.R[k]) + ',' + num(st.S[k]) + ',' +
           num((*res.final_u)[k]) + '\n';
  }
  write_text(out_dir / "final_state.csv", fin);

  json j = {{"kind", "run"},
            {"config_hash", out.config_hash},
            {"seed", out.seed},
            {"config", json::parse(config_to_json(cfg))},
            {"n", setup.grid.n()},
            {"dt", setup.settings.dt},
            {"steps", setup.nsteps},
            {"explosion_threshold", setup.settings.explosion_threshold},
            {"E0", res.rows.front().E},
            {"q_integral", setup.q_integral},
            {"record", record_json(res.record)}};
  write_text(out_dir / "summary.json", j.dump(2) + '\n');

  const TimeseriesRow& f = out.final_row;
  std::string rep;
  rep += "svw run  config " + out.config_hash + "  seed " + std::to_string(out.seed) + '\n';
  rep += "grid n=" + std::to_string(setup.grid.n()) + "  dt=" + num(setup.settings.dt) +
         "  steps=" + std::to_string(setup.nsteps) + "  mode=" + cfg.run.mode + '\n';
  rep += "t_final=" + num(f.t) + "  E=" + num(f.E) + "  D=" + num(f.D) + "  M=" + num(f.M) +
         '\n';
  rep += "max |residual|=" + num(res.record.max_abs_residual) +
         "  sup |theta|=" + num(res.record.sup_abs_theta) + '\n';
  rep += "supNegR=" + num(f.supNegR) + "  supNegS=" + num(f.supNegS) +
         "  lip_u=" + num(f.lip_u) + '\n';
  rep += "blow-up: " + (res.record.blowup_time ? "t=" + num(*res.record.blowup_time)
                                                : std::string("none")) +
         '\n';
  write_text(out_dir / "report.txt", rep);
  return out;
}

EnsembleSummary summarize(const Setup& setup, const std::vector<PathResult>& results) {
  const RunConfig& cfg = setup.cfg;
  EnsembleSummary s;
  s.config_hash = config_hash(cfg);
  s.seed = cfg.noise.seed;
  s.paths = static_cast<int>(results.size());
  s.t_end = cfg.run.t_end;
  s.E0 = energy(setup.initial);
  s.q_integral = setup.q_integral;
  std::vector<double> e, d, res, th, lp, bt;
  for (const PathResult& r : results) {
    const PathRecord& rec = r.record;
    s.records.push_back(rec);
    res.push_back(rec.max_abs_residual);
    th.push_back(rec.sup_abs_theta);
    if (rec.blowup_time) {
      ++s.exploded;
      bt.push_back(*rec.blowup_time);
    } else {
      e.push_back(rec.E_T);
      d.push_back(rec.D_T);
      lp.push_back(rec.lp_integral);
    }
  }
  s.E_T = compute_stats(e);
  s.D_T = compute_stats(d);
  s.max_abs_residual = compute_stats(res);
  s.sup_abs_theta = compute_stats(th);
  s.lp_integral = compute_stats(lp);
  s.blowup_time = compute_stats(bt);

  // Path-averaged series on the shared output times; rows of a path are
  // dropped from its blow-up time on.
  const int stride = cfg.output.stride;
  struct Acc {
    double t = 0.0;
    std::vector<double> E;
    double M = 0.0, negR = 0.0, negS = 0.0, th = 0.0;
  };
  std::map<long, Acc> acc;
  for (const PathResult& r : results) {
    for (const TimeseriesRow& row : r.rows) {
      const long k = std::lround(row.t / setup.settings.dt);
      if (k % stride != 0 && k != setup.nsteps) continue;
      if (r.record.blowup_time && row.t >= *r.record.blowup_time - 1e-12) continue;
      Acc& a = acc[k];
      a.t = row.t;
      a.E.push_back(row.E);
      a.M += row.M;
      a.negR += row.supNegR;
      a.negS += row.supNegS;
      a.th += std::fabs(row.theta);
    }
  }
  for (auto& [k, a] : acc) {
    const Stats es = compute_stats(a.E);
    const double n = es.count;
    s.timeseries.push_back({a.t, es.count, es.mean, es.se, a.M / n, a.negR / n, a.negS / n,
                            a.th / n});
  }
  s.window = pooled_moments(cfg, setup.settings.dt, results);
  return s;
}

std::string summary_to_json(const EnsembleSummary& s) {
  json recs = json::array();
  for (const PathRecord& r : s.records) recs.push_back(record_json(r));
  json j = {{"kind", "ensemble"},
            {"config_hash", s.config_hash},
            {"seed", s.seed},
            {"paths", s.paths},
            {"t_end", s.t_end},
            {"E0", s.E0},
            {"q_integral", s.q_integral},
            {"expected_E_T", s.E0 + 2.0 * s.q_integral * s.t_end},
            {"exploded", s.exploded},
            {"E_T", stats_json(s.E_T)},
            {"D_T", stats_json(s.D_T)},
            {"max_abs_residual", stats_json(s.max_abs_residual)},
            {"sup_abs_theta", stats_json(s.sup_abs_theta)},
            {"lp_integral", stats_json(s.lp_integral)},
            {"blowup_time", stats_json(s.blowup_time)},
            {"records", recs}};
  return j.dump(2) + '\n';
}

EnsembleSummary run_ensemble(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const Setup setup = Setup::build(cfg);
  const auto results = run_paths(setup, cfg.output.paths, cfg.output.workers, ensemble_options(cfg));
  EnsembleSummary s = summarize(setup, results);
  if (out_dir.empty()) return s;
  ensure_dir(out_dir);

  std::string ts = std::string(kTimeseriesHeader) + '\n';
  for (const PathResult& r : results) {
    for (const TimeseriesRow& row : r.rows) ts += format_row(row) + '\n';
  }
  write_text(out_dir / "timeseries.csv", ts);

  std::string pc = record_csv_header();
  for (const PathRecord& r : s.records) pc += record_csv(r);
  write_text(out_dir / "paths.csv", pc);

  std::string ec = "t,count,mean_E,se_E,mean_M,mean_supNegR,mean_supNegS,mean_abs_theta\n";
  for (const EnsembleRow& r : s.timeseries) {
    ec += num(r.t) + ',' + std::to_string(r.count) + ',' + num(r.mean_E) + ',' + num(r.se_E) +
          ',' + num(r.mean_M) + ',' + num(r.mean_supNegR) + ',' + num(r.mean_supNegS) + ',' +
          num(r.mean_abs_theta) + '\n';
  }
  write_text(out_dir / "ensemble_timeseries.csv", ec);
  write_text(out_dir / "summary.json", summary_to_json(s));
  json wm = {{"config_hash", s.config_hash},
             {"seed", s.seed},
             {"moments", s.window ? json::array({moments_json(*s.window)}) : json::array()}};
  write_text(out_dir / "window_moments.json", wm.dump(2) + '\n');

  const double expected = s.E0 + 2.0 * s.q_integral * s.t_end;
  std::string rep;
  rep += "svw ensemble  config " + s.config_hash + "  seed " + std::to_string(s.seed) + '\n';
  rep += "paths=" + std::to_string(s.paths) + "  exploded=" + std::to_string(s.exploded) +
         "  t_end=" + num(s.t_end) + '\n';
  rep += "E0=" + num(s.E0) + "  E0 + 2 int q dx T=" + num(expected) + '\n';
  rep += "mean E(T)=" + num(s.E_T.mean) + " +- " + num(s.E_T.se) +
         "  (deviation " + num(s.E_T.mean - expected) + ")\n";
  rep += "max |residual|: mean " + num(s.max_abs_residual.mean) + "  max " +
         num(s.max_abs_residual.max) + '\n';
  rep += "sup |theta|: mean " + num(s.sup_abs_theta.mean) + "  D(T): mean " + num(s.D_T.mean) +
         '\n';
  if (s.window) {
    rep += "window moments: samples " + std::to_string(s.window->samples) + "  delta " +
           num(s.window->delta) + "  delta_check " + num(s.window->delta_check) + '\n';
  }
  write_text(out_dir / "report.txt", rep);
  return s;
}

// ---------------------------------------------------------------- blow-up

void validate_blowup(const BlowupParams& p, const SpeedModel& model) {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidParameter, m); };
  if (!(p.alpha > 1.0)) bad("blow-up preset needs alpha > 1");
  if (!(p.nu > 0.0 && p.nu < p.alpha - 1.0)) bad("blow-up preset needs 0 < nu < alpha - 1");
  if (!(p.gamma > 1.0 / 3.0)) bad("blow-up preset needs gamma > 1/3");
  if (!(model.c_prime(p.u_star) > 0.0)) bad("blow-up preset needs c'(u_star) > 0");
  if (p.eps_list.empty()) bad("blow-up preset needs at least one eps");
  for (double e : p.eps_list) {
    if (!(e > 0.0 && e < 1.0)) bad("blow-up eps values must lie in (0, 1)");
  }
  if (p.paths < 1) bad("blow-up preset needs paths >= 1");
  if (p.x0 && !(*p.x0 > 0.5 && *p.x0 < 0.75)) bad("x0 must lie in (1/2, 3/4) where phi' < 0");
  if (!(p.cells_per_support > 0.0)) bad("cells_per_support must be positive");
}

double steepest_bump_point() {
  double lo = 0.5, hi = 0.75;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (bump_profile_slope(a) < bump_profile_slope(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return 0.5 * (lo + hi);
}

RunConfig blowup_config(const RunConfig& base, const BlowupParams& p, double eps) {
  RunConfig cfg = base;
  const double scale = std::pow(eps, p.alpha + p.nu + p.gamma);
  cfg.init = InitConfig{};
  cfg.init.kind = "bump";
  cfg.init.u_star = p.u_star;
  cfg.init.amplitude = std::pow(eps, p.alpha);
  cfg.init.scale = scale;
  cfg.run.mode = "regular";
  cfg.run.epsilon = 0.0;
  cfg.run.t_end = std::pow(eps, p.gamma);
  cfg.run.dt.reset();
  cfg.noise.epsilon.reset();
  const double target = p.cells_per_support / (0.5 * scale);
  int n = 256;
  while (n < target && n < base.n) n *= 2;
  cfg.n = std::min(n, std::max(base.n, 8));
  validate_config(cfg);
  return cfg;
}

namespace {

// Tracers across the steep flanks of the bump, started from the exact
// invariants -c(u0) u0' and c(u0) u0' since the grid under-resolves the bump.
std::vector<TracerSeed> bump_tracers(const RunConfig& rc, const SpeedModel& model, double x0) {
  const InitConfig& ic = rc.init;
  auto exact = [&](int sign, double y) {
    const double u = ic.u_star + ic.amplitude * bump_profile(y);
    const double ux = ic.amplitude / ic.scale * bump_profile_slope(y);
    return -sign * model.c(u) * ux;
  };
  std::vector<TracerSeed> seeds;
  std::vector<double> ys{x0};
  for (double y = 0.52; y < 0.74; y += 0.03) ys.push_back(y);
  for (double y : ys) {
    seeds.push_back({+1, ic.scale * y, exact(+1, y)});                // R > 0 where phi' < 0
    seeds.push_back({-1, ic.scale * (1.0 - y), exact(-1, 1.0 - y)});  // mirror for S
  }
  return seeds;
}

}  // namespace

BlowupTable preset_blowup(const RunConfig& cfg, const BlowupParams& params,
                          const std::filesystem::path& out_dir) {
  validate_config(cfg);
  const SpeedModel model = make_speed_model(cfg);
  validate_blowup(params, model);
  BlowupTable table;
  table.config_hash = config_hash(cfg);
  table.seed = cfg.noise.seed;
  table.params = params;
  table.x0 = params.x0 ? *params.x0 : steepest_bump_point();

  for (double eps : params.eps_list) {
    const RunConfig rc = blowup_config(cfg, params, eps);
    const Setup setup = Setup::build(rc);
    BlowupRow row;
    row.eps = eps;
    row.n = rc.n;
    row.dt = setup.settings.dt;
    row.horizon = rc.run.t_end;
    row.scale = rc.init.scale;
    row.x_eps = row.scale * table.x0;
    const double u_at = params.u_star + rc.init.amplitude * bump_profile(table.x0);
    row.R0_at_x = -model.c(u_at) * std::pow(eps, -params.nu - params.gamma) *
                  bump_profile_slope(table.x0);
    row.riccati_time = 1.0 / (model.ctilde_prime(params.u_star) * row.R0_at_x);

    PathOptions opts;
    opts.tracers = bump_tracers(rc, model, table.x0);
    opts.stop_on_tracer_blowup = true;

    RunConfig quiet = rc;
    quiet.noise.params.amplitude = 0.0;
    const PathResult det = run_path(Setup::build(quiet), 0, opts);
    row.deterministic_time = det.record.blowup_time;
    row.deterministic_grid_time = det.record.grid_blowup_time;
    row.deterministic_tracer_time = det.record.tracer_blowup_time;

    const auto results = run_paths(setup, params.paths, cfg.output.workers, opts);
    std::vector<double> times;
    for (const PathResult& r : results) {
      if (r.record.blowup_time && *r.record.blowup_time <= row.horizon + 1e-12) {
        ++row.blowups;
        times.push_back(*r.record.blowup_time);
      }
    }
    row.paths = params.paths;
    row.fraction = static_cast<double>(row.blowups) / row.paths;
    std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(row.blowups, row.paths);
    row.blowup_time = compute_stats(times);
    table.rows.push_back(row);
  }

  if (out_dir.empty()) return table;
  ensure_dir(out_dir);
  std::string csv =
      "eps,n,dt,horizon,scale,x_eps,R0_at_x,riccati_time,deterministic_time,"
      "deterministic_grid_time,deterministic_tracer_time,paths,blowups,fraction,wilson_lo,"
      "wilson_hi,mean_blowup_time\n";
  for (const BlowupRow& r : table.rows) {
    csv += num(r.eps) + ',' + std::to_string(r.n) + ',' + num(r.dt) + ',' + num(r.horizon) +
           ',' + num(r.scale) + ',' + num(r.x_eps) + ',' + num(r.R0_at_x) + ',' +
           num(r.riccati_time) + ',' + opt_num(r.deterministic_time) + ',' +
           opt_num(r.deterministic_grid_time) + ',' + opt_num(r.deterministic_tracer_time) +
           ',' + std::to_string(r.paths) + ',' + std::to_string(r.blowups) + ',' +
           num(r.fraction) + ',' + num(r.wilson_lo) + ',' + num(r.wilson_hi) + ',' +
           (r.blowup_time.count ? num(r.blowup_time.mean) : std::string()) + '\n';
  }
  write_text(out_dir / "blowup.csv", csv);
  write_text(out_dir / "blowup.json", blowup_to_json(table));

  std::string rep = "svw blowup  config " + table.config_hash + "  seed " +
                    std::to_string(table.seed) + '\n';
  rep += "alpha=" + num(params.alpha) + "  nu=" + num(params.nu) + "  gamma=" +
         num(params.gamma) + "  u*=" + num(params.u_star) + "  x0=" + num(table.x0) + '\n';
  for (const BlowupRow& r : table.rows) {
    rep += "eps=" + num(r.eps) + "  n=" + std::to_string(r.n) + "  horizon=" + num(r.horizon) +
           "  riccati=" + num(r.riccati_time) + "  zero-noise=" +
           (r.deterministic_time ? num(*r.deterministic_time) : std::string("none")) +
           "  fraction=" + std::to_string(r.blowups) + "/" + std::to_string(r.paths) +
           "  95% CI [" + num(r.wilson_lo) + ", " + num(r.wilson_hi) + "]\n";
  }
  write_text(out_dir / "report.txt", rep);
  return table;
}

std::string blowup_to_json(const BlowupTable& t) {
  json rows = json::array();
  for (const BlowupRow& r : t.rows) {
    rows.push_back({{"eps", r.eps},
                    {"n", r.n},
                    {"dt", r.dt},
                    {"horizon", r.horizon},
                    {"scale", r.scale},
                    {"x_eps", r.x_eps},
                    {"R0_at_x", r.R0_at_x},
                    {"riccati_time", r.riccati_time},
                    {"deterministic_time", opt(r.deterministic_time)},
                    {"deterministic_grid_time", opt(r.deterministic_grid_time)},
                    {"deterministic_tracer_time", opt(r.deterministic_tracer_time)},
                    {"paths", r.paths},
                    {"blowups", r.blowups},
                    {"fraction", r.fraction},
                    {"wilson_lo", r.wilson_lo},
                    {"wilson_hi", r.wilson_hi},
                    {"blowup_time", stats_json(r.blowup_time)}});
  }
  const BlowupParams& p = t.params;
  json j = {{"kind", "blowup"},
            {"config_hash", t.config_hash},
            {"seed", t.seed},
            {"alpha", p.alpha},
            {"nu", p.nu},
            {"gamma", p.gamma},
            {"u_star", p.u_star},
            {"x0", t.x0},
            {"cells_per_support", p.cells_per_support},
            {"rows", rows}};
  return j.dump(2) + '\n';
}

// ------------------------------------------------------------ convergence

std::pair<double, double> pointwise_defect(const std::vector<const State*>& runs) {
  if (runs.empty()) fail(ErrorCode::EmptyWindow, "no runs to compare");
  const std::size_t n = runs.front()->R.size();
  for (const State* s : runs) {
    if (!(s->R.grid() == runs.front()->R.grid())) {
      fail(ErrorCode::GridMismatch, "runs live on different grids");
    }
  }
  const double kk = static_cast<double>(runs.size());
  double dR = 0.0, dS = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mR = 0.0, mS = 0.0;
    for (const State* s : runs) {
      mR += s->R[i];
      mS += s->S[i];
    }
    mR /= kk;
    mS /= kk;
    double vR = 0.0, vS = 0.0;
    for (const State* s : runs) {
      vR += (s->R[i] - mR) * (s->R[i] - mR);
      vS += (s->S[i] - mS) * (s->S[i] - mS);
    }
    dR += 0.5 * vR / kk;
    dS += 0.5 * vS / kk;
  }
  return {dR / n, dS / n};
}

ConvergenceTable preset_convergence(const RunConfig& cfg, const ConvergenceParams& params,
                                    const std::filesystem::path& out_dir) {
  validate_config(cfg);
  const auto& eps = params.eps_list;
  if (eps.size() < 2) fail(ErrorCode::InvalidParameter, "convergence preset needs >= 2 eps");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) fail(ErrorCode::InvalidParameter, "eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      fail(ErrorCode::InvalidParameter, "eps list must be strictly decreasing");
    }
  }
  const int paths = params.paths > 0 ? params.paths : cfg.output.paths;

  ConvergenceTable table;
  table.config_hash = config_hash(cfg);
  table.seed = cfg.noise.seed;
  std::vector<std::vector<PathResult>> all;
  for (double e : eps) {
    RunConfig rc = cfg;
    rc.run.mode = "regularized";
    rc.run.epsilon = e;
    const Setup setup = Setup::build(rc);
    PathOptions opts;
    opts.keep_final_state = true;
    opts.track_lp = params.track_lp;
    opts.snapshots = true;
    opts.snap_t_min = rc.diagnostics.t_min;
    opts.snap_t_max = rc.diagnostics.t_max;
    all.push_back(run_paths(setup, paths, cfg.output.workers, opts));

    ConvergenceRow row;
    row.eps = e;
    row.paths = paths;
    std::vector<double> th, d, lp;
    for (const PathResult& r : all.back()) {
      if (r.record.blowup_time) {
        ++row.exploded;
        continue;
      }
      th.push_back(r.record.sup_abs_theta);
      d.push_back(r.record.D_T);
      lp.push_back(r.record.lp_integral);
    }
    row.sup_abs_theta = compute_stats(th);
    row.D_T = compute_stats(d);
    row.lp_integral = compute_stats(lp);
    if (auto m = pooled_moments(rc, setup.settings.dt, all.back())) row.window = *m;
    table.rows.push_back(row);
  }

  const auto& ref = all.back();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    std::vector<double> dist, pair;
    for (int p = 0; p < paths; ++p) {
      const PathResult& a = all[i][static_cast<std::size_t>(p)];
      const PathResult& b = ref[static_cast<std::size_t>(p)];
      if (a.record.blowup_time || b.record.blowup_time) continue;
      const State& sa = *a.final_state;
      const State& sb = *b.final_state;
      double acc = 0.0;
      for (std::size_t k = 0; k < sa.R.size(); ++k) {
        const double dr = sa.R[k] - sb.R[k], ds = sa.S[k] - sb.S[k];
        acc += dr * dr + ds * ds;
      }
      dist.push_back(std::sqrt(acc * sa.R.grid().dx()));
      if (i + 1 < eps.size()) {
        const PathResult& c = all[i + 1][static_cast<std::size_t>(p)];
        if (!c.record.blowup_time) pair.push_back(pointwise_defect({&sa, &*c.final_state}).first);
      }
    }
    table.rows[i].l2_to_reference = compute_stats(dist);
    if (i + 1 < eps.size() && !pair.empty()) table.rows[i].pair_delta = compute_stats(pair).mean;
  }

  std::vector<double> lx, ly;
  double lp_min = INFINITY, lp_max = -INFINITY;
  for (const ConvergenceRow& r : table.rows) {
    if (r.sup_abs_theta.count > 0 && r.sup_abs_theta.mean > 0.0) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.sup_abs_theta.mean));
    }
    if (r.lp_integral.count > 0) {
      lp_min = std::min(lp_min, r.lp_integral.mean);
      lp_max = std::max(lp_max, r.lp_integral.mean);
    }
  }
  if (lx.size() >= 2) table.theta_fit = fit_line(lx, ly);
  table.lp_variation = lp_min > 0.0 ? (lp_max - lp_min) / lp_min : 0.0;

  if (out_dir.empty()) return table;
  ensure_dir(out_dir);
  std::string csv =
      "eps,paths,exploded,mean_sup_theta,se_sup_theta,mean_D,se_D,mean_l2_to_reference,"
      "mean_lp_integral,pair_delta,delta,delta_check\n";
  for (const ConvergenceRow& r : table.rows) {
    csv += num(r.eps) + ',' + std::to_string(r.paths) + ',' + std::to_string(r.exploded) + ',' +
           num(r.sup_abs_theta.mean) + ',' + num(r.sup_abs_theta.se) + ',' + num(r.D_T.mean) +
           ',' + num(r.D_T.se) + ',' + num(r.l2_to_reference.mean) + ',' +
           num(r.lp_integral.mean) + ',' + opt_num(r.pair_delta) + ',' + num(r.window.delta) +
           ',' + num(r.window.delta_check) + '\n';
  }
  write_text(out_dir / "convergence.csv", csv);
  write_text(out_dir / "convergence.json", convergence_to_json(table));

  std::string rep = "svw converge  config " + table.config_hash + "  seed " +
                    std::to_string(table.seed) + '\n';
  for (const ConvergenceRow& r : table.rows) {
    rep += "eps=" + num(r.eps) + "  E sup|theta|=" + num(r.sup_abs_theta.mean) + "  D(T)=" +
           num(r.D_T.mean) + "  L2 to ref=" + num(r.l2_to_reference.mean) + "  lp=" +
           num(r.lp_integral.mean) + "  pair delta=" + opt_num(r.pair_delta) + '\n';
  }
  rep += "log-log slope of E sup|theta| vs eps: " + num(table.theta_fit.slope) + " +- " +
         num(table.theta_fit.slope_se) + '\n';
  rep += "lp integral relative variation: " + num(table.lp_variation) + '\n';
  write_text(out_dir / "report.txt", rep);
  return table;
}

std::string convergence_to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const ConvergenceRow& r : t.rows) {
    rows.push_back({{"eps", r.eps},
                    {"paths", r.paths},
                    {"exploded", r.exploded},
                    {"sup_abs_theta", stats_json(r.sup_abs_theta)},
                    {"D_T", stats_json(r.D_T)},
                    {"l2_to_reference", stats_json(r.l2_to_reference)},
                    {"lp_integral", stats_json(r.lp_integral)},
                    {"pair_delta", opt(r.pair_delta)},
                    {"window_moments", moments_json(r.window)}});
  }
  json j = {{"kind", "convergence"},
            {"config_hash", t.config_hash},
            {"seed", t.seed},
            {"theta_slope", t.theta_fit.slope},
            {"theta_slope_se", t.theta_fit.slope_se},
            {"theta_intercept", t.theta_fit.intercept},
            {"lp_variation", t.lp_variation},
            {"rows", rows}};
  return j.dump(2) + '\n';
}

}  // namespace svw
