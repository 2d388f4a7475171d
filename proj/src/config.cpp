#include "svw/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "svw/error.hpp"

namespace svw {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::ConfigInvalid, msg); }

// Reads one JSON object section and rejects keys it was not asked about.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    obj_ = &root.at(name_);
    if (!obj_->is_object()) invalid("section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    try {
      out = obj_->at(key).get<T>();
    } catch (const json::exception&) {
      invalid("'" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& item : obj_->items()) {
      if (!seen_.count(item.key())) invalid("unknown key '" + name_ + "." + item.key() + "'");
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

double fourier_sum(double mean, const std::vector<double>& cos_c,
                   const std::vector<double>& sin_c, double x) {
  const double w = 2.0 * std::numbers::pi * x;
  double v = mean;
  for (std::size_t k = 0; k < cos_c.size(); ++k) v += cos_c[k] * std::cos(w * double(k + 1));
  for (std::size_t k = 0; k < sin_c.size(); ++k) v += sin_c[k] * std::sin(w * double(k + 1));
  return v;
}

std::filesystem::path resolve(const RunConfig& cfg, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
  return path;
}

std::pair<Field, Field> read_field_file(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open initial data file " + path.string());
  std::vector<double> u, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cols.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (u.empty()) continue;  // header
      invalid("malformed row in " + path.string() + ": " + line);
    }
    if (cols.size() == 2) {
      u.push_back(cols[0]);
      v.push_back(cols[1]);
    } else if (cols.size() == 3) {
      u.push_back(cols[1]);
      v.push_back(cols[2]);
    } else {
      invalid("initial data rows need 2 (u,v) or 3 (x,u,v) columns");
    }
  }
  if (u.size() != static_cast<std::size_t>(grid.n())) {
    invalid("initial data file has " + std::to_string(u.size()) + " rows, grid has " +
            std::to_string(grid.n()));
  }
  return {Field(grid, std::move(u)), Field(grid, std::move(v))};
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) invalid("config must be a JSON object");
  static const std::set<std::string> sections{"grid",   "model",  "noise",      "run",
                                              "init",   "scheme", "output",     "diagnostics"};
  for (const auto& item : root.items()) {
    if (!sections.count(item.key())) invalid("unknown section '" + item.key() + "'");
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;

  Section grid(root, "grid");
  grid.get("n", cfg.n);
  grid.finish();

  Section model(root, "model");
  model.get("kind", cfg.model.kind);
  model.get("c_base", cfg.model.c_base);
  model.get("c_amp", cfg.model.c_amp);
  model.get("table_path", cfg.model.table_path);
  model.finish();

  Section noise(root, "noise");
  noise.get("pairs", cfg.noise.params.pairs);
  noise.get("amplitude", cfg.noise.params.amplitude);
  noise.get("decay", cfg.noise.params.decay);
  noise.get("seed", cfg.noise.seed);
  noise.get("epsilon", cfg.noise.epsilon);
  noise.finish();

  Section run(root, "run");
  run.get("t_end", cfg.run.t_end);
  run.get("dt", cfg.run.dt);
  run.get("cfl", cfg.run.cfl);
  run.get("mode", cfg.run.mode);
  run.get("epsilon", cfg.run.epsilon);
  run.get("explosion_threshold", cfg.run.explosion_threshold);
  run.finish();

  Section init(root, "init");
  InitConfig& ic = cfg.init;
  init.get("kind", ic.kind);
  init.get("u", ic.u);
  init.get("v", ic.v);
  init.get("u_mean", ic.u_mean);
  init.get("v_mean", ic.v_mean);
  init.get("u_cos", ic.u_cos);
  init.get("u_sin", ic.u_sin);
  init.get("v_cos", ic.v_cos);
  init.get("v_sin", ic.v_sin);
  init.get("u_star", ic.u_star);
  init.get("amplitude", ic.amplitude);
  init.get("scale", ic.scale);
  init.get("shift", ic.shift);
  init.get("path", ic.path);
  init.get("r_mean", ic.r_mean);
  init.get("r_cos", ic.r_cos);
  init.get("r_sin", ic.r_sin);
  init.get("s_cos", ic.s_cos);
  init.get("s_sin", ic.s_sin);
  init.get("u_origin", ic.u_origin);
  init.finish();

  Section scheme(root, "scheme");
  std::string interp = "cubic";
  scheme.get("interpolation", interp);
  scheme.finish();
  if (interp == "cubic") {
    cfg.interpolation = Interpolation::Cubic;
  } else if (interp == "linear") {
    cfg.interpolation = Interpolation::Linear;
  } else {
    invalid("scheme.interpolation must be \"cubic\" or \"linear\"");
  }

  Section output(root, "output");
  output.get("stride", cfg.output.stride);
  output.get("paths", cfg.output.paths);
  output.get("workers", cfg.output.workers);
  output.finish();

  Section diag(root, "diagnostics");
  diag.get("lp_alpha", cfg.diagnostics.lp_alpha);
  diag.get("kappas", cfg.diagnostics.kappas);
  diag.get("t_min", cfg.diagnostics.t_min);
  diag.get("t_max", cfg.diagnostics.t_max);
  diag.get("x_min", cfg.diagnostics.x_min);
  diag.get("x_max", cfg.diagnostics.x_max);
  diag.finish();

  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.n < 8 || cfg.n % 2 != 0) invalid("grid.n must be even and >= 8");
  const ModelConfig& m = cfg.model;
  if (m.kind == "tanh") {
    if (!(m.c_amp >= 0.0 && m.c_base > m.c_amp)) {
      invalid("model: tanh speed needs c_base > c_amp >= 0");
    }
  } else if (m.kind == "constant") {
    if (!(m.c_base > 0.0)) invalid("model.c_base must be positive");
  } else if (m.kind == "table") {
    if (m.table_path.empty()) invalid("model.table_path is required for kind \"table\"");
  } else {
    invalid("model.kind must be \"tanh\", \"constant\" or \"table\"");
  }

  const NoiseParams& np = cfg.noise.params;
  if (np.pairs < 0) invalid("noise.pairs must be >= 0");
  if (!(np.amplitude >= 0.0)) invalid("noise.amplitude must be >= 0");
  if (!(np.decay >= 3.0)) invalid("noise.decay must be >= 3");
  if (2 * np.pairs >= cfg.n) invalid("noise.pairs exceeds the grid Nyquist limit");
  if (cfg.noise.epsilon && !(*cfg.noise.epsilon > 0.0)) invalid("noise.epsilon must be positive");

  const RunSection& r = cfg.run;
  if (!(r.t_end > 0.0 && std::isfinite(r.t_end))) invalid("run.t_end must be positive");
  if (r.mode != "regular" && r.mode != "regularized") {
    invalid("run.mode must be \"regular\" or \"regularized\"");
  }
  if (r.mode == "regularized" && !(r.epsilon > 0.0)) {
    invalid("run.epsilon must be positive in regularized mode");
  }
  if (r.epsilon < 0.0) invalid("run.epsilon must be >= 0");
  if (r.dt) {
    if (!(*r.dt > 0.0)) invalid("run.dt must be positive");
  } else if (!(r.cfl > 0.0 && r.cfl <= 0.5)) {
    invalid("run.cfl must lie in (0, 0.5]");
  }

  const InitConfig& ic = cfg.init;
  static const std::set<std::string> kinds{"constant", "fourier", "bump", "file", "riemann"};
  if (!kinds.count(ic.kind)) {
    invalid("init.kind must be one of constant, fourier, bump, file, riemann");
  }
  if (ic.kind == "bump" && !(ic.scale > 0.0 && ic.scale <= 1.0)) {
    invalid("init.scale must lie in (0, 1]");
  }
  if (ic.kind == "file" && ic.path.empty()) invalid("init.path is required for kind \"file\"");
  if (2 * std::max({ic.u_cos.size(), ic.u_sin.size(), ic.v_cos.size(), ic.v_sin.size(),
                    ic.r_cos.size(), ic.r_sin.size(), ic.s_cos.size(), ic.s_sin.size()}) >=
      static_cast<std::size_t>(cfg.n)) {
    invalid("init Fourier coefficients exceed the grid Nyquist limit");
  }

  if (cfg.output.stride < 1) invalid("output.stride must be >= 1");
  if (cfg.output.paths < 1) invalid("output.paths must be >= 1");
  if (cfg.output.workers < 0) invalid("output.workers must be >= 0");

  const DiagnosticsConfig& d = cfg.diagnostics;
  if (!(d.lp_alpha >= 0.0 && d.lp_alpha < 1.0)) invalid("diagnostics.lp_alpha must lie in [0, 1)");
  if (!(d.x_min <= d.x_max)) invalid("diagnostics.x_min must not exceed x_max");

  // dt bound, checked against the model the run will actually use
  if (r.dt) {
    const SpeedModel model = make_speed_model(cfg);
    const double bound = max_time_step(Grid(cfg.n), model);
    if (*r.dt > bound * (1.0 + 1e-12)) {
      invalid("run.dt exceeds dx/(2 c2) = " + std::to_string(bound));
    }
  }
}

SpeedModel make_speed_model(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  try {
    if (m.kind == "tanh") return SpeedModel::tanh(m.c_base, m.c_amp);
    if (m.kind == "constant") return SpeedModel::constant(m.c_base);
    return SpeedModel::table_from_file(resolve(cfg, m.table_path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    invalid(std::string("model: ") + e.what());
  }
}

StepMode make_step_mode(const RunConfig& cfg) {
  return cfg.run.mode == "regularized" ? StepMode::regularized(cfg.run.epsilon)
                                       : StepMode::regular();
}

double noise_epsilon(const RunConfig& cfg) {
  if (cfg.noise.epsilon) return *cfg.noise.epsilon;
  return cfg.run.mode == "regularized" ? cfg.run.epsilon : 0.0;
}

double time_step(const RunConfig& cfg, const SpeedModel& model) {
  const Grid grid(cfg.n);
  if (cfg.run.dt) return *cfg.run.dt;
  return cfg.run.cfl * grid.dx() / model.c2();
}

double bump_profile(double y) {
  const double z = 4.0 * y - 2.0;
  if (!(std::fabs(z) < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - z * z));
}

double bump_profile_slope(double y) {
  const double z = 4.0 * y - 2.0;
  if (!(std::fabs(z) < 1.0)) return 0.0;
  const double w = 1.0 - z * z;
  return std::exp(-1.0 / w) * (-2.0 * z / (w * w)) * 4.0;
}

std::pair<Field, Field> make_initial_fields(const RunConfig& cfg, const Grid& grid) {
  const InitConfig& ic = cfg.init;
  if (ic.kind == "constant") return {Field(grid, ic.u), Field(grid, ic.v)};
  if (ic.kind == "fourier") {
    return {Field::sample(grid, [&](double x) { return fourier_sum(ic.u_mean, ic.u_cos, ic.u_sin, x); }),
            Field::sample(grid, [&](double x) { return fourier_sum(ic.v_mean, ic.v_cos, ic.v_sin, x); })};
  }
  if (ic.kind == "bump") {
    return {Field::sample(grid,
                          [&](double x) {
                            double y = x - ic.shift;
                            y -= std::floor(y);
                            return ic.u_star + ic.amplitude * bump_profile(y / ic.scale);
                          }),
            Field(grid, 0.0)};
  }
  if (ic.kind == "file") return read_field_file(resolve(cfg, ic.path), grid);
  invalid("init kind \"" + ic.kind + "\" does not define u0, v0");
}

State make_initial_state(const RunConfig& cfg, const Grid& grid, const SpeedModel& model) {
  const StepMode mode = make_step_mode(cfg);
  const InitConfig& ic = cfg.init;
  if (ic.kind == "riemann") {
    Field R = Field::sample(grid, [&](double x) { return fourier_sum(ic.r_mean, ic.r_cos, ic.r_sin, x); });
    Field S = Field::sample(grid, [&](double x) { return fourier_sum(ic.r_mean, ic.s_cos, ic.s_sin, x); });
    return init_state_from_invariants(std::move(R), std::move(S), ic.u_origin, mode);
  }
  auto [u0, v0] = make_initial_fields(cfg, grid);
  return init_state(u0, v0, model, mode);
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["grid"] = {{"n", cfg.n}};
  j["model"] = {{"kind", cfg.model.kind},
                {"c_base", cfg.model.c_base},
                {"c_amp", cfg.model.c_amp},
                {"table_path", cfg.model.table_path}};
  j["noise"] = {{"pairs", cfg.noise.params.pairs},
                {"amplitude", cfg.noise.params.amplitude},
                {"decay", cfg.noise.params.decay},
                {"seed", cfg.noise.seed}};
  if (cfg.noise.epsilon) j["noise"]["epsilon"] = *cfg.noise.epsilon;
  j["run"] = {{"t_end", cfg.run.t_end},
              {"cfl", cfg.run.cfl},
              {"mode", cfg.run.mode},
              {"epsilon", cfg.run.epsilon},
              {"explosion_threshold", cfg.run.explosion_threshold}};
  if (cfg.run.dt) j["run"]["dt"] = *cfg.run.dt;
  const InitConfig& ic = cfg.init;
  json init = {{"kind", ic.kind}};
  if (ic.kind == "constant") {
    init["u"] = ic.u;
    init["v"] = ic.v;
  } else if (ic.kind == "fourier") {
    init.update({{"u_mean", ic.u_mean}, {"u_cos", ic.u_cos}, {"u_sin", ic.u_sin},
                 {"v_mean", ic.v_mean}, {"v_cos", ic.v_cos}, {"v_sin", ic.v_sin}});
  } else if (ic.kind == "bump") {
    init.update({{"u_star", ic.u_star}, {"amplitude", ic.amplitude}, {"scale", ic.scale},
                 {"shift", ic.shift}});
  } else if (ic.kind == "file") {
    init["path"] = ic.path;
  } else {
    init.update({{"r_mean", ic.r_mean}, {"r_cos", ic.r_cos}, {"r_sin", ic.r_sin},
                 {"s_cos", ic.s_cos}, {"s_sin", ic.s_sin}, {"u_origin", ic.u_origin}});
  }
  j["init"] = init;
  j["scheme"] = {{"interpolation",
                  cfg.interpolation == Interpolation::Linear ? "linear" : "cubic"}};
  j["output"] = {{"stride", cfg.output.stride}, {"paths", cfg.output.paths}};
  j["diagnostics"] = {{"lp_alpha", cfg.diagnostics.lp_alpha},
                      {"kappas", cfg.diagnostics.kappas},
                      {"t_min", cfg.diagnostics.t_min},
                      {"t_max", cfg.diagnostics.t_max},
                      {"x_min", cfg.diagnostics.x_min},
                      {"x_max", cfg.diagnostics.x_max}};
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_to_json(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace svw
