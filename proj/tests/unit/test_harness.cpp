#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "svw/config.hpp"
#include "svw/error.hpp"
#include "svw/harness.hpp"

using namespace svw;
namespace fs = std::filesystem;

namespace {

const char* const kBase = R"({
  "grid": {"n": 64},
  "noise": {"pairs": 4, "amplitude": 0.3, "seed": 21},
  "run": {"t_end": 0.2},
  "init": {"kind": "fourier", "u_cos": [0.05], "v_sin": [0.4]},
  "output": {"stride": 4, "paths": 6}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("svw_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Runtime;
}

}  // namespace

TEST_CASE("config rejects unknown or invalid settings") {
  CHECK(code_of(R"({"grid": {"n": 64}, "bogus": {}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"grid": {"n": 64, "size": 3}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"grid": {"n": 63}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"grid": {"n": "64"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"noise": {"decay": 2.0}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"grid": {"n": 64}, "run": {"dt": 0.01}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"run": {"mode": "regularized"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of(R"({"scheme": {"interpolation": "spline"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_of("{not json") == ErrorCode::ConfigInvalid);
  try {
    load_config("/nonexistent/config.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("canonical JSON round trip") {
  const RunConfig a = parse_config(kBase);
  const RunConfig b = parse_config(config_to_json(a));
  CHECK(config_to_json(a) == config_to_json(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  RunConfig c = a;
  c.noise.seed = 22;
  CHECK(config_hash(c) != config_hash(a));
  c = a;
  c.output.workers = 3;
  CHECK(config_hash(c) == config_hash(a));
}

TEST_CASE("constant data without noise keeps the energy") {
  RunConfig cfg = parse_config(R"({
    "grid": {"n": 64}, "noise": {"pairs": 0},
    "run": {"t_end": 0.3}, "init": {"kind": "constant", "u": 0.2, "v": 0.7},
    "output": {"stride": 1}
  })");
  const fs::path out = scratch("constant");
  const RunOutput r = run_single(cfg, out);
  for (const char* f : {"timeseries.csv", "final_state.csv", "summary.json", "report.txt"}) {
    CHECK(fs::exists(out / f));
  }
  std::istringstream csv(slurp(out / "timeseries.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == kTimeseriesHeader);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string path, t, E;
    std::getline(row, path, ',');
    std::getline(row, t, ',');
    std::getline(row, E, ',');
    CHECK(std::stod(E) == doctest::Approx(2.0 * 0.49).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows > 10);
  CHECK(r.record.E_T == doctest::Approx(0.98).epsilon(1e-12));
  fs::remove_all(out);
}

TEST_CASE("same seed, same bytes") {
  const RunConfig cfg = parse_config(kBase);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_single(cfg, a);
  run_single(cfg, b);
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  CHECK(slurp(a / "final_state.csv") == slurp(b / "final_state.csv"));
  RunConfig other = cfg;
  other.noise.seed = 99;
  const fs::path c = scratch("det_c");
  run_single(other, c);
  CHECK(slurp(a / "timeseries.csv") != slurp(c / "timeseries.csv"));
  for (const fs::path& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("ensemble summary does not depend on the worker count") {
  RunConfig cfg = parse_config(kBase);
  cfg.output.workers = 1;
  const EnsembleSummary one = run_ensemble(cfg, {});
  cfg.output.workers = 4;
  const EnsembleSummary four = run_ensemble(cfg, {});
  CHECK(summary_to_json(one) == summary_to_json(four));
  CHECK(one.paths == 6);
  CHECK(one.records.size() == 6);
}

TEST_CASE("one-path ensemble matches the single run") {
  RunConfig cfg = parse_config(kBase);
  cfg.output.paths = 1;
  const RunOutput single = run_single(cfg, {});
  const EnsembleSummary ens = run_ensemble(cfg, {});
  REQUIRE(ens.records.size() == 1);
  CHECK(ens.E_T.mean == single.record.E_T);
  CHECK(ens.D_T.mean == single.record.D_T);
  CHECK(ens.max_abs_residual.mean == single.record.max_abs_residual);
  CHECK(ens.records[0].M_T == single.record.M_T);
}

TEST_CASE("ensemble writes its outputs") {
  const RunConfig cfg = parse_config(kBase);
  const fs::path out = scratch("ensemble");
  run_ensemble(cfg, out);
  for (const char* f : {"timeseries.csv", "paths.csv", "ensemble_timeseries.csv",
                        "summary.json", "window_moments.json", "report.txt"}) {
    CHECK(fs::exists(out / f));
  }
  fs::remove_all(out);
}

TEST_CASE("statistics helpers") {
  const Stats s = compute_stats({4.0, 1.0, 3.0, 2.0});
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.q50 == 2.5);
  CHECK(s.q05 == doctest::Approx(1.15));
  // published Wilson intervals at 95%
  auto [lo, hi] = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
  std::tie(lo, hi) = wilson_interval(0, 10);
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(0.2775).epsilon(1e-3));
  std::tie(lo, hi) = wilson_interval(200, 200);
  CHECK(hi == 1.0);
  CHECK(lo == doctest::Approx(0.9812).epsilon(1e-3));
  const LineFit f = fit_line({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0));
}

TEST_CASE("blow-up parameters") {
  const SpeedModel m = SpeedModel::tanh();
  BlowupParams p;
  CHECK_NOTHROW(validate_blowup(p, m));
  BlowupParams bad = p;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(validate_blowup(bad, m), Error);
  bad = p;
  bad.nu = 0.6;
  CHECK_THROWS_AS(validate_blowup(bad, m), Error);
  bad = p;
  bad.gamma = 0.3;
  CHECK_THROWS_AS(validate_blowup(bad, m), Error);
  bad = p;
  bad.x0 = 0.4;  // phi' > 0 there
  CHECK_THROWS_AS(validate_blowup(bad, m), Error);
  CHECK_THROWS_AS(validate_blowup(p, SpeedModel::constant(2.0)), Error);

  const double x0 = steepest_bump_point();
  CHECK(x0 > 0.5);
  CHECK(x0 < 0.75);
  CHECK(bump_profile_slope(x0) < 0.0);
  for (double y = 0.26; y < 0.74; y += 0.001) {
    CHECK(bump_profile_slope(y) >= bump_profile_slope(x0) - 1e-12);
  }
  const double h = 1e-6;
  CHECK(bump_profile_slope(0.6) ==
        doctest::Approx((bump_profile(0.6 + h) - bump_profile(0.6 - h)) / (2 * h)).epsilon(1e-6));
  CHECK(bump_profile(0.2) == 0.0);
  CHECK(bump_profile(0.5) == doctest::Approx(std::exp(-1.0)));

  const RunConfig base = parse_config(R"({"grid": {"n": 1024}})");
  const RunConfig c = blowup_config(base, p, 0.1);
  CHECK(c.run.t_end == doctest::Approx(std::pow(0.1, 0.4)));
  CHECK(c.run.mode == "regular");
  CHECK(c.init.kind == "bump");
}

TEST_CASE("mild data shows no blow-up") {
  RunConfig cfg = parse_config(R"({"grid": {"n": 256}, "noise": {"seed": 4}})");
  BlowupParams p;
  p.eps_list = {0.9};
  p.paths = 8;
  const BlowupTable t = preset_blowup(cfg, p, {});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].riccati_time > t.rows[0].horizon);
  CHECK(t.rows[0].blowups == 0);
  CHECK(t.rows[0].fraction == 0.0);
}

TEST_CASE("convergence sweep on smooth data") {
  RunConfig cfg = parse_config(R"({
    "grid": {"n": 64}, "noise": {"pairs": 2, "amplitude": 0.1, "seed": 8},
    "run": {"t_end": 0.2, "mode": "regularized", "epsilon": 0.1},
    "init": {"kind": "fourier", "u_cos": [0.02], "v_sin": [0.2]},
    "output": {"paths": 3}
  })");
  ConvergenceParams p;
  p.eps_list = {0.2, 0.1};
  const ConvergenceTable t = preset_convergence(cfg, p, {});
  REQUIRE(t.rows.size() == 2);
  for (const ConvergenceRow& r : t.rows) {
    CHECK(r.D_T.max == 0.0);
    CHECK(r.paths == 3);
  }
  CHECK(t.rows.back().l2_to_reference.max == 0.0);
  CHECK(t.rows.front().pair_delta.has_value());
  CHECK_FALSE(t.rows.back().pair_delta.has_value());
  ConvergenceParams inc = p;
  inc.eps_list = {0.1, 0.2};
  CHECK_THROWS_AS(preset_convergence(cfg, inc, {}), Error);
}

TEST_CASE("pointwise defect") {
  const Grid g(16);
  const State a{Field(g, 1.0), Field(g, 2.0), 0.0, 0.0, false, std::nullopt};
  const State b{Field(g, 3.0), Field(g, 2.0), 0.0, 0.0, false, std::nullopt};
  auto [dR, dS] = pointwise_defect({&a, &a});
  CHECK(dR == 0.0);
  CHECK(dS == 0.0);
  std::tie(dR, dS) = pointwise_defect({&a, &b});
  CHECK(dS == 0.0);
  CHECK(dR == 0.5);
}
