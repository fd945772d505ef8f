#include "doctest.h"

#include "conespec/config.hpp"
#include "conespec/error.hpp"
#include "conespec/graph.hpp"
#include "conespec/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace conespec;

namespace {

constexpr double kPi = std::numbers::pi;

SeparationReport report_for(const nlohmann::json& config, int resolution = 512) {
  ReportOptions o;
  o.resolution = resolution;
  return assemble_report(parse_model(config), o);
}

}  // namespace

TEST_CASE("tau") {
  CHECK(*tau(0.0, 0.01, 1.0, 2).value == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(*tau(0.01, 0.01, 1.0, 2).value == doctest::Approx(0.509976991727485826739).epsilon(1e-13));
  // Theta (1 - N S) / C <= N S / (1 - S)^2
  CHECK_FALSE(tau(0.1, 1.0, 0.1, 2).value.has_value());
  CHECK_FALSE(tau(0.6, 0.1, 1.0, 2).value.has_value());
  CHECK(*tau(0.04, 0.0, 1.0, 2).value == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("delta star") {
  CHECK(delta_star(0.0, 0.3, {0.5, 0.5}, 2).value == 0.0);
  const auto d = delta_star(0.01, kPi / 6, {0.5, 0.5}, 2);
  CHECK(d.value == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(d.gate);
  const auto e = delta_star(d.threshold, kPi / 6, {0.5, 0.5}, 2);
  CHECK_FALSE(e.gate);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(delta_star(0.01, kPi / 4, {0.5, 0.5}, 2), Error);
}

TEST_CASE("feasibility") {
  const auto t = tau(0.0, 1e-4, 1.0, 2);
  const auto f = feasibility(t, 0.0, 2, kPi / 8, 0.5, 0.0);
  CHECK(f.rhs == doctest::Approx(0.482447993407010286).epsilon(1e-12));
  CHECK(f.s == doctest::Approx(0.196349540849362077).epsilon(1e-14));
  CHECK(f.t == doctest::Approx(3.56032403924933553).epsilon(1e-12));
  CHECK_FALSE(f.feasible);
  CHECK(f.failure == "t^2 >= 1 - delta*");

  // tau = sqrt(S) with tau N -> 0 leaves t -> 0.
  const auto z = feasibility(BoundValue{1e-20, {}}, 1e-40, 2, kPi / 8, 0.5, 0.0);
  CHECK(z.feasible);
  CHECK(z.t < 1e-8);
  CHECK(z.cone_sigma == doctest::Approx(3 * kPi / 16));
  CHECK(z.cone_r == doctest::Approx((1 - std::sin(kPi / 16)) * std::sqrt(2.0)));

  CHECK_FALSE(feasibility(BoundValue{0.6, {}}, 0.0, 2, kPi / 8, 0.5, 0.0).feasible);
  CHECK_FALSE(feasibility(BoundValue{std::nullopt, "x"}, 0.0, 2, kPi / 8, 0.5, 0.0).feasible);

  // The refined search never does worse than the midpoint.
  const auto small = tau(0.0, 1e-6, 1.0, 2);
  const auto mid = feasibility(small, 0.0, 2, kPi / 8, 0.5, 0.0);
  const auto refined = feasibility(small, 0.0, 2, kPi / 8, 0.5, 0.0, true);
  CHECK(refined.t <= mid.t);
  CHECK(refined.cone_sigma < kPi / 4);
}

TEST_CASE("phi") {
  const double eps = 0.2, n = 1000;
  const double scale = eps + std::log(n) / (eps * n);
  CHECK(*phi(0.0, 0.01, 1.0, 2, eps, n, 1).value == doctest::Approx(2 * 0.01 * scale / (1 - 0.02)).epsilon(1e-13));
  CHECK(*phi(0.0, 0.01, 1.0, 2, eps, n, 1, 3.0).value ==
        doctest::Approx(3 * 2 * 0.01 * scale / (1 - 0.02)).epsilon(1e-13));
  CHECK(*phi(0.001, 0.002, 1.0, 2, eps, n, 1).value == doctest::Approx(0.00101188327186189683).epsilon(1e-12));
  CHECK_FALSE(phi(0.0, 0.6, 1.0, 2, eps, n, 1).value.has_value());

  double last = 1e300;
  for (double size : {1e3, 1e4, 1e5}) {
    const double v = *phi(0.001, 0.002, 1.0, 2, default_epsilon(size, 2), size, 2).value;
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("formulas are monotone on a parameter grid") {
  const double Ss[] = {0.0, 1e-4, 1e-3, 5e-3, 1e-2};
  const double Cs[] = {1e-5, 1e-4, 1e-3, 3e-3, 1e-2};
  const double Ts[] = {0.5, 1.0, 2.0, 5.0, 10.0};
  for (double S : Ss)
    for (double C : Cs)
      for (std::size_t i = 0; i + 1 < 5; ++i) {
        const auto a = tau(S, C, Ts[i], 2), b = tau(S, C, Ts[i + 1], 2);
        if (a.value && b.value) CHECK(*b.value <= *a.value);
      }
  for (double sigma : {0.1, 0.3, 0.5, 0.7})
    for (std::size_t i = 0; i + 1 < 5; ++i)
      CHECK(delta_star(Ss[i], sigma, {0.3, 0.7}, 2).value < delta_star(Ss[i + 1], sigma, {0.3, 0.7}, 2).value);
  for (double S : Ss)
    for (double T : Ts)
      for (std::size_t i = 0; i + 1 < 5; ++i) {
        const auto a = phi(S, Cs[i], T, 2, 0.1, 1e4, 1), b = phi(S, Cs[i + 1], T, 2, 0.1, 1e4, 1);
        if (a.value && b.value) CHECK(*a.value < *b.value);
      }
}

TEST_CASE("formulas are deterministic") {
  const auto a = tau(0.003, 0.002, 1.3, 3), b = tau(0.003, 0.002, 1.3, 3);
  CHECK(*a.value == *b.value);
  CHECK(*phi(0.003, 0.002, 1.3, 3, 0.1, 500, 2).value == *phi(0.003, 0.002, 1.3, 3, 0.1, 500, 2).value);
}

TEST_CASE("gaussian pair verdicts") {
  PresetOptions o;
  o.gamma = 12.0;
  const auto far = report_for(preset_config("gaussian-pair", o));
  CHECK(far.verdict == SeparationReport::Verdict::well_separated);
  CHECK(far.violated.empty());
  CHECK(far.tau_exceeds_sqrt_s);
  CHECK(far.tau_n_below_one);

  // The cone-mass condition leaves nothing to certify at offset 8.
  o.gamma = 8.0;
  const auto mid = report_for(preset_config("gaussian-pair", o));
  CHECK(mid.verdict == SeparationReport::Verdict::indeterminate);
  CHECK(mid.tau_n_below_one);
  for (const auto& row : mid.rows) CHECK_FALSE(row.continuum.feasible);

  o.gamma = 0.5;
  const auto close = report_for(preset_config("gaussian-pair", o));
  CHECK(*close.S.value > 0.5);
  CHECK(close.verdict == SeparationReport::Verdict::not_separated);
  CHECK_FALSE(close.violated.empty());
}

TEST_CASE("well-separated verdict implies every flag") {
  for (double g : {1.0, 4.0, 8.0, 10.0, 12.0, 14.0}) {
    PresetOptions o;
    o.gamma = g;
    const auto r = report_for(preset_config("gaussian-pair", o), 256);
    if (r.verdict != SeparationReport::Verdict::well_separated) continue;
    CHECK(r.tau_exceeds_sqrt_s);
    CHECK(r.tau_n_below_one);
    bool witnessed = false;
    for (const auto& row : r.rows)
      witnessed |= row.delta_star.gate && row.continuum.feasible && row.continuum.cone_sigma < kPi / 4;
    CHECK(witnessed);
  }
}

TEST_CASE("dumbbell bad partition is not separated") {
  PresetOptions o;
  o.partition = "bad";
  const auto bad = report_for(preset_config("dumbbell", o), 256);
  o.partition = "good";
  const auto good = report_for(preset_config("dumbbell", o), 256);
  CHECK(*bad.theta.value < *good.theta.value / 10);
  CHECK(bad.verdict == SeparationReport::Verdict::not_separated);
}

TEST_CASE("eigenvalue sandwich holds on shipped models") {
  PresetOptions o;
  for (const std::string name : {"gaussian-pair", "dumbbell"}) {
    const auto r = report_for(preset_config(name, o), 256);
    if (r.lambda_n_upper.value) CHECK(*r.lambda_n.value <= *r.lambda_n_upper.value + 1e-6);
    if (r.lambda_n1_lower.value) CHECK(*r.lambda_n1.value >= *r.lambda_n1_lower.value - 1e-6);
  }
}

TEST_CASE("graph-side fields") {
  PresetOptions o;
  o.gamma = 12.0;
  ReportOptions ro;
  ro.resolution = 256;
  ro.graph = GraphParameters{0.5, 2000, 1};
  const auto r = assemble_report(parse_model(preset_config("gaussian-pair", o)), ro);
  REQUIRE(r.phi.value);
  CHECK(*r.phi.value > 0);
  REQUIRE(r.assumption_lhs.value);
  CHECK(r.assumption_holds == (*r.assumption_lhs.value <= *r.assumption_rhs.value));
  for (const auto& row : r.rows) {
    REQUIRE(row.discrete);
    // The sample-level condition only adds to the right-hand side.
    if (row.discrete->t > 0) CHECK(row.discrete->t >= row.continuum.t);
  }
  const auto j = to_json(r);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["verdict"] == "well-separated");
  CHECK(j["graph"]["c_M"] == 1.0);
  CHECK(render_text(r).find("verdict: well-separated") == 0);
}

TEST_CASE("disjoint supports") {
  const auto r = report_for(preset_config("two-circles"), 256);
  CHECK(*r.S.value == 0.0);
  CHECK(*r.C.value == 0.0);
  CHECK(r.verdict == SeparationReport::Verdict::well_separated);
  CHECK_FALSE(r.lambda_n.value.has_value());
  CHECK(to_json(r)["lambda"]["N_computed"]["value"].is_null());
}

TEST_CASE("model config parsing") {
  for (const auto& name : preset_names()) CHECK(parse_model(preset_config(name)).size() == 2);

  auto c = preset_config("gaussian-pair");
  c["components"][1].erase("sd");
  try {
    parse_model(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
    CHECK(std::string(e.what()).find("components[1].sd") != std::string::npos);
  }
  c = preset_config("gaussian-pair");
  c["weights"] = {0.5, 0.6};
  CHECK_THROWS_AS(parse_model(c), Error);
  c = preset_config("gaussian-pair");
  c["domain"]["kind"] = "torus";
  CHECK_THROWS_WITH_AS(parse_model(c), doctest::Contains("domain.kind"), Error);

  const auto dir = std::filesystem::temp_directory_path() / "conespec_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream t(dir / "bump.csv");
    t << "x,density\n0,0\n0.5,2\n1,0\n";
    std::ofstream f(dir / "model.json");
    f << R"({"domain": {"kind": "interval", "lo": 0, "hi": 2},
  "components": [{"kind": "table", "csv": "bump.csv"},
                 {"kind": "table", "points": [[1, 0], [1.5, 1], [2, 0]]}],
  "weights": [0.5, 0.5]})";
    std::ofstream bad(dir / "bad.json");
    bad << "{\n  \"domain\": {\n    \"kind\": ,\n}";
  }
  const auto m = parse_model(read_config(dir / "model.json"), dir);
  CHECK(m.component_density(0, Point(0.5, 0)) == doctest::Approx(2.0));
  CHECK_THROWS_WITH_AS(read_config(dir / "bad.json"), doctest::Contains("bad.json:3:"), Error);
  CHECK_THROWS_WITH_AS(read_config(dir / "missing.json"), doctest::Contains("missing.json"), Error);
  std::filesystem::remove_all(dir);
}
