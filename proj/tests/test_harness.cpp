#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "necklab/error.hpp"
#include "necklab/harness.hpp"

using namespace necklab;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig small_family(DisplacementRule rule) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Degeneration;
  cfg.degeneration.l_schedule = {0.4, 0.3, 0.2};
  cfg.degeneration.rule = rule;
  cfg.rows_per_unit = 4;
  cfg.n_th = 8;
  cfg.solver.max_iters = 60;
  return cfg;
}

}  // namespace

TEST_CASE("displacement rules") {
  CHECK(DisplacementRule::fixed_displacement(2.0).slope(8.0) == doctest::Approx(0.25));
  CHECK(DisplacementRule::fixed_slope(0.3).slope(100.0) == 0.3);
  CHECK(DisplacementRule::power_law(1.0, 0.5).slope(16.0) == doctest::Approx(0.25));
  const auto r = DisplacementRule::from_json({{"name", "power_law"}, {"c", 2.0}, {"p", 0.75}});
  CHECK(r.kind == DisplacementRule::Kind::PowerLaw);
  CHECK(DisplacementRule::from_json(r.to_json()).power == 0.75);
  CHECK_THROWS_AS(DisplacementRule::from_json({{"name", "spiral"}}), Error);
}

TEST_CASE("config parsing") {
  const nlohmann::json j = {
      {"kind", "degenerate"},
      {"target", {{"name", "sphere"}, {"dim", 3}}},
      {"grid", {{"rows_per_unit", 6}, {"n_th", 12}}},
      {"solver", {{"method", "flow"}, {"tol_tension", 1e-6}}},
      {"degeneration", {{"l_schedule", {0.2, 0.1, 0.05}}, {"rule", {{"name", "fixed_slope"}, {"a", 0.1}}}}},
      {"seed", 9}};
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.kind == ExperimentKind::Degeneration);
  CHECK(c.rows_per_unit == 6);
  CHECK(c.solver.method == SolveMethod::Flow);
  CHECK(c.degeneration.l_schedule.size() == 3);
  CHECK(c.degeneration.thin_delta() == doctest::Approx(std::asinh(1.0)));
  CHECK(c.seed == 9);
  auto bad = j;
  bad["typo"] = 1;
  try {
    ExperimentConfig::from_json(bad);
    FAIL("accepted an unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), Error);
  CHECK_THROWS_AS(parse_kind("nothing"), Error);
}

TEST_CASE("one family member: geodesic on the thin part") {
  const ExperimentConfig cfg = small_family(DisplacementRule::fixed_displacement(1.0));
  const RecordRow row = run_member(cfg, 0.2, 1);
  CHECK(row.ok());
  CHECK(row.cylinder_length == doctest::Approx(subcollar(0.2, std::asinh(1.0)).length()));
  CHECK(row.slope * row.cylinder_length == doctest::Approx(1.0));
  // A relaxed geodesic has α = 2π a² and its neck identity is exact.
  CHECK(row.alpha.real() == doctest::Approx(2 * kPi * row.slope * row.slope).epsilon(1e-3));
  CHECK(row.residual_energy < 1e-3);
  CHECK(row.energy_scale == doctest::Approx(std::abs(row.alpha.real()) * kPi * kPi / 0.2));
}

TEST_CASE("degeneration run is thread-count independent") {
  const ExperimentConfig cfg = small_family(DisplacementRule::power_law(1.0, 0.75));
  const DegenerationResult a = run_degeneration(cfg, 1);
  const DegenerationResult b = run_degeneration(cfg, 3);
  CHECK(to_csv(a.rows) == to_csv(b.rows));
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[0].l > a.rows[2].l);
  CHECK(a.verdict.has_value());
  CHECK(a.to_json().contains("verdict"));
}

TEST_CASE("csv and json tables") {
  RecordRow r;
  r.l = 0.1;
  r.alpha = {0.5, -0.25};
  r.converged = true;
  r.failure = "has, comma";
  const std::string csv = to_csv({r});
  CHECK(csv.rfind(csv_header().front(), 0) == 0);
  CHECK(csv.find("\"has, comma\"") != std::string::npos);
  const auto back = rows_from_json(rows_to_json({r}));
  REQUIRE(back.size() == 1);
  CHECK(back[0].alpha == r.alpha);
  CHECK(back[0].failure == r.failure);
  CHECK_THROWS_AS(export_table({}, TableFormat::Csv, "unused.csv"), Error);
}

TEST_CASE("svg rendering") {
  Series s{"E", {{10, 1}, {20, 2}, {40, 4}}};
  const std::string svg = render_svg({s}, "title");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK_THROWS_AS(render_svg({}, "t"), Error);
  CHECK_THROWS_AS(render_svg({Series{"x", {{1, 1}}}}, "t"), Error);
  CHECK_THROWS_AS(render_svg({Series{"x", {{1, 1}, {1, 2}}}}, "t"), Error);
}

TEST_CASE("collar table and single solve") {
  const nlohmann::json t = collar_table({0.1, 0.0});
  CHECK(t.at("subcollar_t1").get<double>() == doctest::Approx(3.14421392612890377798));
  CHECK(t.at("injrad_core").get<double>() == doctest::Approx(0.05));

  ExperimentConfig cfg;
  cfg.single.init = "wobbly";
  cfg.single.t_max = 4.0;
  cfg.single.n_t = 65;
  cfg.single.n_th = 16;
  const nlohmann::json r = run_single(cfg, false);
  CHECK(r.at("pass").get<bool>());
  cfg.single.init = "spiral";
  CHECK_THROWS_AS(build_single_field(cfg), Error);
}
