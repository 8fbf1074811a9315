#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vkns/verification.hpp"

using namespace vkns;

namespace {

ScenarioSpec small(ScenarioKind kind, double t_end = 0.2) {
  ScenarioSpec s;
  s.name = "small";
  s.kind = kind;
  s.n = 16;
  s.control.t_end = t_end;
  s.control.output_interval = 0.05;
  return s;
}

ScenarioSpec at_rest(ScenarioKind kind) {
  ScenarioSpec s = small(kind);
  s.init.kind = InitKind::constant_plus_mode;
  s.init.density_amplitude = 0.0;
  s.init.velocity_amplitude = 0.0;
  return s;
}

}  // namespace

TEST_CASE("assertion parsing") {
  const Assertion a = parse_assertion("mass_drift <= 1e-10");
  CHECK(a.functional == "mass_drift");
  CHECK(a.cmp == Comparator::le);
  CHECK(a.threshold == 1e-10);
  CHECK(a.mode == AssertionMode::pass_fail);
  const Assertion b = parse_assertion("int_XY finite report");
  CHECK(b.cmp == Comparator::finite);
  CHECK(b.mode == AssertionMode::report_only);
  CHECK(parse_assertion("rho_min_inf > 0").cmp == Comparator::gt);
  CHECK(parse_assertion(to_string(a)).threshold == a.threshold);
  CHECK_THROWS(parse_assertion("mass_drift ~ 3"));
  CHECK_THROWS(parse_assertion("mass_drift <="));
}

TEST_CASE("scenario kind names") {
  for (ScenarioKind k : {ScenarioKind::conservation, ScenarioKind::energy_inequality,
                         ScenarioKind::density_bounds, ScenarioKind::large_time, ScenarioKind::ratios,
                         ScenarioKind::mollification_ladder})
    CHECK(scenario_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(scenario_kind_from_string("blowup"));
  CHECK(to_string(ScenarioStatus::insufficient_horizon) == "insufficient-horizon");
}

TEST_CASE("unknown functionals are rejected") {
  ScenarioSpec s = small(ScenarioKind::conservation);
  s.assertions.push_back(parse_assertion("vorticity_max <= 1"));
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("rest state passes every trajectory scenario") {
  for (ScenarioKind k : {ScenarioKind::conservation, ScenarioKind::energy_inequality,
                         ScenarioKind::density_bounds}) {
    const ScenarioResult r = run_scenario(at_rest(k));
    CHECK_MESSAGE(r.passed(), to_string(k) << ": " << r.reason);
    CHECK(r.measures.at("mass_drift") == 0.0);
    CHECK(r.measures.at("dissipation_total") == 0.0);
    CHECK(r.series.size() == 5);
  }
}

TEST_CASE("perturbed run conserves mass and momentum") {
  const ScenarioResult r = run_conservation(small(ScenarioKind::conservation));
  CHECK(r.passed());
  CHECK(r.measures.at("mass_drift") <= 1e-12);
  CHECK(r.measures.at("momentum_drift") <= 1e-12);
  CHECK(r.provenance.config_hash.size() == 16);
}

TEST_CASE("energy inequality holds at n = 64 and fails under forcing") {
  ScenarioSpec s = small(ScenarioKind::energy_inequality, 0.1);
  s.n = 64;
  s.control.output_interval = 0.025;
  const ScenarioResult ok = run_energy_inequality(s);
  CHECK_MESSAGE(ok.passed(), ok.reason);
  CHECK(ok.measures.at("dissipation_total") > 0.0);

  // Negative control: a body force pumping momentum along the flow injects
  // energy, so the inequality must break.
  s.n = 16;
  s.forcing = [](const FluidState& st, RealField&, VectorField& dm) {
    dm.x += 5.0 * st.m.x;
    dm.y += 5.0 * st.m.y;
  };
  const ScenarioResult bad = run_energy_inequality(s);
  CHECK(bad.status == ScenarioStatus::fail);
  CHECK(bad.measures.at("energy_residual_max") > 0.0);
  CHECK(bad.reason.find("energy_residual_max") != std::string::npos);
}

TEST_CASE("density ceiling is enforced") {
  ScenarioSpec s = small(ScenarioKind::density_bounds);
  const ScenarioResult ok = run_density_bounds(s);
  CHECK(ok.passed());
  CHECK(ok.measures.at("rho_min_inf") > 0.0);
  s.rho_ceiling = 1.0;  // below the initial maximum
  const ScenarioResult bad = run_density_bounds(s);
  CHECK(bad.status == ScenarioStatus::fail);
}

TEST_CASE("large-time preconditions") {
  ScenarioSpec s = small(ScenarioKind::large_time);
  s.params = Params(1.0, 1.4, 1.2);
  CHECK_THROWS_WITH_AS(run_large_time(s), doctest::Contains("beta > 3/2"), std::invalid_argument);
  s.params = Params(1.0, 2.0, 5.5);
  CHECK_THROWS_WITH_AS(run_large_time(s), doctest::Contains("gamma < 4 beta - 3"), std::invalid_argument);
}

TEST_CASE("short large-time run reports an insufficient horizon") {
  ScenarioSpec s = small(ScenarioKind::large_time, 0.1);
  const ScenarioResult r = run_large_time(s);
  CHECK(r.status == ScenarioStatus::insufficient_horizon);
  CHECK(r.measures.at("rho_decay") < 1.0);
  CHECK(r.measures.at("rho_decay") > s.decay_fraction);
}

TEST_CASE("ratio scenario records finite sups") {
  const ScenarioResult r = run_logY_and_G_ratios(small(ScenarioKind::ratios));
  CHECK(std::isfinite(r.measures.at("ratio_logY_sup")));
  CHECK(std::isfinite(r.measures.at("ratio_G_sup")));
  CHECK(r.measures.at("ratio_G_sup") > 0.0);
  CHECK(std::isfinite(r.measures.at("int_XY")));
}

TEST_CASE("continued trajectory equals a straight one") {
  ScenarioSpec full = small(ScenarioKind::conservation, 0.2);
  ScenarioSpec half = full;
  half.control.t_end = 0.1;
  const TrajectoryRun straight = run_trajectory(full);
  const TrajectoryRun first = run_trajectory(half);
  const TrajectoryRun rest = run_trajectory(full, &first);
  REQUIRE(rest.series.size() == straight.series.size());
  for (std::size_t k = 0; k < rest.series.size(); ++k) {
    CHECK(rest.series[k].energy == straight.series[k].energy);
    CHECK(rest.series[k].int_XY == straight.series[k].int_XY);
    CHECK(rest.series[k].rho_hat == straight.series[k].rho_hat);
  }
  CHECK(rest.rho_deviation.back() == straight.rho_deviation.back());
}

TEST_CASE("ladder needs three rungs") {
  ScenarioSpec s = small(ScenarioKind::mollification_ladder);
  s.widths = {0.25, 0.125};
  CHECK_THROWS_WITH_AS(run_mollification_ladder(s), doctest::Contains("at least 3"), std::invalid_argument);
}

TEST_CASE("small ladder") {
  ScenarioSpec s = small(ScenarioKind::mollification_ladder, 0.1);
  s.init.velocity_amplitude = 0.1;
  s.jobs = 2;
  const ScenarioResult r = run_mollification_ladder(s);
  CHECK(r.ladder_gaps.size() == 3);
  CHECK(r.ladder_rho_sq.size() == 4);
  for (double gap : r.ladder_gaps) CHECK(gap > 0.0);
  CHECK(r.measures.count("final_gap_fraction") == 1);
}

TEST_CASE("fingerprint and hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  ScenarioSpec a = small(ScenarioKind::conservation);
  ScenarioSpec b = a;
  CHECK(fingerprint(a) == fingerprint(b));
  b.init.seed = 2;
  CHECK(fingerprint(a) != fingerprint(b));
}
