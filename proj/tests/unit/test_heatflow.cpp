#include <doctest.h>

#include "common.hpp"
#include "lichflow/error.hpp"
#include "lichflow/heatflow.hpp"

using namespace lichflow;
using namespace lichflow::test;

TEST_CASE("flow config validation") {
  CHECK_NOTHROW(validate(FlowConfig{}));
  FlowConfig c;
  c.dt_init = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.dt_min = 2.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.dt_max = c.dt_init / 2;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.omega_shift = -1.0;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("imex step keeps a steady constant") {
  const Grid g = circle(32);
  const ProblemData pd(2, 2, Field(g, 16.0), Field(g, 1.0));
  FlowState s{0.0, 0.5, Field(g, 2.0)};
  for (double dt : {1e-4, 0.1, 10.0}) {
    s.dt = dt;
    const StepResult r = imex_step(pd, s, 40.0);
    CHECK(linf_norm(r.state.u - Field(g, 2.0)) < 1e-13);
    CHECK(r.rejections == 0);
    CHECK(r.state.t == doctest::Approx(dt));
  }
}

TEST_CASE("imex step moves toward the balanced state") {
  const Grid g = circle(32);
  const ProblemData pd(2, 3, Field(g, 1.0), Field(g, 1.0));
  const FlowState s{0.0, 0.01, Field(g, 0.5)};
  const StepResult r = imex_step(pd, s, omega_bound(pd, 0.5, 1.0));
  CHECK(min_value(r.state.u) > 0.5);
  CHECK(max_value(r.state.u) < 1.0);
  CHECK(r.state.step_count == 1);
}

TEST_CASE("imex step rejects an overshooting step and halves dt") {
  const Grid g = circle(16);
  const ProblemData pd(2, 3, Field(g, 1.0), Field(g, 1.0));
  // Without a shift the explicit reaction at u = 5 overshoots below zero for dt = 1.
  const FlowState s{0.0, 1.0, Field(g, 5.0)};
  StepControls controls;
  const StepResult r = imex_step(pd, s, 0.0, controls);
  CHECK(r.rejections > 0);
  CHECK(r.state.dt < 1.0);
  CHECK(min_value(r.state.u) > 0.0);

  controls.dt_min = 0.5;
  CHECK_THROWS_AS(imex_step(pd, s, 0.0, controls), StepSizeCollapse);
}

TEST_CASE("imex step preserves order for a valid shift") {
  std::mt19937_64 rng(23);
  const Grid g = circle(40);
  const ProblemData pd(2, 2, random_field(g, rng, 0.5, 2.0), random_field(g, rng, 0.5, 2.0));
  const Field u = random_field(g, rng, 0.3, 1.0);
  const Field v = u + random_field(g, rng, 0.0, 0.5);
  const double omega = omega_bound(pd, 0.3, 1.5);
  for (double dt : {1e-3, 0.1, 2.0}) {
    const Field un = imex_step(pd, FlowState{0.0, dt, u}, omega).state.u;
    const Field vn = imex_step(pd, FlowState{0.0, dt, v}, omega).state.u;
    CHECK(max_value(un - vn) <= 1e-14);
  }
}

TEST_CASE("steady check is inclusive") {
  const Grid g = circle(16);
  const ProblemData pd(2, 2, Field(g, 16.0), Field(g, 1.0));
  FlowConfig cfg;
  CHECK(steady_check(pd, Field(g, 2.0), cfg.steady_tol_dudt, cfg));
  CHECK_FALSE(steady_check(pd, Field(g, 2.0), 2 * cfg.steady_tol_dudt, cfg));
  CHECK_FALSE(steady_check(pd, Field(g, 1.9), 0.0, cfg));
}

TEST_CASE("run_to_steady closed forms") {
  const Grid g = circle(128);
  SUBCASE("balanced constant") {
    const FlowResult r = run_to_steady(ProblemData(2, 2, Field(g, 16.0), Field(g, 1.0)), Field(g, 1.0), {});
    CHECK(r.report.converged);
    CHECK(linf_norm(r.report.u - Field(g, 2.0)) <= 1e-8);
    CHECK(r.report.energy_final <= r.report.energy_initial);
    CHECK(r.report.dissipation > 0.0);
  }
  SUBCASE("from below stays below one") {
    const FlowResult r = run_to_steady(ProblemData(2, 3, Field(g, 1.0), Field(g, 1.0)),
                                       expr("0.5 + 0.3*cos(x)", g), {});
    CHECK(r.report.converged);
    for (const auto& rec : r.trajectory) CHECK(rec.max_u <= 1.0 + 1e-10);
    CHECK(linf_norm(r.report.u - Field(g, 1.0)) <= 1e-8);
  }
  SUBCASE("regularized problem with B = 0") {
    ProblemOptions opts;
    opts.eps = 0.0625;
    const FlowResult r = run_to_steady(ProblemData(2, 2, Field(g, 1.0), Field(g, 0.0), opts), Field(g, 1.0), {});
    CHECK(r.report.converged);
    CHECK(linf_norm(r.report.u - Field(g, 2.0)) <= 1e-8);
  }
}

TEST_CASE("run_to_steady trajectory bookkeeping") {
  const Grid g = circle(32);
  const ProblemData pd(2, 3, expr("1 + 0.5*cos(x)", g), Field(g, 1.0));
  FlowConfig cfg;
  cfg.record_every = 5;
  const FlowResult r = run_to_steady(pd, Field(g, 3.0), cfg);
  REQUIRE(r.trajectory.size() >= 2);
  CHECK(r.trajectory.front().t == 0.0);
  CHECK(r.trajectory.back().t == doctest::Approx(r.report.t_final));
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    CHECK(r.trajectory[k].t > r.trajectory[k - 1].t);
    CHECK(r.trajectory[k].dt <= cfg.dt_max);
    CHECK(r.trajectory[k].energy <= r.trajectory[k - 1].energy + 1e-8 * (1 + std::abs(r.trajectory[k - 1].energy)));
  }
  const FlowResult again = run_to_steady(pd, Field(g, 3.0), cfg);
  CHECK(again.trajectory == r.trajectory);
}

TEST_CASE("run_to_steady stops at t_max") {
  const Grid g = circle(32);
  FlowConfig cfg;
  cfg.t_max = 0.01;
  const FlowResult r = run_to_steady(ProblemData(2, 3, Field(g, 1.0), Field(g, 1.0)), Field(g, 5.0), cfg);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.t_final <= 0.01 + 1e-15);
}

TEST_CASE("run_to_steady recovers the manufactured solution") {
  const std::string a = "(2 + 0.5*cos(x))*(2 + 0.5*cos(x))*(0.5*cos(x) + (2 + 0.5*cos(x))*(2 + 0.5*cos(x)))";
  // Discrete errors from an independent Newton solve of the discrete steady problem.
  const std::pair<int, double> oracle[] = {{32, 2.456276e-4}, {64, 6.142061e-5}, {128, 1.535601e-5}};
  for (const auto& [n, expected] : oracle) {
    const Grid g = circle(n);
    const FlowResult r = run_to_steady(ProblemData(2, 2, expr(a, g), Field(g, 1.0)), Field(g, 2.0), {});
    CHECK(r.report.converged);
    CHECK(linf_norm(r.report.u - expr("2 + 0.5*cos(x)", g)) == doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("run_to_steady on the torus with a linear term") {
  const Grid g = torus(24, 16);
  ProblemOptions opts;
  opts.h = expr("0.5 + 0.25*sin(y)", g);
  const ProblemData pd(2, 2, expr("2 + cos(x)*sin(y)", g), expr("1 + 0.5*sin(x)", g), opts);
  const FlowResult r = run_to_steady(pd, Field(g, 1.0), {});
  CHECK(r.report.converged);
  CHECK(elliptic_residual(pd, r.report.u).linf <= 1e-9);
  CHECK(min_value(r.report.u) >= r.report.barrier.lower - 1e-8);
}

TEST_CASE("evolve_fixed") {
  const Grid g = circle(16);
  const ProblemData pd(3, 1, Field(g, 4.0), Field(g, 1.0));
  const auto traj = evolve_fixed(pd, Field(g, 1.0), 14.0, 0.01, 200);
  REQUIRE(traj.size() == 201);
  CHECK(traj.front() == Field(g, 1.0));
  // Spatially constant IMEX recursion evaluated independently.
  CHECK(traj.back()[0] == doctest::Approx(1.414008037078).epsilon(1e-11));
  CHECK(max_value(traj.back()) - min_value(traj.back()) < 1e-14);
}
