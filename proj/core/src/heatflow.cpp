#include "lichflow/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lichflow/io.hpp"

namespace lichflow {

void validate(const FlowConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string("flow.") + name + " must be positive and finite");
  };
  positive(cfg.dt_init, "dt_init");
  positive(cfg.dt_min, "dt_min");
  positive(cfg.dt_max, "dt_max");
  positive(cfg.t_max, "t_max");
  positive(cfg.steady_tol_residual, "steady_tol_residual");
  positive(cfg.steady_tol_dudt, "steady_tol_dudt");
  positive(cfg.blowup_guard, "blowup_guard");
  if (!(cfg.dt_min <= cfg.dt_init && cfg.dt_init <= cfg.dt_max)) {
    throw Error("flow: need dt_min <= dt_init <= dt_max");
  }
  if (cfg.record_every == 0) throw Error("flow.record_every must be at least 1");
  if (cfg.max_steps == 0) throw Error("flow.max_steps must be at least 1");
  if (cfg.omega_shift && (!(*cfg.omega_shift >= 0.0) || !std::isfinite(*cfg.omega_shift))) {
    throw Error("flow.omega_shift must be non-negative and finite");
  }
}

StepResult imex_step(const ProblemData& pd, const FlowState& state, double omega,
                     const HelmholtzSolver& solver, const StepControls& controls) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw Error("imex_step: omega must be non-negative");
  if (!(state.dt > 0.0)) throw Error("imex_step: dt must be positive");
  const Field& u = state.u;
  const Field fu = f_eval(pd, u);

  StepResult result{state, 0, 0.0};
  double dt = state.dt;
  for (;;) {
    const double alpha = 1.0 / dt + omega;
    Field rhs = u * alpha;
    rhs += fu;
    Field u_new = solver.solve(rhs, alpha);
    const double change = linf_norm(u_new - u);
    if (min_value(u_new) > 0.0 && u_new.all_finite() && change / dt <= controls.blowup_guard) {
      result.dudt_l2 = l2_norm(u_new - u) / dt;
      result.state.u = std::move(u_new);
      result.state.t = state.t + dt;
      result.state.dt = dt;
      result.state.step_count = state.step_count + 1;
      return result;
    }
    ++result.rejections;
    dt *= 0.5;
    if (dt < controls.dt_min) {
      std::ostringstream os;
      os << "step-size collapse at t = " << state.t << " (dt fell below " << controls.dt_min << ")";
      throw StepSizeCollapse(os.str(), state);
    }
  }
}

StepResult imex_step(const ProblemData& pd, const FlowState& state, double omega,
                     const StepControls& controls) {
  return imex_step(pd, state, omega, HelmholtzSolver(pd.grid()), controls);
}

bool steady_check(const ProblemData& pd, const Field& u, double dudt_l2, const FlowConfig& cfg) {
  const ResidualNorms r = elliptic_residual(pd, u);
  return r.linf <= cfg.steady_tol_residual && dudt_l2 <= cfg.steady_tol_dudt;
}

namespace {

// Interval [lower, upper] the solution is expected to stay in, and the
// shift that makes the explicit part monotone over it.
struct ShiftRange {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_adaptive = false;
  double omega = 0.0;
};

constexpr double kRangeSlack = 1e-8;

double energy_or_nan(const ProblemData& pd, const Field& u) {
  return pd.form() == EquationForm::Main ? energy(pd, u) : std::numeric_limits<double>::quiet_NaN();
}

TrajectoryRecord make_record(const FlowState& s, double energy_value, const ResidualNorms& r,
                             double dudt_l2) {
  return {s.t, s.dt, min_value(s.u), max_value(s.u), energy_value, r.l2, r.linf, dudt_l2};
}

}  // namespace

FlowResult run_to_steady(const ProblemData& pd, const Field& u0, const FlowConfig& cfg) {
  validate(cfg);
  require_same_grid(pd.A(), u0, "run_to_steady");
  require_positive(u0, "run_to_steady initial data");
  const HelmholtzSolver solver(pd.grid());

  FlowResult out{SteadyReport{.u = u0}, {}};
  SteadyReport& rep = out.report;

  ShiftRange range;
  if (pd.form() == EquationForm::Main) {
    rep.barrier = barrier_bounds(pd, u0);
    range.lower = rep.barrier.lower;
    range.upper_adaptive = !rep.barrier.upper_finite();
    range.upper = range.upper_adaptive ? 2.0 * max_value(u0) : rep.barrier.upper;
  } else {
    range.lower = 0.5 * min_value(u0);
    range.upper = 2.0 * max_value(u0);
    range.upper_adaptive = true;
    rep.barrier = {range.lower, range.upper};
  }
  range.omega = cfg.omega_shift ? *cfg.omega_shift : omega_bound(pd, range.lower, range.upper);

  const StepControls controls{cfg.dt_min, cfg.blowup_guard};
  FlowState state{0.0, cfg.dt_init, u0, 0, energy_or_nan(pd, u0), elliptic_residual(pd, u0)};
  rep.energy_initial = state.last_energy;
  // At t = 0 the time derivative equals the residual of the elliptic problem.
  double dudt_l2 = state.last_residuals.l2;
  out.trajectory.push_back(make_record(state, state.last_energy, state.last_residuals, dudt_l2));

  bool converged = steady_check(pd, state.u, dudt_l2, cfg);
  bool last_recorded = true;
  std::size_t streak = 0;
  while (!converged && state.t < cfg.t_max && state.step_count < cfg.max_steps) {
    FlowState trial = state;
    trial.dt = std::min(state.dt, cfg.t_max - state.t);
    StepResult step = imex_step(pd, trial, range.omega, solver, controls);
    rep.rejected_steps += static_cast<std::size_t>(step.rejections);
    if (step.rejections > 0) streak = 0;

    state = std::move(step.state);
    dudt_l2 = step.dudt_l2;
    rep.dissipation += state.dt * dudt_l2 * dudt_l2;
    state.last_energy = energy_or_nan(pd, state.u);
    state.last_residuals = elliptic_residual(pd, state.u);

    if (!cfg.omega_shift) {
      const double lo = min_value(state.u);
      const double hi = max_value(state.u);
      if (lo < range.lower - kRangeSlack || hi > range.upper + kRangeSlack) {
        range.lower = std::min(range.lower, lo);
        range.upper = std::max(range.upper, range.upper_adaptive ? 2.0 * hi : hi);
        range.omega = omega_bound(pd, range.lower, range.upper);
      }
    }

    last_recorded = state.step_count % cfg.record_every == 0;
    if (last_recorded) {
      out.trajectory.push_back(make_record(state, state.last_energy, state.last_residuals, dudt_l2));
    }
    converged = state.last_residuals.linf <= cfg.steady_tol_residual && dudt_l2 <= cfg.steady_tol_dudt;
    if (++streak >= 10) {
      state.dt = std::min(state.dt * 1.2, cfg.dt_max);
      streak = 0;
    }
  }
  if (!last_recorded) {
    out.trajectory.push_back(make_record(state, state.last_energy, state.last_residuals, dudt_l2));
  }

  rep.u = state.u;
  rep.converged = converged;
  rep.residual = state.last_residuals;
  rep.dudt_l2 = dudt_l2;
  rep.steps = state.step_count;
  rep.t_final = state.t;
  rep.energy_final = state.last_energy;
  rep.omega = range.omega;
  return out;
}

std::vector<Field> evolve_fixed(const ProblemData& pd, const Field& u0, double omega, double dt,
                                std::size_t steps) {
  require_same_grid(pd.A(), u0, "evolve_fixed");
  require_positive(u0, "evolve_fixed initial data");
  if (!(dt > 0.0)) throw Error("evolve_fixed: dt must be positive");
  const HelmholtzSolver solver(pd.grid());
  // A rejection would change the time grid, so any rejection is fatal here.
  const StepControls controls{dt, std::numeric_limits<double>::infinity()};
  std::vector<Field> out;
  out.reserve(steps + 1);
  out.push_back(u0);
  FlowState state{.t = 0.0, .dt = dt, .u = u0};
  for (std::size_t k = 0; k < steps; ++k) {
    state.dt = dt;
    state = imex_step(pd, state, omega, solver, controls).state;
    out.push_back(state.u);
  }
  return out;
}

}  // namespace lichflow
