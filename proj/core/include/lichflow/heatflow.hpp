#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lichflow/error.hpp"
#include "lichflow/field.hpp"
#include "lichflow/problem.hpp"
#include "lichflow/spectral.hpp"

namespace lichflow {

struct FlowConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  double t_max = 1e4;
  double steady_tol_residual = 1e-9;  ///< L-inf of the elliptic residual
  double steady_tol_dudt = 1e-10;     ///< L2 of the discrete time derivative
  std::size_t record_every = 1;
  std::optional<double> omega_shift;  ///< overrides the barrier-derived shift
  double blowup_guard = 1e12;         ///< reject when |du|_inf / dt exceeds this
  std::size_t max_steps = 50'000'000;
};

/// Throws lichflow::Error naming the offending field.
void validate(const FlowConfig& cfg);

struct FlowState {
  double t = 0.0;
  double dt = 0.0;
  Field u;
  std::size_t step_count = 0;
  double last_energy = 0.0;
  ResidualNorms last_residuals{};
};

struct TrajectoryRecord {
  double t = 0.0;
  double dt = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double energy = 0.0;
  double residual_l2 = 0.0;
  double residual_linf = 0.0;
  double dudt_l2 = 0.0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

struct SteadyReport {
  Field u;
  bool converged = false;
  ResidualNorms residual{};
  double dudt_l2 = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double t_final = 0.0;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  /// sum over accepted steps of dt * int ((u_new - u) / dt)^2
  double dissipation = 0.0;
  double omega = 0.0;
  BarrierPair barrier{};
};

struct FlowResult {
  SteadyReport report;
  std::vector<TrajectoryRecord> trajectory;
};

/// Step size fell below dt_min while rejecting steps.
class StepSizeCollapse : public Error {
 public:
  StepSizeCollapse(const std::string& what, FlowState state) : Error(what), state_(std::move(state)) {}
  const FlowState& state() const noexcept { return state_; }

 private:
  FlowState state_;
};

struct StepControls {
  double dt_min = 1e-12;
  double blowup_guard = 1e12;
};

struct StepResult {
  FlowState state;  ///< accepted state; state.dt is the step actually taken
  int rejections = 0;
  double dudt_l2 = 0.0;
};

/// One Omega-shifted implicit-explicit step:
///   (1/dt + omega - lap) u_new = u/dt + f(u) + omega u.
/// A step producing a non-positive value or exceeding the blow-up guard is
/// rejected and retried with dt halved; below dt_min StepSizeCollapse is thrown.
StepResult imex_step(const ProblemData& pd, const FlowState& state, double omega,
                     const HelmholtzSolver& solver, const StepControls& controls = {});
StepResult imex_step(const ProblemData& pd, const FlowState& state, double omega,
                     const StepControls& controls = {});

/// Inclusive comparison of both steady tolerances.
bool steady_check(const ProblemData& pd, const Field& u, double dudt_l2, const FlowConfig& cfg);

/// Integrates to a steady state or to t_max (converged = false).
FlowResult run_to_steady(const ProblemData& pd, const Field& u0, const FlowConfig& cfg);

/// Fixed-step IMEX trajectory on the uniform time grid k * dt, k = 0..steps;
/// no step-size adaptation. Used to compare with schemes sharing that grid.
std::vector<Field> evolve_fixed(const ProblemData& pd, const Field& u0, double omega, double dt,
                                std::size_t steps);

}  // namespace lichflow
