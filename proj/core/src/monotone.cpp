#include "lichflow/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "lichflow/spectral.hpp"

namespace lichflow {

SpaceTimeField::SpaceTimeField(double horizon, std::vector<Field> slices)
    : horizon_(horizon), slices_(std::move(slices)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw Error("space-time horizon must be positive");
  if (slices_.size() < 2) throw Error("space-time field needs at least one time step");
  for (const Field& s : slices_) require_same_grid(slices_.front(), s, "space-time slices");
}

SpaceTimeField SpaceTimeField::constant(const Grid& grid, double horizon, std::size_t time_steps,
                                        double value) {
  return SpaceTimeField(horizon, std::vector<Field>(time_steps + 1, Field(grid, value)));
}

double sup_distance(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (a.time_steps() != b.time_steps()) throw Error("sup_distance: time grids differ");
  double d = 0.0;
  for (std::size_t j = 0; j <= a.time_steps(); ++j) d = std::max(d, linf_norm(a[j] - b[j]));
  return d;
}

namespace {

SpaceTimeField lift_with(const ProblemData& pd, const SpaceTimeField& source, const Field& u0,
                         double omega, SourceNode node, const HelmholtzSolver& solver) {
  require_same_grid(source[0], u0, "parabolic_lift");
  if (!(omega >= 0.0)) throw Error("parabolic_lift: omega must be non-negative");
  const double dt = source.time_step();
  const double alpha = 1.0 / dt + omega;
  std::vector<Field> out;
  out.reserve(source.time_steps() + 1);
  out.push_back(u0);
  for (std::size_t j = 0; j < source.time_steps(); ++j) {
    const Field& s = node == SourceNode::Previous ? source[j] : source[j + 1];
    Field rhs = out.back() * (1.0 / dt);
    rhs += f_eval(pd, s);
    rhs += s * omega;
    out.push_back(solver.solve(rhs, alpha));
  }
  return SpaceTimeField(source.horizon(), std::move(out));
}

// Counts nodes where lower exceeds upper by more than tol.
void count_violations(const SpaceTimeField& lower, const SpaceTimeField& upper, double tol,
                      OrderingViolations& acc) {
  for (std::size_t j = 0; j <= lower.time_steps(); ++j) {
    const auto lo = lower[j].values();
    const auto hi = upper[j].values();
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double excess = lo[i] - hi[i];
      if (excess > tol) {
        ++acc.count;
        acc.worst = std::max(acc.worst, excess);
      }
    }
  }
}

}  // namespace

SpaceTimeField parabolic_lift(const ProblemData& pd, const SpaceTimeField& source, const Field& u0,
                              double omega, SourceNode node) {
  return lift_with(pd, source, u0, omega, node, HelmholtzSolver(pd.grid()));
}

ChainReport iterate_chain(const ProblemData& pd, const Field& u0, const ChainOptions& options) {
  if (options.time_steps == 0) throw Error("iterate_chain: time_steps must be positive");
  ChainReport rep;
  rep.barrier = subsuper_init(pd, u0);
  rep.omega = options.omega ? *options.omega : omega_bound(pd, rep.barrier.lower, rep.barrier.upper);

  const HelmholtzSolver solver(pd.grid());
  const Grid& g = pd.grid();
  SpaceTimeField sub = SpaceTimeField::constant(g, options.horizon, options.time_steps, rep.barrier.lower);
  SpaceTimeField super = SpaceTimeField::constant(g, options.horizon, options.time_steps, rep.barrier.upper);
  rep.iterates_sub.push_back(sub);
  rep.iterates_super.push_back(super);
  rep.gap_history.push_back(sup_distance(super, sub));
  count_violations(sub, super, options.order_tol, rep.ordering_violations);

  rep.converged = rep.gap_history.back() <= options.gap_tol;
  while (!rep.converged && rep.iterations < options.max_iters) {
    SpaceTimeField next_sub = lift_with(pd, sub, u0, rep.omega, options.source_node, solver);
    SpaceTimeField next_super = lift_with(pd, super, u0, rep.omega, options.source_node, solver);
    ++rep.iterations;

    count_violations(sub, next_sub, options.order_tol, rep.ordering_violations);
    count_violations(next_super, super, options.order_tol, rep.ordering_violations);
    count_violations(next_sub, next_super, options.order_tol, rep.ordering_violations);

    rep.gap_history.push_back(sup_distance(next_super, next_sub));
    rep.converged = rep.gap_history.back() <= options.gap_tol;
    sub = std::move(next_sub);
    super = std::move(next_super);
    if (options.keep_history) {
      rep.iterates_sub.push_back(sub);
      rep.iterates_super.push_back(super);
    } else {
      rep.iterates_sub.back() = sub;
      rep.iterates_super.back() = super;
    }
  }
  return rep;
}

SteadyReport elliptic_fixed_point(const ProblemData& pd, const Field& guess, const FixedPointOptions& options) {
  require_same_grid(pd.A(), guess, "elliptic_fixed_point");
  require_positive(guess, "elliptic_fixed_point guess");
  SteadyReport rep{.u = guess};

  double lower = 0.0;
  double upper = 0.0;
  bool upper_adaptive = false;
  if (pd.form() == EquationForm::Main) {
    rep.barrier = barrier_bounds(pd, guess);
    lower = rep.barrier.lower;
    upper_adaptive = !rep.barrier.upper_finite();
    upper = upper_adaptive ? 2.0 * max_value(guess) : rep.barrier.upper;
  } else {
    lower = 0.5 * min_value(guess);
    upper = 2.0 * max_value(guess);
    upper_adaptive = true;
    rep.barrier = {lower, upper};
  }
  double omega = options.omega ? *options.omega : omega_bound(pd, lower, upper);

  const HelmholtzSolver solver(pd.grid());
  Field u = guess;
  std::deque<double> recent;
  double update = 0.0;
  for (std::size_t k = 0; k < options.max_iters; ++k) {
    Field rhs = f_eval(pd, u);
    rhs += u * omega;
    Field next = solver.solve(rhs, omega);
    update = linf_norm(next - u);
    u = std::move(next);
    rep.steps = k + 1;

    recent.push_back(update);
    if (recent.size() > 50) {
      recent.pop_front();
      if (recent.back() > 10.0 * recent.front()) {
        throw Error("elliptic_fixed_point: divergence (update grew tenfold over 50 iterations)");
      }
    }
    if (update <= options.tol) {
      rep.converged = true;
      break;
    }
    if (!options.omega) {
      const double lo = min_value(u);
      const double hi = max_value(u);
      if (lo < lower || hi > upper) {
        lower = std::min(lower, lo);
        upper = std::max(upper, upper_adaptive ? 2.0 * hi : hi);
        omega = omega_bound(pd, lower, upper);
      }
    }
  }
  rep.u = u;
  rep.dudt_l2 = update;
  rep.residual = elliptic_residual(pd, u);
  rep.omega = omega;
  if (pd.form() == EquationForm::Main) {
    rep.energy_initial = energy(pd, guess);
    rep.energy_final = energy(pd, u);
  }
  return rep;
}

}  // namespace lichflow
