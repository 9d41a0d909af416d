#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lichflow/field.hpp"
#include "lichflow/heatflow.hpp"
#include "lichflow/problem.hpp"

namespace lichflow {

/// A Field per node of a uniform time grid 0 = t_0 < ... < t_K = T.
class SpaceTimeField {
 public:
  SpaceTimeField(double horizon, std::vector<Field> slices);
  /// K + 1 copies of a constant.
  static SpaceTimeField constant(const Grid& grid, double horizon, std::size_t time_steps, double value);

  const Grid& grid() const noexcept { return slices_.front().grid(); }
  double horizon() const noexcept { return horizon_; }
  std::size_t time_steps() const noexcept { return slices_.size() - 1; }
  double time_step() const noexcept { return horizon_ / static_cast<double>(time_steps()); }
  double time(std::size_t node) const noexcept { return time_step() * static_cast<double>(node); }

  const Field& operator[](std::size_t node) const { return slices_.at(node); }
  const std::vector<Field>& slices() const noexcept { return slices_; }
  const Field& final_slice() const noexcept { return slices_.back(); }

 private:
  double horizon_;
  std::vector<Field> slices_;
};

/// sup over space-time nodes of |a - b|.
double sup_distance(const SpaceTimeField& a, const SpaceTimeField& b);

/// Which time node supplies the source in the linear lift.
///
/// Previous: (1/dt + omega - lap) w_{j+1} = w_j/dt + f(s_j) + omega s_j.
///   The discrete fixed point is exactly the IMEX heat-flow step.
/// Target:   (1/dt + omega - lap) w_{j+1} = w_j/dt + f(s_{j+1}) + omega s_{j+1}.
///   The discrete fixed point is backward Euler in f.
/// Both keep the discrete maximum principle.
enum class SourceNode { Previous, Target };

/// One application of the linear parabolic lift with w_0 = u0.
SpaceTimeField parabolic_lift(const ProblemData& pd, const SpaceTimeField& source, const Field& u0,
                              double omega, SourceNode node = SourceNode::Previous);

struct ChainOptions {
  double horizon = 2.0;
  std::size_t time_steps = 200;
  std::size_t max_iters = 500;
  double gap_tol = 1e-8;
  double order_tol = 1e-8;
  /// Keep every iterate instead of only the latest pair.
  bool keep_history = false;
  SourceNode source_node = SourceNode::Previous;
  std::optional<double> omega;
};

struct OrderingViolations {
  std::size_t count = 0;
  double worst = 0.0;
};

struct ChainReport {
  std::vector<SpaceTimeField> iterates_sub;
  std::vector<SpaceTimeField> iterates_super;
  OrderingViolations ordering_violations;
  /// sup |phi_k - psi_k| for k = 0, 1, ...
  std::vector<double> gap_history;
  bool converged = false;
  std::size_t iterations = 0;
  double omega = 0.0;
  BarrierPair barrier{};
};

/// Builds the ordered sub/super chains from constant initial trajectories.
ChainReport iterate_chain(const ProblemData& pd, const Field& u0, const ChainOptions& options = {});

struct FixedPointOptions {
  std::size_t max_iters = 1'000'000;
  double tol = 1e-11;  ///< on |u_{k+1} - u_k|_inf
  std::optional<double> omega;
};

/// Steady analogue of the lift: u_{k+1} = (omega - lap)^{-1} (f(u_k) + omega u_k).
/// Throws when the update grows tenfold over 50 iterations.
SteadyReport elliptic_fixed_point(const ProblemData& pd, const Field& guess,
                                  const FixedPointOptions& options = {});

}  // namespace lichflow
