#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lichflow/coefficient.hpp"
#include "lichflow/heatflow.hpp"
#include "lichflow/problem.hpp"

namespace lichflow {

enum class Integrability { Finite, LikelyDivergent, Inconclusive };

const char* to_string(Integrability verdict) noexcept;

struct IntegrabilityResult {
  Integrability verdict = Integrability::Inconclusive;
  /// d log(integral) / d log(N) fitted over the finest three levels.
  double slope = 0.0;
  std::vector<std::size_t> points;  ///< points per axis at each level
  std::vector<double> integrals;
};

/// Refinement study of int_M B^{-1/q} dx with the rectangle rule, skipping
/// points where B == 0 exactly. A heuristic: "finite" when the fitted slope is
/// at most 0.05, "likely divergent" at 0.5 or more.
IntegrabilityResult integrability_check(const CoefficientSpec& b, const Grid& base, double q,
                                        int refinement_levels = 10);

struct EpsSchedule {
  std::vector<double> eps_values;  ///< strictly decreasing, positive
  FlowConfig flow;

  /// eps0 * ratio^j for j = 0..count-1.
  static EpsSchedule geometric(double eps0, double ratio, std::size_t count, FlowConfig flow = {});
  void validate() const;
};

/// Steady state of the problem with B replaced by B + eps.
FlowResult solve_at_eps(const ProblemData& pd, double eps, const Field& warm_start, const FlowConfig& cfg);

/// Quantities that must stay bounded independently of eps.
struct BoundTriple {
  double l2_sq = 0.0;        ///< int u^2
  double grad_sq = 0.0;      ///< int |grad u|^2
  double dissipation = 0.0;  ///< int int |u_t|^2 accumulated from u0 along the path
};

struct PathEntry {
  double eps = 0.0;
  Field u;
  BoundTriple bounds{};
  ResidualNorms residual{};   ///< residual of the eps-problem
  double barrier_floor = 0.0; ///< (min A / (max B + eps))^{1/(p+q)}
  double min_u_along_flow = 0.0;
  double barrier_lower = 0.0; ///< barrier_bounds(pd_eps, start).lower
  bool converged = false;
  std::size_t steps = 0;
  std::size_t energy_increases = 0;
};

struct PathReport {
  std::vector<PathEntry> entries;
  /// L2 distance between consecutive steady fields.
  std::vector<double> gaps;
  std::optional<IntegrabilityResult> integrability;
  bool uniform_bounds_ok = true;
  std::vector<std::string> warnings;

  /// Residual of the eps = 0 equation evaluated at the last schedule field.
  ResidualNorms last_eps_residual;
  /// Terminal eps = 0 solve warm-started from the last schedule field.
  std::optional<Field> limit;
  ResidualNorms limit_residual;
  bool limit_converged = false;
  double limit_gap = 0.0;  ///< L2 distance between the last schedule field and the limit
  bool complete = false;
};

struct PathOptions {
  /// Expression for B used by the integrability study; skipped when absent.
  std::optional<CoefficientSpec> b_spec;
  int integrability_levels = 10;
  bool terminal_solve = true;
};

/// Thrown when a per-eps solve fails; carries everything computed so far.
class PathAborted : public Error {
 public:
  PathAborted(const std::string& what, PathReport partial) : Error(what), partial_(std::move(partial)) {}
  const PathReport& partial() const noexcept { return partial_; }

 private:
  PathReport partial_;
};

PathReport run_path(const ProblemData& pd, const EpsSchedule& schedule, const Field& u0,
                    const PathOptions& options = {});

}  // namespace lichflow
