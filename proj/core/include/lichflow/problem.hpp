#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lichflow/field.hpp"

namespace lichflow {

/// Which reaction term the problem carries.
///
/// Main:      -lap u + h u = A u^{-p} - (B + eps) u^q,  B >= 0.
/// Appendix:  -lap u + h u = A u^{-p} + B u^q,          B < 0.
enum class EquationForm { Main, Appendix };

struct ProblemOptions {
  std::optional<Field> h;  ///< linear coefficient, zero when absent
  double eps = 0.0;        ///< regularisation added to B
  EquationForm form = EquationForm::Main;
  /// Main form normally needs min(B) >= 0; set to accept a sign-changing B.
  bool allow_negative_b = false;
  /// Manifold dimension n used only for the q <= (n+2)/(n-2) warning.
  std::optional<int> manifold_dim;
};

/// Exponents and sampled coefficients of a Lichnerowicz-type problem.
/// Immutable after construction; all invariants are checked there.
class ProblemData {
 public:
  ProblemData(double p, double q, Field a, Field b, ProblemOptions options = {});

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  const Field& A() const noexcept { return a_; }
  const Field& B() const noexcept { return b_; }
  const Field& h() const noexcept { return h_; }
  double eps() const noexcept { return eps_; }
  EquationForm form() const noexcept { return form_; }
  /// +1 for the main form, -1 for the appendix form.
  double sign_b() const noexcept { return form_ == EquationForm::Main ? 1.0 : -1.0; }
  bool has_h() const noexcept { return has_h_; }
  bool allows_negative_b() const noexcept { return allow_negative_b_; }
  std::optional<int> manifold_dim() const noexcept { return manifold_dim_; }
  const Grid& grid() const noexcept { return a_.grid(); }

  /// Same problem with a different regularisation.
  ProblemData with_eps(double eps) const;

  /// Non-fatal diagnostics, e.g. the critical-exponent warning.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  double p_;
  double q_;
  Field a_;
  Field b_;
  Field h_;
  double eps_;
  EquationForm form_;
  bool has_h_;
  bool allow_negative_b_;
  std::optional<int> manifold_dim_;
  std::vector<std::string> warnings_;
};

/// Warning text when q exceeds (n+2)/(n-2) for n >= 3; empty otherwise.
std::optional<std::string> critical_exponent_warning(double q, std::optional<int> manifold_dim);

/// Throws PositivityError (with the argmin) unless min(u) > 0.
void require_positive(const Field& u, const char* what);

/// f(x,u) = A u^{-p} - sign_b (B + eps) u^q - h u.
Field f_eval(const ProblemData& pd, const Field& u);
/// df/du = -p A u^{-p-1} - sign_b q (B + eps) u^{q-1} - h.
Field f_deriv(const ProblemData& pd, const Field& u);

/// Constant shift Omega with df/du + Omega > 0 for every grid point and every
/// u in [range_min, range_max]; includes a +1 margin.
double omega_bound(const ProblemData& pd, double range_min, double range_max);

/// 1/2 int |grad u|^2 + 1/(p-1) int A u^{1-p} + 1/(q+1) int (B+eps) u^{q+1}
/// (+ 1/2 int h u^2). Main form only.
double energy(const ProblemData& pd, const Field& u);

struct ResidualNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// laplacian(u) + f(u); zero exactly at a discrete steady state.
Field elliptic_residual_field(const ProblemData& pd, const Field& u);
ResidualNorms elliptic_residual(const ProblemData& pd, const Field& u);

/// Constant bounds 0 < lower <= upper. upper may be +infinity.
struct BarrierPair {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool upper_finite() const noexcept { return upper < std::numeric_limits<double>::infinity(); }
};

/// Constant sub/super-solutions sandwiching u0 built from the pointwise
/// ratios A/(B+eps). Requires min(B+eps) > 0; verified before returning.
BarrierPair subsuper_init(const ProblemData& pd, const Field& u0);

/// Min/max-principle bounds for the flow started at u0. upper is infinite
/// when min(B)+eps <= 0.
BarrierPair barrier_bounds(const ProblemData& pd, const Field& u0);

/// Sub/super-solution witnesses for the appendix form built from the solution
/// of (-lap + h) u = v.
struct AppendixWitness {
  Field base;   ///< solution of (-lap + h) u = v
  Field sub;    ///< sub_scale * base
  Field super;  ///< super_scale * base
  double sub_scale = 0.0;
  double super_scale = 0.0;
  double operator_min_eigenvalue = 0.0;
};

/// Residual of the appendix-form operator, -lap w + h w - A w^{-p} - B w^q.
Field appendix_operator(const ProblemData& pd, const Field& w);

AppendixWitness appendix_subsuper(const ProblemData& pd, const Field& v);

/// Solves (-lap + h) u = v: a spectral solve for constant h, preconditioned
/// conjugate gradients otherwise. Throws if the operator is not positive.
Field solve_shifted_operator(const Field& h, const Field& v, double tol = 1e-12);

/// Estimate of the smallest eigenvalue of -lap + h by inverse power iteration.
double shifted_operator_min_eigenvalue(const Field& h);

}  // namespace lichflow
