#include "lichflow/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lichflow/error.hpp"
#include "lichflow/io.hpp"
#include "lichflow/spectral.hpp"

namespace lichflow {

namespace {

Field zero_like(const Field& f) { return Field(f.grid(), 0.0); }

bool is_constant_field(const Field& f) {
  const auto v = f.values();
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

double dot(const Field& a, const Field& b) {
  const auto x = a.values();
  const auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Applies -lap + h.
Field apply_shifted(const Field& h, const Field& u) {
  Field out = laplacian(u);
  out *= -1.0;
  out += hadamard(h, u);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ProblemData

std::optional<std::string> critical_exponent_warning(double q, std::optional<int> manifold_dim) {
  if (!manifold_dim || *manifold_dim < 3) return std::nullopt;
  const int n = *manifold_dim;
  const double bound = static_cast<double>(n + 2) / static_cast<double>(n - 2);
  if (q <= bound) return std::nullopt;
  std::ostringstream os;
  os << "q = " << q << " exceeds the critical exponent (n+2)/(n-2) = " << bound << " for n = " << n
     << "; existence of a limit is not guaranteed";
  return os.str();
}

ProblemData::ProblemData(double p, double q, Field a, Field b, ProblemOptions options)
    : p_(p),
      q_(q),
      a_(std::move(a)),
      b_(std::move(b)),
      h_(options.h ? *options.h : zero_like(a_)),
      eps_(options.eps),
      form_(options.form),
      has_h_(options.h.has_value()),
      allow_negative_b_(options.allow_negative_b),
      manifold_dim_(options.manifold_dim) {
  if (!std::isfinite(p_) || p_ <= 1.0) throw Error("p must exceed 1 (got " + io::format_double(p_) + ")");
  if (!std::isfinite(q_) || q_ <= 0.0) throw Error("q must be positive (got " + io::format_double(q_) + ")");
  if (!std::isfinite(eps_) || eps_ < 0.0) throw Error("eps must be non-negative");
  require_same_grid(a_, b_, "problem coefficients A and B");
  require_same_grid(a_, h_, "problem coefficients A and h");
  require_finite(a_, "coefficient A");
  require_finite(b_, "coefficient B");
  require_finite(h_, "coefficient h");
  if (!(min_value(a_) > 0.0)) throw Error("A must be strictly positive (min A = " + io::format_double(min_value(a_)) + ")");
  if (form_ == EquationForm::Main && !allow_negative_b_ && min_value(b_) < 0.0) {
    throw Error("B must be non-negative for the main equation (min B = " +
                io::format_double(min_value(b_)) + ")");
  }
  if (form_ == EquationForm::Appendix && !allow_negative_b_ && max_value(b_) >= 0.0) {
    throw Error("the appendix form needs B < 0 (max B = " + io::format_double(max_value(b_)) + ")");
  }
  if (manifold_dim_ && *manifold_dim_ < 1) throw Error("manifold dimension hint must be positive");
  if (auto w = critical_exponent_warning(q_, manifold_dim_)) warnings_.push_back(*w);
}

ProblemData ProblemData::with_eps(double eps) const {
  ProblemOptions opts;
  if (has_h_) opts.h = h_;
  opts.eps = eps;
  opts.form = form_;
  opts.allow_negative_b = allow_negative_b_;
  opts.manifold_dim = manifold_dim_;
  return ProblemData(p_, q_, a_, b_, std::move(opts));
}

void require_positive(const Field& u, const char* what) {
  const auto v = u.values();
  const auto it = std::min_element(v.begin(), v.end());
  if (!(*it > 0.0)) {
    const auto idx = static_cast<std::size_t>(it - v.begin());
    std::ostringstream os;
    os << what << ": positivity violated, u = " << *it << " at point " << idx << " (x = "
       << u.grid().coordinate(idx, 0);
    if (u.grid().dim() == 2) os << ", y = " << u.grid().coordinate(idx, 1);
    os << ')';
    throw PositivityError(os.str(), idx, *it);
  }
}

// ---------------------------------------------------------------------------
// Nonlinearity

Field f_eval(const ProblemData& pd, const Field& u) {
  require_same_grid(pd.A(), u, "f_eval");
  require_positive(u, "f_eval");
  const auto a = pd.A().values();
  const auto b = pd.B().values();
  const auto h = pd.h().values();
  const auto x = u.values();
  const double s = pd.sign_b();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = a[i] * std::pow(x[i], -pd.p()) - s * (b[i] + pd.eps()) * std::pow(x[i], pd.q()) - h[i] * x[i];
  }
  return Field(u.grid(), std::move(out));
}

Field f_deriv(const ProblemData& pd, const Field& u) {
  require_same_grid(pd.A(), u, "f_deriv");
  require_positive(u, "f_deriv");
  const auto a = pd.A().values();
  const auto b = pd.B().values();
  const auto h = pd.h().values();
  const auto x = u.values();
  const double s = pd.sign_b();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = -pd.p() * a[i] * std::pow(x[i], -pd.p() - 1.0) -
             s * pd.q() * (b[i] + pd.eps()) * std::pow(x[i], pd.q() - 1.0) - h[i];
  }
  return Field(u.grid(), std::move(out));
}

double omega_bound(const ProblemData& pd, double range_min, double range_max) {
  if (!(range_min > 0.0)) throw Error("omega_bound: range minimum must be positive");
  if (!(range_max >= range_min) || !std::isfinite(range_max)) {
    throw Error("omega_bound: range maximum must be finite and >= the minimum");
  }
  const double max_a = max_value(pd.A());
  double max_b = 0.0;
  for (double b : pd.B().values()) max_b = std::max(max_b, std::abs(b + pd.eps()));
  const double max_h = linf_norm(pd.h());
  // -f_u = p A u^{-p-1} + sign q (B+eps) u^{q-1} + h; the A-term peaks at the
  // lower end, the B-term at whichever end maximises u^{q-1}.
  const double a_term = pd.p() * max_a * std::pow(range_min, -pd.p() - 1.0);
  const double power = std::max(std::pow(range_min, pd.q() - 1.0), std::pow(range_max, pd.q() - 1.0));
  const double b_term = pd.q() * max_b * power;
  return a_term + b_term + max_h + 1.0;
}

double energy(const ProblemData& pd, const Field& u) {
  if (pd.form() != EquationForm::Main) throw Error("energy defined only for main equation");
  require_same_grid(pd.A(), u, "energy");
  require_positive(u, "energy");
  const auto a = pd.A().values();
  const auto b = pd.B().values();
  const auto h = pd.h().values();
  const auto x = u.values();
  const Field grad = gradient_sq(u);
  const auto g = grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = 0.5 * g[i] + a[i] * std::pow(x[i], 1.0 - pd.p()) / (pd.p() - 1.0) +
               (b[i] + pd.eps()) * std::pow(x[i], pd.q() + 1.0) / (pd.q() + 1.0);
    if (pd.has_h()) e += 0.5 * h[i] * x[i] * x[i];
    sum += e;
  }
  return u.grid().cell_volume() * sum;
}

Field elliptic_residual_field(const ProblemData& pd, const Field& u) {
  Field r = f_eval(pd, u);
  r += laplacian(u);
  return r;
}

ResidualNorms elliptic_residual(const ProblemData& pd, const Field& u) {
  const Field r = elliptic_residual_field(pd, u);
  return {l2_norm(r), linf_norm(r)};
}

// ---------------------------------------------------------------------------
// Barriers

namespace {

// f evaluated at the constant c at every point.
Field f_at_constant(const ProblemData& pd, double c) { return f_eval(pd, Field(pd.grid(), c)); }

// Pointwise positive root of A c^{-p} - (B+eps) c^q - h c, which is strictly
// decreasing in c when B+eps >= 0 and h >= 0. Infinite when no root exists.
double pointwise_root(double a, double b, double h, double p, double q) {
  if (b <= 0.0 && h <= 0.0) return std::numeric_limits<double>::infinity();
  auto g = [&](double c) { return a * std::pow(c, -p) - b * std::pow(c, q) - h * c; };
  double lo = 1.0;
  double hi = 1.0;
  while (g(lo) <= 0.0) lo *= 0.5;
  while (g(hi) >= 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

bool has_nonzero_h(const ProblemData& pd) { return pd.has_h() && linf_norm(pd.h()) > 0.0; }

}  // namespace

BarrierPair subsuper_init(const ProblemData& pd, const Field& u0) {
  if (pd.form() != EquationForm::Main) throw Error("subsuper_init: constant barriers need the main form");
  require_same_grid(pd.A(), u0, "subsuper_init");
  require_positive(u0, "subsuper_init");
  const auto a = pd.A().values();
  const auto b = pd.B().values();
  double min_b = std::numeric_limits<double>::infinity();
  for (double v : b) min_b = std::min(min_b, v + pd.eps());
  if (!(min_b > 0.0)) throw Error("subsuper_init: min(B + eps) <= 0; use eps-path");

  const double exponent = 1.0 / (pd.p() + pd.q());
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = std::pow(a[i] / (b[i] + pd.eps()), exponent);
    min_ratio = std::min(min_ratio, r);
    max_ratio = std::max(max_ratio, r);
  }
  BarrierPair pair{std::min(min_value(u0), min_ratio), std::max(max_value(u0), max_ratio)};

  auto scale_of = [&](double c, std::size_t i) {
    return std::max(1.0, a[i] * std::pow(c, -pd.p()) + (b[i] + pd.eps()) * std::pow(c, pd.q()));
  };
  auto is_sub = [&](double c) {
    const Field f = f_at_constant(pd, c);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] < -1e-12 * scale_of(c, i)) return false;
    return true;
  };
  auto is_super = [&](double c) {
    const Field f = f_at_constant(pd, c);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] > 1e-12 * scale_of(c, i)) return false;
    return true;
  };
  for (int k = 0; k < 200 && !is_sub(pair.lower); ++k) pair.lower *= 0.5;
  for (int k = 0; k < 200 && !is_super(pair.upper); ++k) pair.upper *= 2.0;
  if (!is_sub(pair.lower) || !is_super(pair.upper)) {
    throw Error("subsuper_init: could not construct constant sub/super solutions");
  }
  return pair;
}

BarrierPair barrier_bounds(const ProblemData& pd, const Field& u0) {
  if (pd.form() != EquationForm::Main) throw Error("barrier_bounds defined only for main equation");
  require_same_grid(pd.A(), u0, "barrier_bounds");
  require_positive(u0, "barrier_bounds");
  const double exponent = 1.0 / (pd.p() + pd.q());
  const double u_min = min_value(u0);
  const double u_max = max_value(u0);
  BarrierPair pair;

  if (has_nonzero_h(pd)) {
    if (min_value(pd.h()) < 0.0) throw Error("barrier_bounds: needs h >= 0");
    if (min_value(pd.B()) + pd.eps() < 0.0) throw Error("barrier_bounds: needs B + eps >= 0 when h != 0");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
      const double r = pointwise_root(pd.A()[i], pd.B()[i] + pd.eps(), pd.h()[i], pd.p(), pd.q());
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    pair.lower = std::min(u_min, lo);
    pair.upper = std::max(u_max, hi);
    return pair;
  }

  const double max_b = max_value(pd.B()) + pd.eps();
  const double min_b = min_value(pd.B()) + pd.eps();
  pair.lower = max_b > 0.0 ? std::min(u_min, std::pow(min_value(pd.A()) / max_b, exponent)) : u_min;
  pair.upper = min_b > 0.0 ? std::max(u_max, std::pow(max_value(pd.A()) / min_b, exponent))
                           : std::numeric_limits<double>::infinity();
  return pair;
}

// ---------------------------------------------------------------------------
// Appendix construction

Field appendix_operator(const ProblemData& pd, const Field& w) {
  Field r = elliptic_residual_field(pd, w);
  r *= -1.0;
  return r;
}

Field solve_shifted_operator(const Field& h, const Field& v, double tol) {
  require_same_grid(h, v, "solve_shifted_operator");
  if (is_constant_field(h) && h[0] > 0.0) return helmholtz_solve(v, h[0]);

  const HelmholtzSolver precond(h.grid());
  double shift = integrate(h) / h.grid().volume();
  if (!(shift > 0.0)) shift = 1.0;

  Field x(v.grid(), 0.0);
  Field r = v;
  Field z = precond.solve(r, shift);
  Field d = z;
  double rz = dot(r, z);
  const double target = tol * std::max(linf_norm(v), 1e-300);
  const std::size_t max_iter = 20 * v.size() + 100;
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (linf_norm(r) <= target) return x;
    const Field ad = apply_shifted(h, d);
    const double curvature = dot(d, ad);
    if (!(curvature > 0.0)) throw Error("operator -lap + h is not positive (non-positive curvature in CG)");
    const double step = rz / curvature;
    x += step * d;
    r -= step * ad;
    z = precond.solve(r, shift);
    const double rz_next = dot(r, z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  if (linf_norm(r) <= target) return x;
  throw Error("solve_shifted_operator: conjugate gradients did not converge");
}

double shifted_operator_min_eigenvalue(const Field& h) {
  // Inverse iteration on the SPD operator -lap + h + sigma.
  const double sigma = std::max(0.0, -min_value(h)) + 1.0;
  Field shifted_h = h;
  for (double& v : shifted_h.values()) v += sigma;

  Field x(h.grid(), 1.0);
  x *= 1.0 / std::sqrt(dot(x, x));
  double mu = dot(x, apply_shifted(shifted_h, x));
  for (int it = 0; it < 1000; ++it) {
    Field y = solve_shifted_operator(shifted_h, x, 1e-13);
    y *= 1.0 / std::sqrt(dot(y, y));
    const double mu_next = dot(y, apply_shifted(shifted_h, y));
    x = std::move(y);
    const bool done = std::abs(mu_next - mu) <= 1e-13 * std::abs(mu_next);
    mu = mu_next;
    if (done) break;
  }
  return mu - sigma;
}

AppendixWitness appendix_subsuper(const ProblemData& pd, const Field& v) {
  if (pd.form() != EquationForm::Appendix) throw Error("appendix_subsuper: problem is not in appendix form");
  require_same_grid(pd.A(), v, "appendix_subsuper");
  require_positive(v, "appendix_subsuper source v");

  AppendixWitness w{v, v, v};
  const Field& h = pd.h();
  if (min_value(h) > 0.0) {
    w.operator_min_eigenvalue = min_value(h);
  } else {
    w.operator_min_eigenvalue = shifted_operator_min_eigenvalue(h);
    if (!(w.operator_min_eigenvalue > 0.0)) {
      throw Error("operator -lap + h is not positive (smallest eigenvalue estimate " +
                  io::format_double(w.operator_min_eigenvalue) + ")");
    }
  }
  w.base = solve_shifted_operator(h, v);
  require_positive(w.base, "appendix_subsuper base solution");

  auto is_sub = [&](double s) { return max_value(appendix_operator(pd, s * w.base)) <= 0.0; };
  auto is_super = [&](double t) { return min_value(appendix_operator(pd, t * w.base)) >= 0.0; };

  // Bracket by halving/doubling, then bisect toward the tightest witness.
  double ok = 1.0;
  double bad = 1.0;
  int steps = 0;
  while (!is_sub(ok)) {
    bad = ok;
    ok *= 0.5;
    if (++steps >= 200) throw Error("appendix_subsuper: bisection failure finding a subsolution");
  }
  if (ok < bad) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (ok + bad);
      (is_sub(mid) ? ok : bad) = mid;
    }
  }
  w.sub_scale = ok;

  ok = 1.0;
  bad = 1.0;
  steps = 0;
  while (!is_super(ok)) {
    bad = ok;
    ok *= 2.0;
    if (++steps >= 200) throw Error("appendix_subsuper: bisection failure finding a supersolution");
  }
  if (ok > bad) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (ok + bad);
      (is_super(mid) ? ok : bad) = mid;
    }
  }
  w.super_scale = ok;

  w.sub = w.sub_scale * w.base;
  w.super = w.super_scale * w.base;
  return w;
}

}  // namespace lichflow
