#include "lichflow/epspath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lichflow/io.hpp"

namespace lichflow {

const char* to_string(Integrability verdict) noexcept {
  switch (verdict) {
    case Integrability::Finite: return "finite";
    case Integrability::LikelyDivergent: return "likely divergent";
    case Integrability::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr std::size_t kMaxStudyPoints = std::size_t{1} << 22;

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

IntegrabilityResult integrability_check(const CoefficientSpec& b, const Grid& base, double q,
                                        int refinement_levels) {
  if (!(q > 0.0)) throw Error("integrability_check: q must be positive");
  if (refinement_levels < 3) throw Error("integrability_check: need at least 3 refinement levels");
  IntegrabilityResult res;
  for (int level = 0; level < refinement_levels; ++level) {
    const int factor = 1 << level;
    std::vector<int> pts{base.points(0) * factor};
    std::vector<double> lens{base.length(0)};
    if (base.dim() == 2) {
      pts.push_back(base.points(1) * factor);
      lens.push_back(base.length(1));
    }
    const Grid g = make_grid(base.dim(), pts, lens);
    if (g.size() > kMaxStudyPoints && res.integrals.size() >= 3) break;
    const Field bf = materialize(b, g);
    double sum = 0.0;
    for (double v : bf.values()) {
      if (v < 0.0) throw Error("integrability_check: B must be non-negative");
      if (v != 0.0) sum += std::pow(v, -1.0 / q);
    }
    res.points.push_back(static_cast<std::size_t>(pts[0]));
    res.integrals.push_back(g.cell_volume() * sum);
  }
  const std::size_t n = res.integrals.size();
  std::vector<double> lx, ly;
  for (std::size_t i = n - 3; i < n; ++i) {
    lx.push_back(std::log(static_cast<double>(res.points[i])));
    ly.push_back(std::log(res.integrals[i]));
  }
  res.slope = fit_slope(lx, ly);
  if (res.slope <= 0.05) {
    res.verdict = Integrability::Finite;
  } else if (res.slope >= 0.5) {
    res.verdict = Integrability::LikelyDivergent;
  } else {
    res.verdict = Integrability::Inconclusive;
  }
  return res;
}

EpsSchedule EpsSchedule::geometric(double eps0, double ratio, std::size_t count, FlowConfig flow) {
  if (!(eps0 > 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
    throw Error("geometric schedule needs eps0 > 0 and 0 < ratio < 1");
  }
  EpsSchedule s;
  s.flow = flow;
  double e = eps0;
  for (std::size_t j = 0; j < count; ++j, e *= ratio) s.eps_values.push_back(e);
  return s;
}

void EpsSchedule::validate() const {
  if (eps_values.empty()) throw Error("eps schedule is empty");
  for (std::size_t j = 0; j < eps_values.size(); ++j) {
    if (!(eps_values[j] > 0.0) || !std::isfinite(eps_values[j])) throw Error("eps values must be positive");
    if (j > 0 && !(eps_values[j] < eps_values[j - 1])) throw Error("eps values must be strictly decreasing");
  }
  lichflow::validate(flow);
}

FlowResult solve_at_eps(const ProblemData& pd, double eps, const Field& warm_start, const FlowConfig& cfg) {
  if (!(eps > 0.0)) throw Error("solve_at_eps: eps must be positive");
  return run_to_steady(pd.with_eps(eps), warm_start, cfg);
}

namespace {

PathEntry make_entry(const ProblemData& pd_eps, const FlowResult& flow, double cumulative_dissipation) {
  const SteadyReport& rep = flow.report;
  PathEntry e{.eps = pd_eps.eps(), .u = rep.u};
  e.bounds.l2_sq = integrate(hadamard(rep.u, rep.u));
  e.bounds.grad_sq = integrate(gradient_sq(rep.u));
  e.bounds.dissipation = cumulative_dissipation;
  e.residual = rep.residual;
  e.barrier_floor = std::pow(min_value(pd_eps.A()) / (max_value(pd_eps.B()) + pd_eps.eps()),
                             1.0 / (pd_eps.p() + pd_eps.q()));
  e.barrier_lower = rep.barrier.lower;
  e.min_u_along_flow = flow.trajectory.front().min_u;
  double prev_energy = flow.trajectory.front().energy;
  for (const TrajectoryRecord& r : flow.trajectory) {
    e.min_u_along_flow = std::min(e.min_u_along_flow, r.min_u);
    if (r.energy > prev_energy + 1e-8 * (1.0 + std::abs(prev_energy))) ++e.energy_increases;
    prev_energy = r.energy;
  }
  e.converged = rep.converged;
  e.steps = rep.steps;
  return e;
}

void check_uniform_bounds(PathReport& rep) {
  if (rep.entries.empty()) return;
  auto check = [&](auto member, const char* name) {
    std::vector<double> v;
    for (const PathEntry& e : rep.entries) v.push_back(e.bounds.*member);
    const double med = median(v);
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] > 10.0 * med) {
        rep.uniform_bounds_ok = false;
        std::ostringstream os;
        os << "uniform bound violated (hypothesis likely failing): " << name << " at eps = "
           << rep.entries[j].eps << " is " << v[j] << " (> 10x median " << med << ")";
        rep.warnings.push_back(os.str());
      }
    }
  };
  check(&BoundTriple::l2_sq, "int u^2");
  check(&BoundTriple::grad_sq, "int |grad u|^2");
  check(&BoundTriple::dissipation, "cumulative int int |u_t|^2");
}

}  // namespace

PathReport run_path(const ProblemData& pd, const EpsSchedule& schedule, const Field& u0,
                    const PathOptions& options) {
  schedule.validate();
  require_positive(u0, "run_path initial data");
  PathReport rep;

  if (options.b_spec) {
    rep.integrability = integrability_check(*options.b_spec, pd.grid(), pd.q(), options.integrability_levels);
    if (rep.integrability->verdict != Integrability::Finite) {
      rep.warnings.push_back(std::string("integral of B^{-1/q}: ") + to_string(rep.integrability->verdict) +
                             " (slope " + io::format_double(rep.integrability->slope) + ")");
    }
  }

  Field start = u0;
  double dissipation = 0.0;
  for (double eps : schedule.eps_values) {
    FlowResult flow = [&] {
      try {
        return solve_at_eps(pd, eps, start, schedule.flow);
      } catch (const Error& err) {
        check_uniform_bounds(rep);
        throw PathAborted("eps-path aborted at eps = " + io::format_double(eps) + ": " + err.what(), rep);
      }
    }();
    dissipation += flow.report.dissipation;
    rep.entries.push_back(make_entry(pd.with_eps(eps), flow, dissipation));
    if (!flow.report.converged) {
      rep.warnings.push_back("eps = " + io::format_double(eps) + " did not reach steady state");
    }
    start = flow.report.u;
  }
  for (std::size_t j = 0; j + 1 < rep.entries.size(); ++j) {
    rep.gaps.push_back(l2_norm(rep.entries[j].u - rep.entries[j + 1].u));
  }
  check_uniform_bounds(rep);

  const ProblemData pd0 = pd.with_eps(0.0);
  rep.last_eps_residual = elliptic_residual(pd0, start);
  if (options.terminal_solve) {
    FlowResult flow = [&] {
      try {
        return run_to_steady(pd0, start, schedule.flow);
      } catch (const Error& err) {
        throw PathAborted(std::string("eps-path aborted in the eps = 0 solve: ") + err.what(), rep);
      }
    }();
    rep.limit = flow.report.u;
    rep.limit_residual = flow.report.residual;
    rep.limit_converged = flow.report.converged;
    rep.limit_gap = l2_norm(start - flow.report.u);
  } else {
    rep.limit = start;
    rep.limit_residual = rep.last_eps_residual;
  }
  rep.complete = true;
  return rep;
}

}  // namespace lichflow
