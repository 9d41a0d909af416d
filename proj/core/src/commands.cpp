#include "lichflow/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <utility>

#include "lichflow/epspath.hpp"
#include "lichflow/io.hpp"
#include "lichflow/monotone.hpp"

namespace lichflow {

std::optional<Command> parse_command(std::string_view name) {
  if (name == "flow") return Command::Flow;
  if (name == "monotone") return Command::Monotone;
  if (name == "eps-path") return Command::EpsPath;
  if (name == "verify") return Command::Verify;
  return std::nullopt;
}

const char* to_string(Command cmd) noexcept {
  switch (cmd) {
    case Command::Flow: return "flow";
    case Command::Monotone: return "monotone";
    case Command::EpsPath: return "eps-path";
    case Command::Verify: return "verify";
  }
  return "?";
}

namespace {

using Summary = std::vector<std::pair<std::string, std::string>>;

struct Context {
  std::filesystem::path dir;
  bool series = true;
  bool snapshot = true;
  bool quiet = false;
  std::ostream* log = nullptr;

  void progress(const std::string& msg) const {
    if (!quiet) *log << msg << '\n';
  }
  void warn(const std::string& msg) const { *log << "warning: " << msg << '\n'; }
};

std::string num(double v) { return io::format_double(v); }
std::string flag(bool b) { return b ? "true" : "false"; }

void add_field_stats(Summary& s, const Field& u, const std::string& prefix = "") {
  const FieldStats st = field_stats(u);
  s.emplace_back(prefix + "min_u", num(st.min));
  s.emplace_back(prefix + "max_u", num(st.max));
  s.emplace_back(prefix + "mean_u", num(st.mean));
}

void add_report(Summary& s, const SteadyReport& r) {
  s.emplace_back("converged", flag(r.converged));
  s.emplace_back("residual_l2", num(r.residual.l2));
  s.emplace_back("residual_linf", num(r.residual.linf));
  s.emplace_back("dudt_l2", num(r.dudt_l2));
  s.emplace_back("steps", std::to_string(r.steps));
  s.emplace_back("rejected_steps", std::to_string(r.rejected_steps));
  s.emplace_back("t_final", num(r.t_final));
  s.emplace_back("energy_initial", num(r.energy_initial));
  s.emplace_back("energy_final", num(r.energy_final));
  s.emplace_back("dissipation", num(r.dissipation));
  s.emplace_back("omega", num(r.omega));
  s.emplace_back("barrier_lower", num(r.barrier.lower));
  s.emplace_back("barrier_upper", num(r.barrier.upper));
  add_field_stats(s, r.u);
}

void write_summary(const Context& ctx, const Summary& s) {
  std::ostringstream os;
  for (const auto& [k, v] : s) os << k << " = " << v << '\n';
  io::write_text(ctx.dir / "summary.txt", os.str());
}

bool run_flow(const Context& ctx, const RunConfig& cfg, Summary& s) {
  const Grid grid = build_grid(cfg);
  const ProblemData pd = build_problem(cfg, grid);
  for (const auto& w : pd.warnings()) ctx.warn(w);
  const Field u0 = build_initial(cfg, grid);
  ctx.progress("flow: integrating on " + std::to_string(grid.size()) + " points");
  const FlowResult r = run_to_steady(pd, u0, cfg.flow);
  if (ctx.series) io::write_series(r.trajectory, ctx.dir / "series.csv");
  if (ctx.snapshot) io::write_snapshot(r.report.u, ctx.dir / "snapshot.txt");
  add_report(s, r.report);
  ctx.progress("flow: " + std::string(r.report.converged ? "converged" : "not converged") + " after " +
               std::to_string(r.report.steps) + " steps, residual_linf " + num(r.report.residual.linf));
  return r.report.converged;
}

std::vector<TrajectoryRecord> chain_records(const ProblemData& pd, const SpaceTimeField& w) {
  std::vector<TrajectoryRecord> out;
  const double dt = w.time_step();
  for (std::size_t j = 0; j <= w.time_steps(); ++j) {
    const Field& u = w[j];
    const ResidualNorms r = elliptic_residual(pd, u);
    TrajectoryRecord rec;
    rec.t = w.time(j);
    rec.dt = j == 0 ? 0.0 : dt;
    rec.min_u = min_value(u);
    rec.max_u = max_value(u);
    rec.energy = pd.form() == EquationForm::Main ? energy(pd, u) : std::nan("");
    rec.residual_l2 = r.l2;
    rec.residual_linf = r.linf;
    rec.dudt_l2 = j == 0 ? r.l2 : l2_norm((u - w[j - 1]) * (1.0 / dt));
    out.push_back(rec);
  }
  return out;
}

bool run_monotone(const Context& ctx, const RunConfig& cfg, Summary& s) {
  const Grid grid = build_grid(cfg);
  const ProblemData pd = build_problem(cfg, grid);
  for (const auto& w : pd.warnings()) ctx.warn(w);
  const Field u0 = build_initial(cfg, grid);
  ChainOptions opts;
  opts.horizon = cfg.monotone.horizon;
  opts.time_steps = cfg.monotone.steps;
  opts.max_iters = cfg.monotone.max_iters;
  opts.keep_history = cfg.monotone.keep_history;
  opts.source_node = cfg.monotone.source_node;
  opts.omega = cfg.flow.omega_shift;
  ctx.progress("monotone: iterating sub/super chains on [0, " + num(opts.horizon) + "]");
  const ChainReport rep = iterate_chain(pd, u0, opts);
  const SpaceTimeField& sub = rep.iterates_sub.back();
  const SpaceTimeField& super = rep.iterates_super.back();

  const std::vector<Field> flow = evolve_fixed(pd, u0, rep.omega, super.time_step(), super.time_steps());
  double agreement = 0.0;
  for (std::size_t j = 0; j < flow.size(); ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      agreement = std::max({agreement, std::abs(flow[j][i] - sub[j][i]), std::abs(flow[j][i] - super[j][i])});
    }
  }

  if (ctx.series) {
    io::write_series(chain_records(pd, super), ctx.dir / "series.csv");
    io::Table gaps{{"iteration", "gap"}, {}};
    for (std::size_t k = 0; k < rep.gap_history.size(); ++k) {
      gaps.rows.push_back({static_cast<double>(k), rep.gap_history[k]});
    }
    io::write_table(gaps, ctx.dir / "gaps.csv");
  }
  if (ctx.snapshot) {
    io::write_snapshot(super.final_slice(), ctx.dir / "snapshot.txt");
    io::write_snapshot(sub.final_slice(), ctx.dir / "snapshot_sub.txt");
  }
  s.emplace_back("converged", flag(rep.converged));
  s.emplace_back("iterations", std::to_string(rep.iterations));
  s.emplace_back("final_gap", num(rep.gap_history.empty() ? 0.0 : rep.gap_history.back()));
  s.emplace_back("ordering_violations", std::to_string(rep.ordering_violations.count));
  s.emplace_back("worst_ordering_violation", num(rep.ordering_violations.worst));
  s.emplace_back("heatflow_agreement", num(agreement));
  s.emplace_back("omega", num(rep.omega));
  s.emplace_back("barrier_lower", num(rep.barrier.lower));
  s.emplace_back("barrier_upper", num(rep.barrier.upper));
  const ResidualNorms res = elliptic_residual(pd, super.final_slice());
  s.emplace_back("residual_l2", num(res.l2));
  s.emplace_back("residual_linf", num(res.linf));
  add_field_stats(s, super.final_slice());
  if (rep.ordering_violations.count) {
    ctx.warn(std::to_string(rep.ordering_violations.count) + " ordering violations (worst " +
             num(rep.ordering_violations.worst) + ")");
  }
  ctx.progress("monotone: " + std::string(rep.converged ? "converged" : "not converged") + " after " +
               std::to_string(rep.iterations) + " iterations, gap " + s[2].second);
  return rep.converged;
}

bool run_eps_path(const Context& ctx, const RunConfig& cfg, Summary& s) {
  const Grid grid = build_grid(cfg);
  const ProblemData pd = build_problem(cfg, grid);
  for (const auto& w : pd.warnings()) ctx.warn(w);
  const Field u0 = build_initial(cfg, grid);
  EpsSchedule schedule{cfg.epspath.schedule(), cfg.flow};
  PathOptions opts;
  const CoefficientSpec b_spec = CoefficientSpec::parse(cfg.problem.b_expr);
  if (!b_spec.is_tabulated()) opts.b_spec = b_spec;
  opts.integrability_levels = cfg.epspath.integrability_levels;
  opts.terminal_solve = cfg.epspath.terminal_solve;
  ctx.progress("eps-path: " + std::to_string(schedule.eps_values.size()) + " levels");

  PathReport rep;
  std::string aborted;
  try {
    rep = run_path(pd, schedule, u0, opts);
  } catch (const PathAborted& e) {
    rep = e.partial();
    aborted = e.what();
  }
  for (const auto& w : rep.warnings) ctx.warn(w);

  if (ctx.series) {
    io::Table t{{"eps", "l2_sq", "grad_sq", "dissipation", "residual_l2", "residual_linf", "gap", "min_u",
                 "min_u_along_flow", "barrier_lower", "converged", "steps"},
                {}};
    for (std::size_t j = 0; j < rep.entries.size(); ++j) {
      const PathEntry& e = rep.entries[j];
      t.rows.push_back({e.eps, e.bounds.l2_sq, e.bounds.grad_sq, e.bounds.dissipation, e.residual.l2,
                        e.residual.linf, j == 0 ? 0.0 : rep.gaps[j - 1], min_value(e.u), e.min_u_along_flow,
                        e.barrier_lower, e.converged ? 1.0 : 0.0, static_cast<double>(e.steps)});
    }
    io::write_table(t, ctx.dir / "path.csv");
  }
  if (ctx.snapshot) {
    for (std::size_t j = 0; j < rep.entries.size(); ++j) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_eps_%02zu.txt", j);
      io::write_snapshot(rep.entries[j].u, ctx.dir / name);
    }
    if (rep.limit) io::write_snapshot(*rep.limit, ctx.dir / "snapshot_limit.txt");
    const Field* last = rep.limit ? &*rep.limit : rep.entries.empty() ? nullptr : &rep.entries.back().u;
    if (last) io::write_snapshot(*last, ctx.dir / "snapshot.txt");
  }

  bool converged = aborted.empty() && rep.complete;
  for (const auto& e : rep.entries) converged = converged && e.converged;
  if (cfg.epspath.terminal_solve) converged = converged && rep.limit_converged;
  s.emplace_back("converged", flag(converged));
  s.emplace_back("levels_completed", std::to_string(rep.entries.size()));
  if (!aborted.empty()) s.emplace_back("aborted", aborted);
  if (rep.integrability) {
    s.emplace_back("integrability", to_string(rep.integrability->verdict));
    s.emplace_back("integrability_slope", num(rep.integrability->slope));
  }
  s.emplace_back("uniform_bounds_ok", flag(rep.uniform_bounds_ok));
  s.emplace_back("final_gap", num(rep.gaps.empty() ? 0.0 : rep.gaps.back()));
  s.emplace_back("last_eps_residual_l2", num(rep.last_eps_residual.l2));
  s.emplace_back("last_eps_residual_linf", num(rep.last_eps_residual.linf));
  if (rep.limit) {
    s.emplace_back("limit_converged", flag(rep.limit_converged));
    s.emplace_back("residual_l2", num(rep.limit_residual.l2));
    s.emplace_back("residual_linf", num(rep.limit_residual.linf));
    s.emplace_back("limit_gap", num(rep.limit_gap));
    add_field_stats(s, *rep.limit);
  } else if (!rep.entries.empty()) {
    add_field_stats(s, rep.entries.back().u);
  }
  if (!aborted.empty()) throw Error(aborted);
  ctx.progress("eps-path: " + std::string(converged ? "converged" : "not converged"));
  return converged;
}

constexpr const char* kMmsSolution = "2 + 0.5*cos(x)";
constexpr const char* kMmsA =
    "(2 + 0.5*cos(x))*(2 + 0.5*cos(x))*(0.5*cos(x) + (2 + 0.5*cos(x))*(2 + 0.5*cos(x)))";

RunConfig circle_config(int n, double p, double q, std::string a, std::string b, std::string u0) {
  RunConfig cfg;
  cfg.grid.dim = 1;
  cfg.grid.points = {n};
  cfg.grid.lengths = {2.0 * std::numbers::pi};
  cfg.problem.p = p;
  cfg.problem.q = q;
  cfg.problem.a_expr = std::move(a);
  cfg.problem.b_expr = std::move(b);
  cfg.u0_expr = std::move(u0);
  return cfg;
}

bool run_verify(const Context& ctx, const RunConfig& cfg, Summary& s) {
  bool all_ok = true;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    s.emplace_back(name, std::string(ok ? "pass" : "fail") + " (" + detail + ")");
    ctx.progress("verify: " + name + ": " + (ok ? "pass" : "fail") + " (" + detail + ")");
    all_ok = all_ok && ok;
  };

  io::Table mms{{"points", "h", "linf_error"}, {}};
  std::vector<double> errors;
  bool mms_converged = true;
  for (int n : {32, 64, 128}) {
    RunConfig c = circle_config(n, 2.0, 2.0, kMmsA, "1", "2");
    c.flow = cfg.flow;
    const Grid grid = build_grid(c);
    const ProblemData pd = build_problem(c, grid);
    const FlowResult r = run_to_steady(pd, build_initial(c, grid), c.flow);
    const Field exact = materialize(CoefficientSpec::parse(kMmsSolution), grid);
    const double err = linf_norm(r.report.u - exact);
    mms_converged = mms_converged && r.report.converged;
    errors.push_back(err);
    mms.rows.push_back({static_cast<double>(n), grid.spacing(0), err});
    s.emplace_back("mms_error_n" + std::to_string(n), num(err));
  }
  double order_lo = INFINITY, order_hi = -INFINITY;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double order = std::log2(errors[k] / errors[k + 1]);
    order_lo = std::min(order_lo, order);
    order_hi = std::max(order_hi, order);
  }
  s.emplace_back("mms_observed_order", num(std::log2(errors.front() / errors.back()) / 2.0));
  check("mms_order", mms_converged && order_lo >= 1.8 && order_hi <= 2.2,
        "orders " + num(order_lo) + " .. " + num(order_hi));
  if (ctx.series) io::write_table(mms, ctx.dir / "mms.csv");

  struct ClosedForm {
    const char* name;
    RunConfig cfg;
    double value;
  };
  std::vector<ClosedForm> cases;
  cases.push_back({"constant_balance", circle_config(64, 2.0, 2.0, "16", "1", "1"), 2.0});
  cases.push_back({"below_one", circle_config(64, 2.0, 3.0, "1", "1", "0.5 + 0.3*cos(x)"), 1.0});
  cases.push_back({"above_one", circle_config(64, 2.0, 3.0, "1", "1", "5"), 1.0});
  {
    RunConfig c = circle_config(64, 2.0, 2.0, "1", "0", "1");
    c.problem.eps = 0.0625;
    cases.push_back({"regularized_zero_b", c, 2.0});
  }
  std::optional<Field> last;
  for (auto& cf : cases) {
    cf.cfg.flow = cfg.flow;
    const Grid grid = build_grid(cf.cfg);
    const ProblemData pd = build_problem(cf.cfg, grid);
    const FlowResult r = run_to_steady(pd, build_initial(cf.cfg, grid), cf.cfg.flow);
    const double err = linf_norm(r.report.u - Field(grid, cf.value));
    check(cf.name, r.report.converged && err <= 1e-8, "error " + num(err));
    last = r.report.u;
  }
  if (ctx.snapshot && last) io::write_snapshot(*last, ctx.dir / "snapshot.txt");
  s.emplace_back("converged", flag(all_ok));
  return all_ok;
}

}  // namespace

RunConfig default_verify_config() {
  RunConfig cfg = circle_config(64, 2.0, 2.0, kMmsA, "1", "2");
  cfg.output.dir = "lichflow-verify";
  return cfg;
}

int run_command(Command cmd, const RunConfig& cfg, const CommandOptions& options,
                const std::vector<std::string>& load_warnings) {
  Context ctx;
  ctx.log = options.log ? options.log : &std::cerr;
  ctx.quiet = options.quiet;
  try {
    ctx.dir = options.out_dir ? *options.out_dir : std::filesystem::path(cfg.output.dir);
    const std::string format = options.format ? *options.format : cfg.output.format;
    if (format == "series") ctx.snapshot = false;
    else if (format == "snapshot") ctx.series = false;
    else if (format != "both") throw Error("unknown output format '" + format + "' (expected series, snapshot or both)");

    for (const auto& w : load_warnings) ctx.warn(w);
    std::filesystem::create_directories(ctx.dir);
    RunConfig resolved = cfg;
    resolved.output.dir = ctx.dir.string();
    resolved.output.format = format;
    io::write_text(ctx.dir / "resolved.cfg", resolved_config_text(resolved));

    Summary s;
    s.emplace_back("command", to_string(cmd));
    const auto start = std::chrono::steady_clock::now();
    bool converged = false;
    try {
      switch (cmd) {
        case Command::Flow: converged = run_flow(ctx, cfg, s); break;
        case Command::Monotone: converged = run_monotone(ctx, cfg, s); break;
        case Command::EpsPath: converged = run_eps_path(ctx, cfg, s); break;
        case Command::Verify: converged = run_verify(ctx, cfg, s); break;
      }
    } catch (const Error& e) {
      s.emplace_back("converged", "false");
      s.emplace_back("error", e.what());
      s.emplace_back("wall_time_s",
                     num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()));
      write_summary(ctx, s);
      throw;
    }
    s.emplace_back("wall_time_s",
                   num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()));
    write_summary(ctx, s);
    return converged ? kExitConverged : kExitNotConverged;
  } catch (const std::exception& e) {
    *ctx.log << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace lichflow
