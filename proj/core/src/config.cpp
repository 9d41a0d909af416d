#include "lichflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "lichflow/coefficient.hpp"
#include "lichflow/io.hpp"

namespace lichflow {

std::vector<double> EpsPathSection::schedule() const {
  if (!values.empty()) return values;
  std::vector<double> out;
  double e = eps0;
  for (std::size_t j = 0; j < count; ++j, e *= ratio) out.push_back(e);
  return out;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "grid.dim", "grid.points", "grid.lengths",
      "problem.p", "problem.q", "problem.A", "problem.B", "problem.h", "problem.eps", "problem.form",
      "problem.allow_negative_B", "problem.manifold_dim",
      "initial.u0",
      "flow.dt_init", "flow.dt_min", "flow.dt_max", "flow.t_max", "flow.steady_tol_residual",
      "flow.steady_tol_dudt", "flow.record_every", "flow.omega_shift", "flow.blowup_guard", "flow.max_steps",
      "monotone.horizon", "monotone.steps", "monotone.max_iters", "monotone.keep_history", "monotone.source_node",
      "epspath.values", "epspath.eps0", "epspath.ratio", "epspath.count", "epspath.integrability_levels",
      "epspath.terminal_solve",
      "output.dir", "output.format"};
  return keys;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::size_t line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (line(key)) os << ':' << line(key);
    os << ": " << key << ": " << msg;
    throw ConfigError(os.str(), line(key), key);
  }

  const std::string& raw(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key");
    return entries_.at(key).value;
  }

  // Numbers may be written as constant expressions, e.g. "2*pi".
  double number(const std::string& key) const {
    const std::string& text = raw(key);
    try {
      const CoefficientSpec spec = CoefficientSpec::parse(text);
      if (spec.is_tabulated() || !spec.is_constant()) fail(key, "expected a constant, got \"" + text + "\"");
      const double v = spec.evaluate(0.0, 0.0);
      if (!std::isfinite(v)) fail(key, "value is not finite");
      return v;
    } catch (const ParseError& e) {
      fail(key, e.what());
    }
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9e15) fail(key, "expected an integer");
    return static_cast<long long>(v);
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const long long v = integer(key);
    if (v < 1) fail(key, "must be at least 1");
    return static_cast<std::size_t>(v);
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got \"" + v + "\"");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::string text = raw(key);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream ss(text);
    std::vector<double> out;
    std::string item;
    while (ss >> item) {
      try {
        const CoefficientSpec spec = CoefficientSpec::parse(item);
        if (spec.is_tabulated() || !spec.is_constant()) fail(key, "expected constants, got \"" + item + "\"");
        out.push_back(spec.evaluate(0.0, 0.0));
      } catch (const ParseError& e) {
        fail(key, e.what());
      }
    }
    if (out.empty()) fail(key, "expected at least one value");
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string origin_;
};

std::string resolve_file_expr(const std::string& expr, const std::filesystem::path& base_dir) {
  const CoefficientSpec spec = CoefficientSpec::parse(expr);
  if (!spec.is_tabulated()) return expr;
  std::filesystem::path p(spec.file());
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return "@file:" + std::filesystem::absolute(p).lexically_normal().string();
}

Field materialize_key(const Reader& rd, const std::string& key, const std::string& expr, const Grid& grid) {
  try {
    return materialize(CoefficientSpec::parse(expr), grid);
  } catch (const Error& e) {
    rd.fail(key, e.what());
  }
}

}  // namespace

Grid build_grid(const RunConfig& cfg) {
  return make_grid(cfg.grid.dim, cfg.grid.points, cfg.grid.lengths);
}

ProblemData build_problem(const RunConfig& cfg, const Grid& grid) {
  const ProblemSection& ps = cfg.problem;
  ProblemOptions opts;
  if (ps.h_expr) opts.h = materialize(CoefficientSpec::parse(*ps.h_expr), grid);
  opts.eps = ps.eps;
  opts.form = ps.form;
  opts.allow_negative_b = ps.allow_negative_b;
  opts.manifold_dim = ps.manifold_dim;
  return ProblemData(ps.p, ps.q, materialize(CoefficientSpec::parse(ps.a_expr), grid),
                     materialize(CoefficientSpec::parse(ps.b_expr), grid), std::move(opts));
}

Field build_initial(const RunConfig& cfg, const Grid& grid) {
  return materialize(CoefficientSpec::parse(cfg.u0_expr), grid);
}

LoadedConfig parse_config(std::string_view text, const std::string& origin, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": parse error: expected 'section.key = value'",
                        line_no, "");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!known_keys().count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'", line_no, key);
    }
    if (entries.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'", line_no, key);
    }
    if (value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + key + ": empty value", line_no, key);
    }
    entries[key] = {value, line_no};
    if (end == text.size()) break;
  }

  const Reader rd(std::move(entries), origin);
  LoadedConfig loaded;
  RunConfig& cfg = loaded.config;

  // grid
  cfg.grid.dim = rd.has("grid.dim") ? static_cast<int>(rd.integer("grid.dim")) : 1;
  if (cfg.grid.dim != 1 && cfg.grid.dim != 2) rd.fail("grid.dim", "unsupported dimension (expected 1 or 2)");
  for (double v : rd.numbers("grid.points")) {
    if (v != std::floor(v)) rd.fail("grid.points", "point counts must be integers");
    cfg.grid.points.push_back(static_cast<int>(v));
  }
  cfg.grid.lengths = rd.numbers("grid.lengths");
  Grid grid = [&] {
    try {
      return build_grid(cfg);
    } catch (const Error& e) {
      rd.fail("grid.points", e.what());
    }
  }();

  // problem
  ProblemSection& ps = cfg.problem;
  ps.p = rd.number("problem.p");
  if (!(ps.p > 1.0)) rd.fail("problem.p", "p must exceed 1 (got " + io::format_double(ps.p) + ")");
  ps.q = rd.number("problem.q");
  if (!(ps.q > 0.0)) rd.fail("problem.q", "q must be positive (got " + io::format_double(ps.q) + ")");
  ps.eps = rd.number_or("problem.eps", 0.0);
  if (ps.eps < 0.0) rd.fail("problem.eps", "eps must be non-negative");
  if (rd.has("problem.form")) {
    const std::string& f = rd.raw("problem.form");
    if (f == "main") ps.form = EquationForm::Main;
    else if (f == "appendix") ps.form = EquationForm::Appendix;
    else rd.fail("problem.form", "expected main or appendix, got \"" + f + "\"");
  }
  ps.allow_negative_b = rd.boolean_or("problem.allow_negative_B", false);
  if (rd.has("problem.manifold_dim")) {
    const long long n = rd.integer("problem.manifold_dim");
    if (n < 1) rd.fail("problem.manifold_dim", "must be positive");
    ps.manifold_dim = static_cast<int>(n);
  }
  ps.a_expr = resolve_file_expr(rd.raw("problem.A"), base_dir);
  ps.b_expr = resolve_file_expr(rd.raw("problem.B"), base_dir);
  if (rd.has("problem.h")) ps.h_expr = resolve_file_expr(rd.raw("problem.h"), base_dir);
  cfg.u0_expr = resolve_file_expr(rd.raw("initial.u0"), base_dir);

  const Field a = materialize_key(rd, "problem.A", ps.a_expr, grid);
  const Field b = materialize_key(rd, "problem.B", ps.b_expr, grid);
  if (!(min_value(a) > 0.0)) rd.fail("problem.A", "A must be strictly positive (min A = " + io::format_double(min_value(a)) + ")");
  if (ps.form == EquationForm::Main && !ps.allow_negative_b && min_value(b) < 0.0) {
    rd.fail("problem.B", "B must be non-negative for the main equation (set problem.allow_negative_B to override)");
  }
  if (ps.form == EquationForm::Appendix && !ps.allow_negative_b && max_value(b) >= 0.0) {
    rd.fail("problem.B", "the appendix form needs B < 0 everywhere");
  }
  if (ps.h_expr) materialize_key(rd, "problem.h", *ps.h_expr, grid);
  const Field u0 = materialize_key(rd, "initial.u0", cfg.u0_expr, grid);
  if (!(min_value(u0) > 0.0)) rd.fail("initial.u0", "initial data must be strictly positive");
  if (auto w = critical_exponent_warning(ps.q, ps.manifold_dim)) loaded.warnings.push_back(*w);

  // flow
  FlowConfig& fc = cfg.flow;
  fc.dt_init = rd.number_or("flow.dt_init", fc.dt_init);
  fc.dt_min = rd.number_or("flow.dt_min", fc.dt_min);
  fc.dt_max = rd.number_or("flow.dt_max", fc.dt_max);
  fc.t_max = rd.number_or("flow.t_max", fc.t_max);
  fc.steady_tol_residual = rd.number_or("flow.steady_tol_residual", fc.steady_tol_residual);
  fc.steady_tol_dudt = rd.number_or("flow.steady_tol_dudt", fc.steady_tol_dudt);
  fc.record_every = rd.count_or("flow.record_every", fc.record_every);
  if (rd.has("flow.omega_shift")) fc.omega_shift = rd.number("flow.omega_shift");
  fc.blowup_guard = rd.number_or("flow.blowup_guard", fc.blowup_guard);
  fc.max_steps = rd.count_or("flow.max_steps", fc.max_steps);
  try {
    validate(fc);
  } catch (const Error& e) {
    std::string key = "flow";
    const std::string msg = e.what();
    for (const char* k : {"dt_init", "dt_min", "dt_max", "t_max", "steady_tol_residual", "steady_tol_dudt",
                          "blowup_guard", "omega_shift", "record_every", "max_steps"}) {
      if (msg.find(std::string("flow.") + k) != std::string::npos) key = std::string("flow.") + k;
    }
    rd.fail(key, msg);
  }

  // monotone
  MonotoneSection& ms = cfg.monotone;
  ms.horizon = rd.number_or("monotone.horizon", ms.horizon);
  if (!(ms.horizon > 0.0)) rd.fail("monotone.horizon", "must be positive");
  ms.steps = rd.count_or("monotone.steps", ms.steps);
  ms.max_iters = rd.count_or("monotone.max_iters", ms.max_iters);
  ms.keep_history = rd.boolean_or("monotone.keep_history", ms.keep_history);
  if (rd.has("monotone.source_node")) {
    const std::string& s = rd.raw("monotone.source_node");
    if (s == "previous") ms.source_node = SourceNode::Previous;
    else if (s == "target") ms.source_node = SourceNode::Target;
    else rd.fail("monotone.source_node", "expected previous or target");
  }

  // eps path
  EpsPathSection& es = cfg.epspath;
  if (rd.has("epspath.values")) {
    es.values = rd.numbers("epspath.values");
    for (std::size_t j = 0; j < es.values.size(); ++j) {
      if (!(es.values[j] > 0.0)) rd.fail("epspath.values", "eps values must be positive");
      if (j && !(es.values[j] < es.values[j - 1])) rd.fail("epspath.values", "eps values must be strictly decreasing");
    }
  }
  es.eps0 = rd.number_or("epspath.eps0", es.eps0);
  if (!(es.eps0 > 0.0)) rd.fail("epspath.eps0", "must be positive");
  es.ratio = rd.number_or("epspath.ratio", es.ratio);
  if (!(es.ratio > 0.0 && es.ratio < 1.0)) rd.fail("epspath.ratio", "must lie in (0, 1)");
  es.count = rd.count_or("epspath.count", es.count);
  es.integrability_levels = static_cast<int>(rd.count_or("epspath.integrability_levels",
                                                          static_cast<std::size_t>(es.integrability_levels)));
  if (es.integrability_levels < 3) rd.fail("epspath.integrability_levels", "must be at least 3");
  es.terminal_solve = rd.boolean_or("epspath.terminal_solve", es.terminal_solve);

  // output
  if (rd.has("output.dir")) cfg.output.dir = rd.raw("output.dir");
  if (rd.has("output.format")) {
    cfg.output.format = rd.raw("output.format");
    if (cfg.output.format != "series" && cfg.output.format != "snapshot" && cfg.output.format != "both") {
      rd.fail("output.format", "expected series, snapshot or both");
    }
  }
  return loaded;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_text(path), path.string(), path.parent_path());
}

std::string resolved_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  auto num = [](double v) { return io::format_double(v); };
  auto list = [&](const auto& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ' ';
      if constexpr (std::is_same_v<std::decay_t<decltype(values[i])>, int>) {
        s += std::to_string(values[i]);
      } else {
        s += num(values[i]);
      }
    }
    return s;
  };
  const ProblemSection& ps = cfg.problem;
  os << "# resolved lichflow configuration\n";
  os << "grid.dim = " << cfg.grid.dim << '\n';
  os << "grid.points = " << list(cfg.grid.points) << '\n';
  os << "grid.lengths = " << list(cfg.grid.lengths) << '\n';
  os << "problem.p = " << num(ps.p) << '\n';
  os << "problem.q = " << num(ps.q) << '\n';
  os << "problem.A = " << ps.a_expr << '\n';
  os << "problem.B = " << ps.b_expr << '\n';
  if (ps.h_expr) os << "problem.h = " << *ps.h_expr << '\n';
  os << "problem.eps = " << num(ps.eps) << '\n';
  os << "problem.form = " << (ps.form == EquationForm::Main ? "main" : "appendix") << '\n';
  os << "problem.allow_negative_B = " << (ps.allow_negative_b ? "true" : "false") << '\n';
  if (ps.manifold_dim) os << "problem.manifold_dim = " << *ps.manifold_dim << '\n';
  os << "initial.u0 = " << cfg.u0_expr << '\n';
  const FlowConfig& fc = cfg.flow;
  os << "flow.dt_init = " << num(fc.dt_init) << '\n';
  os << "flow.dt_min = " << num(fc.dt_min) << '\n';
  os << "flow.dt_max = " << num(fc.dt_max) << '\n';
  os << "flow.t_max = " << num(fc.t_max) << '\n';
  os << "flow.steady_tol_residual = " << num(fc.steady_tol_residual) << '\n';
  os << "flow.steady_tol_dudt = " << num(fc.steady_tol_dudt) << '\n';
  os << "flow.record_every = " << fc.record_every << '\n';
  if (fc.omega_shift) os << "flow.omega_shift = " << num(*fc.omega_shift) << '\n';
  os << "flow.blowup_guard = " << num(fc.blowup_guard) << '\n';
  os << "flow.max_steps = " << fc.max_steps << '\n';
  const MonotoneSection& ms = cfg.monotone;
  os << "monotone.horizon = " << num(ms.horizon) << '\n';
  os << "monotone.steps = " << ms.steps << '\n';
  os << "monotone.max_iters = " << ms.max_iters << '\n';
  os << "monotone.keep_history = " << (ms.keep_history ? "true" : "false") << '\n';
  os << "monotone.source_node = " << (ms.source_node == SourceNode::Previous ? "previous" : "target") << '\n';
  const EpsPathSection& es = cfg.epspath;
  if (!es.values.empty()) os << "epspath.values = " << list(es.values) << '\n';
  os << "epspath.eps0 = " << num(es.eps0) << '\n';
  os << "epspath.ratio = " << num(es.ratio) << '\n';
  os << "epspath.count = " << es.count << '\n';
  os << "epspath.integrability_levels = " << es.integrability_levels << '\n';
  os << "epspath.terminal_solve = " << (es.terminal_solve ? "true" : "false") << '\n';
  os << "output.dir = " << cfg.output.dir << '\n';
  os << "output.format = " << cfg.output.format << '\n';
  return os.str();
}

}  // namespace lichflow
