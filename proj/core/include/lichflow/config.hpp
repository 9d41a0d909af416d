#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lichflow/error.hpp"
#include "lichflow/field.hpp"
#include "lichflow/heatflow.hpp"
#include "lichflow/monotone.hpp"
#include "lichflow/problem.hpp"

namespace lichflow {

/// Configuration problem, reported with its line and key when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line, std::string key)
      : Error(what), line_(line), key_(std::move(key)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

struct GridSection {
  int dim = 1;
  std::vector<int> points;
  std::vector<double> lengths;
};

struct ProblemSection {
  double p = 0.0;
  double q = 0.0;
  std::string a_expr;
  std::string b_expr;
  std::optional<std::string> h_expr;
  double eps = 0.0;
  EquationForm form = EquationForm::Main;
  bool allow_negative_b = false;
  std::optional<int> manifold_dim;
};

struct MonotoneSection {
  double horizon = 2.0;
  std::size_t steps = 200;
  std::size_t max_iters = 500;
  bool keep_history = false;
  SourceNode source_node = SourceNode::Previous;
};

struct EpsPathSection {
  /// Explicit schedule; when empty the geometric one below is used.
  std::vector<double> values;
  double eps0 = 0.1;
  double ratio = 0.5;
  std::size_t count = 9;
  int integrability_levels = 10;
  bool terminal_solve = true;

  std::vector<double> schedule() const;
};

struct OutputSection {
  std::string dir = "lichflow-out";
  std::string format = "both";  ///< series | snapshot | both
};

/// Fully resolved run configuration. Relative "@file:" paths are made
/// absolute against the config file's directory at load time.
struct RunConfig {
  GridSection grid;
  ProblemSection problem;
  std::string u0_expr;
  FlowConfig flow;
  MonotoneSection monotone;
  EpsPathSection epspath;
  OutputSection output;
};

struct LoadedConfig {
  RunConfig config;
  std::vector<std::string> warnings;
};

/// Parses and validates "section.key = value" text ('#' starts a comment).
LoadedConfig parse_config(std::string_view text, const std::string& origin = "<config>",
                          const std::filesystem::path& base_dir = {});
LoadedConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, in a fixed order; loadable again.
std::string resolved_config_text(const RunConfig& cfg);

Grid build_grid(const RunConfig& cfg);
ProblemData build_problem(const RunConfig& cfg, const Grid& grid);
Field build_initial(const RunConfig& cfg, const Grid& grid);

}  // namespace lichflow
