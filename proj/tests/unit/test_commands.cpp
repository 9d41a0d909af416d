#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "common.hpp"
#include "lichflow/commands.hpp"
#include "lichflow/io.hpp"

using namespace lichflow;
using namespace lichflow::test;

namespace {

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "lichflow_test_commands" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string summary_value(const std::filesystem::path& dir, const std::string& key) {
  std::istringstream in(io::read_text(dir / "summary.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return {};
}

RunConfig config(const std::string& extra = "") {
  return parse_config("grid.points = 128\ngrid.lengths = 2*pi\nproblem.p = 2\nproblem.q = 2\n"
                      "problem.A = 16\nproblem.B = 1\ninitial.u0 = 1\n" + extra)
      .config;
}

}  // namespace

TEST_CASE("command names") {
  CHECK(parse_command("eps-path") == Command::EpsPath);
  CHECK_FALSE(parse_command("eps_path").has_value());
  for (Command c : {Command::Flow, Command::Monotone, Command::EpsPath, Command::Verify}) {
    CHECK(parse_command(to_string(c)) == c);
  }
}

TEST_CASE("flow command writes every artifact") {
  const auto dir = scratch("flow");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  CHECK(run_command(Command::Flow, config(), o) == kExitConverged);
  for (const char* f : {"series.csv", "snapshot.txt", "resolved.cfg", "summary.txt"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(summary_value(dir, "converged") == "true");
  CHECK(std::abs(io::parse_double(summary_value(dir, "max_u")) - 2.0) <= 1e-8);
  CHECK(std::abs(io::parse_double(summary_value(dir, "min_u")) - 2.0) <= 1e-8);
  CHECK_FALSE(summary_value(dir, "wall_time_s").empty());
  CHECK(linf_norm(io::read_snapshot(dir / "snapshot.txt") - Field(circle(128), 2.0)) <= 1e-8);

  // The echoed config loads back to the same resolved text.
  const std::string resolved = io::read_text(dir / "resolved.cfg");
  CHECK(resolved_config_text(parse_config(resolved).config) == resolved);
  CHECK(log.str().find("converged") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format selection and quiet mode") {
  const auto dir = scratch("format");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  o.quiet = true;
  o.format = "snapshot";
  CHECK(run_command(Command::Flow, config(), o) == kExitConverged);
  CHECK(std::filesystem::exists(dir / "snapshot.txt"));
  CHECK_FALSE(std::filesystem::exists(dir / "series.csv"));
  CHECK(log.str().empty());
  o.format = "pdf";
  CHECK(run_command(Command::Flow, config(), o) == kExitError);
  CHECK(log.str().find("error:") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("non-convergence exits with 2") {
  const auto dir = scratch("short");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  CHECK(run_command(Command::Flow, config("flow.t_max = 0.01\n"), o) == kExitNotConverged);
  CHECK(summary_value(dir, "converged") == "false");
  std::filesystem::remove_all(dir);
}

TEST_CASE("module errors exit with 1") {
  const auto dir = scratch("error");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  RunConfig c = config();
  c.problem.b_expr = "1 - cos(x)";
  // Constant barriers for the chain need min(B) > 0.
  CHECK(run_command(Command::Monotone, c, o) == kExitError);
  CHECK(log.str().find("use eps-path") != std::string::npos);
  CHECK_FALSE(summary_value(dir, "error").empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("monotone command") {
  const auto dir = scratch("monotone");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  RunConfig c = parse_config("grid.points = 32\ngrid.lengths = 2*pi\nproblem.p = 3\nproblem.q = 1\n"
                             "problem.A = 4\nproblem.B = 1\ninitial.u0 = 1\n")
                    .config;
  CHECK(run_command(Command::Monotone, c, o) == kExitConverged);
  CHECK(summary_value(dir, "ordering_violations") == "0");
  CHECK(io::parse_double(summary_value(dir, "heatflow_agreement")) <= 1e-6);
  const io::Table gaps = io::read_table(dir / "gaps.csv");
  CHECK(gaps.columns == std::vector<std::string>{"iteration", "gap"});
  CHECK(gaps.rows.size() > 2);
  CHECK(io::read_series(dir / "series.csv").size() == 201);
  std::filesystem::remove_all(dir);
}

TEST_CASE("eps-path command logs an integrability warning") {
  const auto dir = scratch("epspath");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  o.quiet = true;
  RunConfig c = parse_config("grid.points = 64\ngrid.lengths = 2*pi\nproblem.p = 2\nproblem.q = 1\n"
                             "problem.A = 1\nproblem.B = 1 - cos(x)\ninitial.u0 = 1\nepspath.count = 3\n"
                             "epspath.integrability_levels = 6\nepspath.terminal_solve = false\n")
                    .config;
  const int code = run_command(Command::EpsPath, c, o);
  CHECK(code != kExitError);
  CHECK(log.str().find("likely divergent") != std::string::npos);
  CHECK(summary_value(dir, "integrability") == "likely divergent");
  CHECK(io::read_table(dir / "path.csv").rows.size() == 3);
  for (const char* f : {"snapshot_eps_00.txt", "snapshot_eps_02.txt", "snapshot.txt"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("verify command") {
  const auto dir = scratch("verify");
  std::ostringstream log;
  CommandOptions o;
  o.out_dir = dir;
  o.log = &log;
  CHECK(run_command(Command::Verify, default_verify_config(), o) == kExitConverged);
  const double order = io::parse_double(summary_value(dir, "mms_observed_order"));
  CHECK(order == doctest::Approx(2.0).epsilon(0.1));
  CHECK(summary_value(dir, "mms_order").rfind("pass", 0) == 0);
  CHECK(io::read_table(dir / "mms.csv").rows.size() == 3);
  std::filesystem::remove_all(dir);
}
