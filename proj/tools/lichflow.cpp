#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lichflow/commands.hpp"
#include "lichflow/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady states of semilinear elliptic equations on periodic grids", "lichflow"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string format;
  bool quiet = false;
  app.add_option("command", command, "flow | monotone | eps-path | verify")->required();
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--format", format, "series | snapshot | both")
      ->check(CLI::IsMember({"series", "snapshot", "both"}));
  app.add_flag("--quiet", quiet, "suppress progress messages");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : lichflow::kExitError;
  }

  const auto cmd = lichflow::parse_command(command);
  if (!cmd) {
    std::cerr << "error: unknown command '" << command << "' (expected flow, monotone, eps-path or verify)\n";
    return lichflow::kExitError;
  }

  lichflow::RunConfig cfg;
  std::vector<std::string> warnings;
  if (!config_path.empty()) {
    try {
      auto loaded = lichflow::load_config(config_path);
      cfg = std::move(loaded.config);
      warnings = std::move(loaded.warnings);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return lichflow::kExitError;
    }
  } else if (*cmd == lichflow::Command::Verify) {
    cfg = lichflow::default_verify_config();
  } else {
    std::cerr << "error: --config is required for '" << command << "'\n";
    return lichflow::kExitError;
  }

  lichflow::CommandOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (!format.empty()) opts.format = format;
  opts.quiet = quiet;
  return lichflow::run_command(*cmd, cfg, opts, warnings);
}
