#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "lichflow/config.hpp"

namespace lichflow {

enum class Command { Flow, Monotone, EpsPath, Verify };

/// Parses "flow", "monotone", "eps-path" or "verify".
std::optional<Command> parse_command(std::string_view name);
const char* to_string(Command cmd) noexcept;

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;  ///< overrides output.dir
  std::optional<std::string> format;             ///< overrides output.format
  bool quiet = false;
  std::ostream* log = nullptr;  ///< progress and warnings; stderr when null
};

/// Runs one pipeline and writes series, snapshot(s), the resolved config and
/// summary.txt into the output directory. Returns 0 when converged, 2 when
/// the run finished without converging and 1 on error (message logged).
int run_command(Command cmd, const RunConfig& cfg, const CommandOptions& options = {},
                const std::vector<std::string>& load_warnings = {});

/// Default configuration used by `verify` when no config file is given.
RunConfig default_verify_config();

}  // namespace lichflow
