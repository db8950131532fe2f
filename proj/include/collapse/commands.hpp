#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace collapse {

/// Exit codes of the command line front-end.
enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_guard = 3,
};

struct CommandOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;  // overrides integration.seed
    std::optional<std::string> out;     // overrides outputs.dir
    bool json = false;
};

/// Trajectory, ensemble or master equation run. Writes CSV series and
/// summary.json to the output directory.
int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// rate, pair-potential, kappa-scan or linearity. Tables go to `out` as CSV
/// (JSON with --json) and to <out dir>/<subcommand>.csv when --out is given.
int cmd_analyze(const std::string& subcommand, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

/// Named physical parameter points with their lattice-unit mapping.
int cmd_presets(bool json, std::ostream& out);

}  // namespace collapse
