#pragma once

// The three subcommands. Machine-readable summaries go to `out`,
// diagnostics to `err`; the return value is the process exit code.

#include "omp2hmpp/variants.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace omp2hmpp {

enum ExitCode {
    kExitOk = 0,
    kExitUsage = 1,       // bad flags, unreadable input, malformed CSV/config
    kExitCompile = 2,     // parse/transform diagnostics
    kExitExecution = 3,   // some variants failed to run
};

struct RunConfig {
    enum class Command { Transform, Explore, Report } command = Command::Transform;
    std::filesystem::path input; // C source, or the CSV for `report`
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> executor; // config file; simulated defaults when absent
    int repetitions = 5;
    std::size_t cap = kDefaultVariantCap;
    std::vector<int> blocks;     // pragma lines of the check blocks to vary; empty = all
    std::string baseline;        // signature; empty = the all-zero one
    std::optional<double> ops;   // operation count for GOPS/W
    std::optional<std::filesystem::path> replay; // CSV of recorded measurements
};

int cmd_transform(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_explore(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace omp2hmpp
