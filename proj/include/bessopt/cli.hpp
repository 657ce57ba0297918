#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace bessopt::cli {

enum ExitCode : int { ok = 0, config_error = 2, infeasible = 3, numerical_failure = 4 };

struct RunManifest {
    std::string command;      // simulate, identify, optimize, cost-sweep, compare-controllers
    std::string case_path;    // bundled name or case file; overrides the run file
    std::string run_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    int workers = 0;          // 0: BESSOPT_WORKERS or hardware concurrency
    bool quiet = false;
    std::string trace_path;   // identify only
    std::string channel;      // identify only, default first channel
    bool coi = false;         // identify: subtract the inertia-weighted centre of angle
    double sample_dt = 0.05;  // identify: identification sample interval
};

/// Executes one command. Artifacts go to manifest.output_dir; progress goes to `log`
/// unless quiet.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& log);

/// Argument parsing front end used by the executable.
int main_entry(int argc, char** argv);

} // namespace bessopt::cli
