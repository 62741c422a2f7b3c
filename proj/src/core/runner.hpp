#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace elrdyn {

// Command-line overrides applied on top of a scenario file.
struct RunOptions {
    std::optional<std::uint64_t> seed;          // replaces mc.seed
    std::string out_dir = ".";                  // outputs land here
    std::optional<std::uint64_t> record_every;  // replaces config.record_every
    bool quiet = false;
    unsigned threads = 1;  // trial concurrency; results identical regardless
};

// Exit codes shared by the runners and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;   // bad config or arguments
inline constexpr int kExitNumeric = 2;  // overflow; partial outputs written
inline constexpr int kExitIo = 3;       // could not write outputs

// Deterministic run of one schedule: trajectory CSV + summary JSON.
int run_simulate(const std::string& config_path, const RunOptions& options);

// Runs every named schedule of the config: one trajectory CSV each plus a
// comparison JSON ranking them by convergence horizon, then flips.
int run_compare(const std::string& config_path, const RunOptions& options);

// Random-matrix ensemble: ensemble CSV + deviation report JSON.
int run_mc(const std::string& config_path, const RunOptions& options);

}  // namespace elrdyn
