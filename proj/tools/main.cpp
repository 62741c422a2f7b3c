// elrdyn: run learning-rate dynamics scenarios from JSON configs.
//
// Thin wrapper over the shared library's C interface; all real work happens
// behind elrdyn_run_*. Exit codes: 0 ok, 1 config error, 2 numerical
// failure (partial outputs written), 3 I/O error.

#include <cstdint>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "elrdyn/elrdyn.h"

namespace {

int to_exit_code(elrdyn_status status) {
    switch (status) {
        case ELRDYN_OK:
            return 0;
        case ELRDYN_ERR_INVALID_ARG:
        case ELRDYN_ERR_CONFIG:
            return 1;
        case ELRDYN_ERR_NUMERIC:
            return 2;
        case ELRDYN_ERR_IO:
            return 3;
        default:
            return 4;
    }
}

unsigned threads_from_env() {
    const char* raw = std::getenv("ELRDYN_THREADS");
    if (!raw) return 1;
    const long value = std::strtol(raw, nullptr, 10);
    return value > 0 ? static_cast<unsigned>(value) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layer-wise learning-rate dynamics simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(elrdyn_version()));

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::uint64_t record_every = 0;
    bool quiet = false;

    bool has_seed = false;
    bool has_record_every = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "scenario config (JSON)")->required();
        cmd->add_option("--out-dir", out_dir, "directory for output files (default: .)");
        cmd->add_option("--seed", seed, "override the config's mc seed")
            ->each([&](const std::string&) { has_seed = true; });
        cmd->add_option("--record-every", record_every, "record every n-th step")
            ->check(CLI::PositiveNumber)
            ->each([&](const std::string&) { has_record_every = true; });
        cmd->add_flag("--quiet", quiet, "suppress progress output");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run one schedule deterministically");
    CLI::App* compare = app.add_subcommand("compare", "run every named schedule and rank them");
    CLI::App* mc = app.add_subcommand("mc", "run the random-matrix ensemble");
    add_common(simulate);
    add_common(compare);
    add_common(mc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Normalize CLI11's exit codes: usage errors are config errors (1),
        // --help and --version stay 0.
        return app.exit(e) == 0 ? 0 : 1;
    }

    elrdyn_run_options options{};
    options.out_dir = out_dir.c_str();
    options.has_seed = has_seed ? 1 : 0;
    options.seed = seed;
    options.has_record_every = has_record_every ? 1 : 0;
    options.record_every = record_every;
    options.quiet = quiet ? 1 : 0;
    options.threads = threads_from_env();

    elrdyn_status status = ELRDYN_ERR_INTERNAL;
    if (simulate->parsed()) {
        status = elrdyn_run_simulate(config_path.c_str(), &options);
    } else if (compare->parsed()) {
        status = elrdyn_run_compare(config_path.c_str(), &options);
    } else if (mc->parsed()) {
        status = elrdyn_run_mc(config_path.c_str(), &options);
    }
    return to_exit_code(status);
}
