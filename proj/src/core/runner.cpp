#include "core/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "core/format.hpp"
#include "core/metrics.hpp"
#include "core/scenario.hpp"
#include "core/simulate.hpp"
#include "core/stochastic.hpp"

namespace elrdyn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_out(const RunOptions& options, const std::string& name) {
    return (fs::path(options.out_dir) / name).string();
}

void ensure_out_dir(const RunOptions& options) {
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + options.out_dir + ": " + ec.message());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed while writing " + path);
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json spread_to_json(const SpreadReport& spread) {
    return json{{"s_rel", spread.s_rel},
                {"max_log_ratio", spread.max_log_ratio},
                {"argmin_elr_layer", spread.argmin_layer},
                {"argmax_elr_layer", spread.argmax_layer}};
}

json failure_to_json(const std::optional<SimFailure>& failure) {
    if (!failure) return nullptr;
    return json{{"step", failure->step}, {"layer", failure->layer}, {"message", failure->message}};
}

struct SimArtifacts {
    SimResult result;
    std::string csv;
    json summary;
};

SimArtifacts run_one_schedule(const ScenarioConfig& config, const nlohmann::json& schedule_spec,
                              const RunOptions& options, const std::string& command) {
    if (!config.steps) {
        throw ConfigError("config error at config.steps: required for " + command);
    }
    const NetworkState initial = make_network(config.profile, config.model);
    const auto schedule = schedule_from_json(schedule_spec);

    SimulateOptions sim_options;
    sim_options.record_every = options.record_every.value_or(config.record_every);
    sim_options.convergence_ratio_tolerance = config.convergence_ratio_tolerance;

    SimArtifacts artifacts;
    artifacts.result = simulate(initial, *schedule, *config.steps, sim_options);

    std::ostringstream csv;
    write_trajectory_csv(artifacts.result.trajectory, csv);
    artifacts.csv = csv.str();

    const SimResult& r = artifacts.result;
    artifacts.summary = json{
        {"schema", 1},
        {"command", command},
        {"layers", initial.depth()},
        {"steps_requested", *config.steps},
        {"steps_completed", r.failure ? r.failure->step : *config.steps},
        {"record_every", sim_options.record_every},
        {"convergence_ratio_tolerance", sim_options.convergence_ratio_tolerance},
        {"convergence_horizon", r.converged_at ? json(*r.converged_at) : json(nullptr)},
        {"total_flips", r.trajectory.flips.size()},
        {"final_spread", spread_to_json(spread_report(r.final_state))},
        {"failure", failure_to_json(r.failure)},
    };
    return artifacts;
}

// "trajectory.csv" + "constant_small" -> "trajectory_constant_small.csv"
std::string with_suffix(const std::string& base, const std::string& name) {
    const fs::path p(base);
    fs::path out = p.parent_path() / (p.stem().string() + "_" + name + p.extension().string());
    return out.string();
}

int guarded(const RunOptions& options, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << e.what() << '\n';
        return kExitIo;
    } catch (const OverflowError& e) {
        std::cerr << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    (void)options;
}

}  // namespace

int run_simulate(const std::string& config_path, const RunOptions& options) {
    return guarded(options, [&]() {
        const ScenarioConfig config = load_scenario(config_path);
        if (!config.schedule) {
            throw ConfigError("config error at config.schedule: required for simulate");
        }
        SimArtifacts artifacts = run_one_schedule(config, *config.schedule, options, "simulate");

        ensure_out_dir(options);
        const std::string csv_path = resolve_out(options, config.outputs.trajectory_csv);
        const std::string summary_path = resolve_out(options, config.outputs.summary_json);
        write_text_file(csv_path, artifacts.csv);
        write_json_file(summary_path, artifacts.summary);

        const SimResult& r = artifacts.result;
        if (!options.quiet) {
            std::cout << "wrote " << csv_path << " (" << r.trajectory.rows.size() << " rows)\n";
            std::cout << "wrote " << summary_path << '\n';
            if (r.converged_at) {
                std::cout << "converged at step " << *r.converged_at;
            } else {
                std::cout << "not converged";
            }
            std::cout << "; flips: " << r.trajectory.flips.size() << '\n';
            if (r.failure) {
                std::cout << "overflow at step " << r.failure->step << ", layer "
                          << r.failure->layer << "; partial trajectory written\n";
            }
        }
        return r.failure ? kExitNumeric : kExitOk;
    });
}

int run_compare(const std::string& config_path, const RunOptions& options) {
    return guarded(options, [&]() {
        const ScenarioConfig config = load_scenario(config_path);
        if (config.schedules.empty()) {
            throw ConfigError("config error at config.schedules: required for compare");
        }

        struct Entry {
            std::string name;
            std::string csv_path;
            SimResult result;
        };
        std::vector<Entry> entries;
        for (const auto& named : config.schedules) {
            SimArtifacts artifacts = run_one_schedule(config, named.spec, options, "compare");
            ensure_out_dir(options);
            const std::string csv_path =
                resolve_out(options, with_suffix(config.outputs.trajectory_csv, named.name));
            write_text_file(csv_path, artifacts.csv);
            entries.push_back(Entry{named.name, csv_path, std::move(artifacts.result)});
        }

        // Rank by convergence horizon (unconverged last), then total flips,
        // then name for a stable order.
        std::vector<std::size_t> order(entries.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& ra = entries[a];
            const auto& rb = entries[b];
            const std::uint64_t ha =
                ra.result.converged_at.value_or(std::numeric_limits<std::uint64_t>::max());
            const std::uint64_t hb =
                rb.result.converged_at.value_or(std::numeric_limits<std::uint64_t>::max());
            if (ha != hb) return ha < hb;
            if (ra.result.trajectory.flips.size() != rb.result.trajectory.flips.size()) {
                return ra.result.trajectory.flips.size() < rb.result.trajectory.flips.size();
            }
            return ra.name < rb.name;
        });

        json results = json::array();
        for (const auto& entry : entries) {
            const SimResult& r = entry.result;
            results.push_back(json{
                {"name", entry.name},
                {"trajectory_csv", fs::path(entry.csv_path).filename().string()},
                {"convergence_horizon", r.converged_at ? json(*r.converged_at) : json(nullptr)},
                {"total_flips", r.trajectory.flips.size()},
                {"final_spread", spread_to_json(spread_report(r.final_state))},
                {"failure", failure_to_json(r.failure)},
            });
        }
        json ranking = json::array();
        for (std::size_t idx : order) ranking.push_back(entries[idx].name);

        const json comparison{
            {"schema", 1}, {"command", "compare"}, {"results", results}, {"ranking", ranking}};
        const std::string comparison_path = resolve_out(options, config.outputs.comparison_json);
        write_json_file(comparison_path, comparison);

        bool failed = false;
        for (const auto& entry : entries) failed = failed || entry.result.failure.has_value();
        if (!options.quiet) {
            for (const auto& entry : entries) {
                std::cout << "wrote " << entry.csv_path << '\n';
            }
            std::cout << "wrote " << comparison_path << '\n';
            std::cout << "ranking:";
            for (std::size_t idx : order) std::cout << ' ' << entries[idx].name;
            std::cout << '\n';
        }
        return failed ? kExitNumeric : kExitOk;
    });
}

int run_mc(const std::string& config_path, const RunOptions& options) {
    return guarded(options, [&]() {
        const ScenarioConfig config = load_scenario(config_path);
        if (!config.schedule) {
            throw ConfigError("config error at config.schedule: required for mc");
        }
        if (!config.mc) {
            throw ConfigError("config error at config.mc: required for mc");
        }
        if (!config.steps) {
            throw ConfigError("config error at config.steps: required for mc");
        }

        const NetworkState initial = make_network(config.profile, config.model);
        const auto schedule = schedule_from_json(*config.schedule);

        McConfig mc = *config.mc;
        if (options.seed) mc.seed = *options.seed;
        mc.record_every = options.record_every.value_or(config.record_every);
        mc.threads = options.threads;

        const McResult result = mc_ensemble(initial, *schedule, *config.steps, mc);
        const std::size_t included = result.trials - result.excluded.size();

        ensure_out_dir(options);
        std::ostringstream csv;
        write_ensemble_csv(result, csv);
        const std::string csv_path = resolve_out(options, config.outputs.ensemble_csv);
        write_text_file(csv_path, csv.str());

        json excluded = json::array();
        for (const auto& f : result.excluded) {
            excluded.push_back(json{{"trial", f.trial}, {"step", f.step}, {"layer", f.layer}});
        }
        const json deviation{
            {"schema", 1},
            {"command", "mc"},
            {"layers", initial.depth()},
            {"steps", *config.steps},
            {"rows", mc.rows},
            {"cols", mc.cols},
            {"trials", mc.trials},
            {"seed", mc.seed},
            {"record_every", mc.record_every},
            {"renormalize_weights", mc.renormalize_weights},
            {"constrain", mc.constrain ? json{{"e_goal", mc.constrain->e_goal},
                                              {"epsilon", mc.constrain->epsilon}}
                                       : json(nullptr)},
            {"included_trials", included},
            {"excluded_trials", excluded},
            {"max_orthogonality_error", result.max_ortho_error},
            {"deviation",
             json{{"max_rel_dev_wnorm_sq", result.deviation.max_rel_dev},
                  {"at_step", result.deviation.rel_step},
                  {"at_layer", result.deviation.rel_layer},
                  {"max_abs_z_wnorm_sq", result.deviation.max_abs_z},
                  {"z_at_step", result.deviation.z_step},
                  {"z_at_layer", result.deviation.z_layer}}},
        };
        const std::string deviation_path = resolve_out(options, config.outputs.deviation_json);
        write_json_file(deviation_path, deviation);

        if (!options.quiet) {
            std::cout << "wrote " << csv_path << '\n';
            std::cout << "wrote " << deviation_path << '\n';
            std::cout << "trials: " << included << '/' << mc.trials
                      << " included; max relative deviation: "
                      << format_double(result.deviation.max_rel_dev) << '\n';
            if (!result.excluded.empty()) {
                std::cout << result.excluded.size() << " trial(s) overflowed and were excluded\n";
            }
        }
        return included == 0 ? kExitNumeric : kExitOk;
    });
}

}  // namespace elrdyn
