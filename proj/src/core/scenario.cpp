#include "core/scenario.hpp"

#include <fstream>

#include "core/errors.hpp"

namespace elrdyn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw ConfigError("config error at " + context + ": " + what);
}

void expect_object(const json& j, const std::string& context) {
    if (!j.is_object()) fail(context, "expected an object");
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) fail(context, "unknown field \"" + key + "\"");
    }
}

double get_double(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) fail(context, std::string("missing field \"") + key + "\"");
    const json& v = j.at(key);
    if (!v.is_number()) fail(context + "." + key, "expected a number");
    return v.get<double>();
}

double get_double_or(const json& j, const char* key, double fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(context + "." + key, "expected a number");
    return v.get<double>();
}

std::uint64_t get_uint(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) fail(context, std::string("missing field \"") + key + "\"");
    const json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(context + "." + key, "expected a non-negative integer");
}

std::uint64_t get_uint_or(const json& j, const char* key, std::uint64_t fallback,
                          const std::string& context) {
    if (!j.contains(key)) return fallback;
    return get_uint(j, key, context);
}

bool get_bool_or(const json& j, const char* key, bool fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(context + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) fail(context, std::string("missing field \"") + key + "\"");
    const json& v = j.at(key);
    if (!v.is_string()) fail(context + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_double_list(const json& v, const std::string& context) {
    if (!v.is_array()) fail(context, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(context + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

ProfileSpec parse_profile(const json& j, const std::string& context) {
    expect_object(j, context);
    reject_unknown_keys(
        j, {"kind", "depth", "alpha", "block_size", "initial_sigma_sq", "c", "sigma_sq"}, context);
    ProfileSpec spec;
    const std::string kind = get_string(j, "kind", context);
    if (kind == "feedforward") {
        spec.kind = ProfileKind::feedforward;
    } else if (kind == "resnet") {
        spec.kind = ProfileKind::resnet;
    } else if (kind == "uniform") {
        spec.kind = ProfileKind::uniform;
    } else if (kind == "explicit") {
        spec.kind = ProfileKind::explicit_values;
    } else {
        fail(context + ".kind", "unknown profile kind \"" + kind + "\"");
    }
    if (j.contains("c")) {
        if (spec.kind != ProfileKind::explicit_values) {
            fail(context + ".c", "only allowed for the explicit profile");
        }
        spec.c = get_double_list(j.at("c"), context + ".c");
    }
    if (spec.kind == ProfileKind::explicit_values && !j.contains("depth")) {
        spec.depth = spec.c.size();
    } else {
        spec.depth = static_cast<std::size_t>(get_uint(j, "depth", context));
    }
    spec.alpha = get_double_or(j, "alpha", default_alpha(), context);
    spec.block_size = static_cast<std::size_t>(get_uint_or(j, "block_size", 2, context));
    spec.initial_sigma_sq = get_double_or(j, "initial_sigma_sq", 2.0, context);
    if (j.contains("sigma_sq")) {
        spec.sigma_sq = get_double_list(j.at("sigma_sq"), context + ".sigma_sq");
    }
    return spec;
}

McConfig parse_mc(const json& j, const std::string& context) {
    expect_object(j, context);
    reject_unknown_keys(
        j, {"rows", "cols", "trials", "seed", "constrain", "renormalize_weights"}, context);
    McConfig mc;
    mc.rows = static_cast<std::size_t>(get_uint_or(j, "rows", 64, context));
    mc.cols = static_cast<std::size_t>(get_uint_or(j, "cols", 64, context));
    mc.trials = static_cast<std::size_t>(get_uint_or(j, "trials", 1, context));
    mc.seed = get_uint_or(j, "seed", 0, context);
    mc.renormalize_weights = get_bool_or(j, "renormalize_weights", false, context);
    if (j.contains("constrain")) {
        const json& c = j.at("constrain");
        const std::string cctx = context + ".constrain";
        expect_object(c, cctx);
        reject_unknown_keys(c, {"e_goal", "epsilon"}, cctx);
        ConstrainPolicy policy;
        policy.e_goal = get_double(c, "e_goal", cctx);
        policy.epsilon = get_double_or(c, "epsilon", 1e-5, cctx);
        mc.constrain = policy;
    }
    return mc;
}

OutputNames parse_outputs(const json& j, const std::string& context) {
    expect_object(j, context);
    reject_unknown_keys(j,
                        {"trajectory_csv", "summary_json", "ensemble_csv", "deviation_json",
                         "comparison_json"},
                        context);
    OutputNames names;
    auto take = [&](const char* key, std::string& slot) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_string() || v.get<std::string>().empty()) {
            fail(context + "." + key, "expected a non-empty string");
        }
        slot = v.get<std::string>();
    };
    take("trajectory_csv", names.trajectory_csv);
    take("summary_json", names.summary_json);
    take("ensemble_csv", names.ensemble_csv);
    take("deviation_json", names.deviation_json);
    take("comparison_json", names.comparison_json);
    return names;
}

}  // namespace

std::unique_ptr<Schedule> schedule_from_json(const nlohmann::json& spec,
                                             const std::string& context) {
    expect_object(spec, context);
    const std::string kind = get_string(spec, "kind", context);
    try {
        if (kind == "constant") {
            reject_unknown_keys(spec, {"kind", "lr"}, context);
            return make_constant(get_double(spec, "lr", context));
        }
        if (kind == "multistep") {
            reject_unknown_keys(spec, {"kind", "lr", "gamma", "milestones"}, context);
            if (!spec.contains("milestones")) fail(context, "missing field \"milestones\"");
            const json& ms = spec.at("milestones");
            if (!ms.is_array()) fail(context + ".milestones", "expected an array of integers");
            std::vector<std::uint64_t> milestones;
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const json& m = ms[i];
                if (m.is_number_unsigned()) {
                    milestones.push_back(m.get<std::uint64_t>());
                } else if (m.is_number_integer() && m.get<std::int64_t>() >= 0) {
                    milestones.push_back(static_cast<std::uint64_t>(m.get<std::int64_t>()));
                } else {
                    fail(context + ".milestones[" + std::to_string(i) + "]",
                         "expected a non-negative integer");
                }
            }
            return make_multistep(get_double(spec, "lr", context),
                                  get_double_or(spec, "gamma", 0.1, context), std::move(milestones));
        }
        if (kind == "cosine") {
            reject_unknown_keys(spec, {"kind", "peak_lr", "total_steps", "final_div_factor"},
                                context);
            return make_cosine(get_double(spec, "peak_lr", context),
                               get_uint(spec, "total_steps", context),
                               get_double_or(spec, "final_div_factor", 2000.0, context));
        }
        if (kind == "linear_warmup") {
            reject_unknown_keys(spec, {"kind", "peak_lr", "warmup_steps", "div_factor"}, context);
            return make_linear_warmup(get_double(spec, "peak_lr", context),
                                      get_uint(spec, "warmup_steps", context),
                                      get_double_or(spec, "div_factor", 20.0, context));
        }
        if (kind == "one_cycle") {
            reject_unknown_keys(spec,
                                {"kind", "peak_lr", "total_steps", "pct_start", "div_factor",
                                 "final_div_factor", "anneal"},
                                context);
            OneCycleParams params;
            params.peak_lr = get_double(spec, "peak_lr", context);
            params.total_steps = get_uint(spec, "total_steps", context);
            params.pct_start = get_double_or(spec, "pct_start", 0.1, context);
            params.div_factor = get_double_or(spec, "div_factor", 20.0, context);
            params.final_div_factor = get_double_or(spec, "final_div_factor", 2000.0, context);
            if (spec.contains("anneal")) {
                const std::string anneal = get_string(spec, "anneal", context);
                if (anneal == "cos") {
                    params.cosine_anneal = true;
                } else if (anneal == "linear") {
                    params.cosine_anneal = false;
                } else {
                    fail(context + ".anneal", "expected \"cos\" or \"linear\"");
                }
            }
            return make_one_cycle(params);
        }
        if (kind == "subcritical_warmup") {
            reject_unknown_keys(spec, {"kind", "safety_factor", "warmup_steps", "after"}, context);
            std::optional<std::uint64_t> warmup;
            if (spec.contains("warmup_steps")) warmup = get_uint(spec, "warmup_steps", context);
            std::unique_ptr<Schedule> after;
            if (spec.contains("after")) {
                after = schedule_from_json(spec.at("after"), context + ".after");
            }
            return make_subcritical(get_double_or(spec, "safety_factor", 1.0, context), warmup,
                                    std::move(after));
        }
        if (kind == "composite") {
            reject_unknown_keys(spec, {"kind", "phases"}, context);
            if (!spec.contains("phases")) fail(context, "missing field \"phases\"");
            const json& phases = spec.at("phases");
            if (!phases.is_array() || phases.empty()) {
                fail(context + ".phases", "expected a non-empty array");
            }
            std::vector<SchedulePhase> parsed;
            for (std::size_t i = 0; i < phases.size(); ++i) {
                const std::string pctx = context + ".phases[" + std::to_string(i) + "]";
                expect_object(phases[i], pctx);
                reject_unknown_keys(phases[i], {"steps", "schedule"}, pctx);
                SchedulePhase phase;
                if (phases[i].contains("steps")) phase.steps = get_uint(phases[i], "steps", pctx);
                if (!phases[i].contains("schedule")) fail(pctx, "missing field \"schedule\"");
                phase.schedule = schedule_from_json(phases[i].at("schedule"), pctx + ".schedule");
                parsed.push_back(std::move(phase));
            }
            return make_composite(std::move(parsed));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(context, e.what());
    }
    fail(context + ".kind", "unknown schedule kind \"" + kind + "\"");
}

ScenarioConfig parse_scenario(const nlohmann::json& j) {
    expect_object(j, "config");
    reject_unknown_keys(j,
                        {"schema", "profile", "model", "schedule", "schedules", "steps",
                         "record_every", "convergence_ratio_tolerance", "mc", "outputs"},
                        "config");
    const std::uint64_t schema = get_uint(j, "schema", "config");
    if (schema != 1) {
        fail("config.schema", "unsupported schema " + std::to_string(schema) + ", expected 1");
    }
    ScenarioConfig config;
    if (!j.contains("profile")) fail("config", "missing field \"profile\"");
    config.profile = parse_profile(j.at("profile"), "config.profile");
    if (j.contains("model")) {
        const json& m = j.at("model");
        expect_object(m, "config.model");
        reject_unknown_keys(m, {"k0", "numeric_tolerance"}, "config.model");
        config.model.k0 = get_double_or(m, "k0", 4.0, "config.model");
        config.model.numeric_tolerance =
            get_double_or(m, "numeric_tolerance", 1e-12, "config.model");
    }
    if (j.contains("schedule")) {
        // Validate eagerly so bad configs fail at parse time.
        schedule_from_json(j.at("schedule"), "config.schedule");
        config.schedule = j.at("schedule");
    }
    if (j.contains("schedules")) {
        const json& list = j.at("schedules");
        if (!list.is_array() || list.empty()) {
            fail("config.schedules", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string sctx = "config.schedules[" + std::to_string(i) + "]";
            expect_object(list[i], sctx);
            reject_unknown_keys(list[i], {"name", "schedule"}, sctx);
            NamedScheduleSpec named;
            named.name = list[i].contains("name") ? get_string(list[i], "name", sctx)
                                                  : "schedule_" + std::to_string(i + 1);
            if (!list[i].contains("schedule")) fail(sctx, "missing field \"schedule\"");
            schedule_from_json(list[i].at("schedule"), sctx + ".schedule");
            named.spec = list[i].at("schedule");
            config.schedules.push_back(std::move(named));
        }
        for (std::size_t a = 0; a < config.schedules.size(); ++a) {
            for (std::size_t b = a + 1; b < config.schedules.size(); ++b) {
                if (config.schedules[a].name == config.schedules[b].name) {
                    fail("config.schedules", "duplicate name \"" + config.schedules[a].name + "\"");
                }
            }
        }
    }
    if (j.contains("steps")) config.steps = get_uint(j, "steps", "config");
    config.record_every = get_uint_or(j, "record_every", 1, "config");
    if (config.record_every < 1) fail("config.record_every", "must be at least 1");
    config.convergence_ratio_tolerance =
        get_double_or(j, "convergence_ratio_tolerance", 1e-9, "config");
    if (j.contains("mc")) config.mc = parse_mc(j.at("mc"), "config.mc");
    if (j.contains("outputs")) config.outputs = parse_outputs(j.at("outputs"), "config.outputs");
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config error in ") + path + ": " + e.what());
    }
    return parse_scenario(j);
}

}  // namespace elrdyn
