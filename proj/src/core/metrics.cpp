#include "core/metrics.hpp"

#include <cmath>
#include <string>

#include "core/simulate.hpp"

namespace elrdyn {

double s_rel(const std::vector<double>& elrs) {
    if (elrs.empty()) {
        throw ContractError("s_rel needs at least one ELR");
    }
    std::vector<double> logs(elrs.size());
    for (std::size_t i = 0; i < elrs.size(); ++i) {
        if (!(std::isfinite(elrs[i]) && elrs[i] > 0.0)) {
            throw ContractError("s_rel: ELR " + std::to_string(i + 1) +
                                " must be positive and finite");
        }
        logs[i] = std::log(elrs[i]);
    }
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    double var = 0.0;
    for (double v : logs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(logs.size());
    return std::sqrt(var);
}

SpreadReport spread_report(const NetworkState& state) {
    validate_network(state);
    const auto [lo, hi] = extreme_elr_pair(state);
    SpreadReport report;
    report.argmin_layer = lo + 1;
    report.argmax_layer = hi + 1;
    report.max_log_ratio = std::log(elr(state.layers[hi])) - std::log(elr(state.layers[lo]));
    std::vector<double> elrs(state.depth());
    for (std::size_t i = 0; i < state.depth(); ++i) elrs[i] = elr(state.layers[i]);
    report.s_rel = s_rel(elrs);
    return report;
}

std::size_t flip_count(const Trajectory& trajectory,
                       std::optional<std::pair<std::size_t, std::size_t>> pair,
                       double tolerance) {
    if (trajectory.rows.empty()) return 0;
    std::size_t j, k;
    if (pair) {
        j = pair->first;
        k = pair->second;
        if (j < 1 || j > trajectory.num_layers || k < 1 || k > trajectory.num_layers) {
            throw ContractError("flip_count: layer pair out of range");
        }
        --j;
        --k;
    } else {
        const auto& first = trajectory.rows.front().elr;
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 1; i < first.size(); ++i) {
            if (first[i] < first[lo]) lo = i;
            if (first[i] > first[hi]) hi = i;
        }
        j = hi;
        k = lo;
    }

    std::size_t count = 0;
    int last_sign = 0;  // sign of ln(elr_j / elr_k), 0 inside the tolerance band
    for (const auto& row : trajectory.rows) {
        const double log_ratio = std::log(row.elr[j]) - std::log(row.elr[k]);
        const int sign = log_ratio > tolerance ? 1 : (log_ratio < -tolerance ? -1 : 0);
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) ++count;
            last_sign = sign;
        }
    }
    return count;
}

}  // namespace elrdyn
