#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "core/model.hpp"

namespace elrdyn {

struct Trajectory;  // simulate.hpp

struct SpreadReport {
    double s_rel = 0.0;
    // ln of the ELR ratio between the extreme layers; 0 when all agree.
    double max_log_ratio = 0.0;
    std::size_t argmin_layer = 1;  // 1-based
    std::size_t argmax_layer = 1;  // 1-based
};

// Population standard deviation of ln(e) over the given ELRs. Throws
// ContractError when the list is empty or contains non-positive values.
double s_rel(const std::vector<double>& elrs);

SpreadReport spread_report(const NetworkState& state);

// Number of times the ELR ratio of a layer pair crosses 1 over the recorded
// rows of a trajectory. `pair` is 1-based; by default the extreme-ELR pair
// of the first row, tracked as a fixed pair throughout. Ratios within
// `tolerance` of 1 (in log space) count as exactly 1 and never flip.
std::size_t flip_count(const Trajectory& trajectory,
                       std::optional<std::pair<std::size_t, std::size_t>> pair = std::nullopt,
                       double tolerance = 1e-12);

}  // namespace elrdyn
