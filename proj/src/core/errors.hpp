#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace elrdyn {

// Bad user input: malformed config, invalid profile, impossible request.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: a precondition the caller controls was violated.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// A state update produced a non-finite value. `step` is the step that was
// being applied, `layer` the offending layer (1-based, as in all reports).
class OverflowError : public std::runtime_error {
public:
    OverflowError(std::uint64_t step, std::size_t layer)
        : std::runtime_error("non-finite value at step " + std::to_string(step) +
                             ", layer " + std::to_string(layer)),
          step(step),
          layer(layer) {}

    std::uint64_t step;
    std::size_t layer;
};

// Filesystem trouble while writing results.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace elrdyn
