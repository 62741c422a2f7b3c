#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace elrdyn {

// Philox 4x32, 10 rounds: a counter-based generator. Every (counter, key)
// pair maps to an independent 128-bit block, so draws are addressable and
// bit-reproducible with no sequential state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Identifies an independent substream. Distinct ids give unrelated draws;
// the same id always reproduces the same values.
struct StreamId {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint64_t layer = 0;  // 0-based position within the trial
};

// 64-bit key derived from a stream id (splitmix64-style finalizers).
std::uint64_t stream_key(const StreamId& id);

// Standard normal draws for one (stream, step_tag) cell, generated lazily
// block by block. step_tag 0 is reserved for initialization draws; the
// gradient draw of step i uses tag i + 1.
class NormalStream {
public:
    NormalStream(const StreamId& id, std::uint64_t step_tag);

    double next();

    // dst[i] += nothing; overwrites n values scaled by `scale`.
    void fill(double* dst, std::size_t n, double scale);

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t step_tag_;
    std::uint64_t block_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace elrdyn
