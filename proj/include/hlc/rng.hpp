#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hlc {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Identifies one independent stream: replicate `replicate` of experiment `experiment`.
struct StreamId {
    std::uint64_t root_seed = 0;
    std::uint32_t experiment = 0;
    std::uint32_t replicate = 0;
};

/**
 * Counter-based generator. Output is a pure function of (StreamId, draw index),
 * so replicates can run on any thread in any order.
 * Satisfies UniformRandomBitGenerator.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(StreamId id) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

/// Deterministic 32-bit tag from a string, for naming experiments.
std::uint32_t experiment_tag(const char* name) noexcept;

} // namespace hlc
