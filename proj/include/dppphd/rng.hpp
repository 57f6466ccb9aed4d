#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dppphd {

/// Philox4x32-10 counter-based generator.
/// A (seed, run, stream) triple selects an independent, reproducible sequence.
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t seed, std::uint32_t run, std::uint32_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Number of 4-word blocks generated so far.
    [[nodiscard]] std::uint64_t blocks() const { return block_; }

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::uint32_t run_ = 0;
    std::uint32_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Named streams; each experiment component draws from its own.
enum class Stream : std::uint32_t {
    truth = 1,
    sensor = 2,
    filter = 3,
    extraction = 4,
    schedule = 5,
    test = 99,
};

inline Philox make_rng(std::uint64_t seed, std::uint32_t run, Stream s) {
    return Philox(seed, run, static_cast<std::uint32_t>(s));
}

} // namespace dppphd
