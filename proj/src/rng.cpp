#include "dppphd/rng.hpp"

namespace dppphd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

} // namespace

Philox::Philox(std::uint64_t seed, std::uint32_t run, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      run_(run),
      stream_(stream) {}

void Philox::refill() {
    buf_ = philox_block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), stream_, run_},
                        key_);
    ++block_;
    pos_ = 0;
}

Philox::result_type Philox::operator()() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

double Philox::uniform01() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return static_cast<double>(hi * 67108864u + lo) * (1.0 / 9007199254740992.0);
}

} // namespace dppphd
