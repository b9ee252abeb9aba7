#include "hlc/rng.hpp"

namespace hlc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0;
        std::uint32_t lo0;
        std::uint32_t hi1;
        std::uint32_t lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterRng::CounterRng(StreamId id) noexcept
    : key_{static_cast<std::uint32_t>(id.root_seed), static_cast<std::uint32_t>(id.root_seed >> 32)},
      counter_{0U, 0U, id.replicate, id.experiment} {}

void CounterRng::refill() noexcept {
    block_ = philox4x32_10(counter_, key_);
    if (++counter_[0] == 0U) {
        ++counter_[1];
    }
    used_ = 0;
}

CounterRng::result_type CounterRng::operator()() noexcept {
    if (used_ >= 4) {
        refill();
    }
    const std::uint64_t v = static_cast<std::uint64_t>(block_[used_]) << 32 | block_[used_ + 1];
    used_ += 2;
    return v;
}

std::uint32_t experiment_tag(const char* name) noexcept {
    // FNV-1a
    std::uint32_t h = 2166136261U;
    for (const char* c = name; *c != '\0'; ++c) {
        h ^= static_cast<unsigned char>(*c);
        h *= 16777619U;
    }
    return h;
}

} // namespace hlc
