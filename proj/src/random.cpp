#include "grazing/random.hpp"

#include <cmath>
#include <numbers>

namespace grazing::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ using u128 = unsigned __int128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const u128 p = static_cast<u128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

// splitmix64 finalizer, used to spread user seeds over the key space.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Counter philox4x64(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

Substream::Substream(std::uint64_t seed, Tag tag, std::uint64_t a, std::uint64_t b)
    : key_{mix(seed), mix(~seed)}, ctr_{0, a, b, static_cast<std::uint64_t>(tag)} {}

std::uint64_t Substream::next_u64() {
    if (pos_ == 4) {
        buf_ = philox4x64(ctr_, key_);
        ++ctr_[0];
        pos_ = 0;
    }
    return buf_[pos_++];
}

double Substream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Substream::exponential() { return -std::log(uniform_pos()); }

double Substream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

std::uint64_t Substream::below(std::uint64_t n) {
    // Multiply-shift; the bias is at most n / 2^64.
    std::uint64_t hi, lo;
    mulhilo(next_u64(), n, hi, lo);
    return hi;
}

}  // namespace grazing::rng
