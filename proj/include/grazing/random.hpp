#pragma once

#include <array>
#include <cstdint>

namespace grazing::rng {

using Counter = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

/// Philox4x64 with 10 rounds (Salmon et al., SC'11).
Counter philox4x64(Counter ctr, Key key);

/// Stream purposes; the tag occupies its own counter word so that
/// different consumers of the same (seed, a, b) never overlap.
enum class Tag : std::uint64_t {
    initial = 1,
    dynamics = 2,
    verification = 3,
    scan = 4,
};

/// Counter-based substream addressed by (seed, tag, a, b). Reproducible and
/// independent of how many other substreams were consumed, which is what lets
/// particle updates run in any order or on any thread.
class Substream {
public:
    Substream(std::uint64_t seed, Tag tag, std::uint64_t a, std::uint64_t b = 0);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }
    /// Unit-rate exponential.
    double exponential();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    Key key_;
    Counter ctr_;
    Counter buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace grazing::rng
