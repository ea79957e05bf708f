#include "doctest.h"

#include "grazing/random.hpp"

#include <cmath>
#include <set>

using namespace grazing::rng;

TEST_CASE("philox4x64-10 reproduces the Random123 known-answer vectors") {
    struct Kat {
        Counter ctr;
        Key key;
        Counter expect;
    };
    const Kat kats[] = {
        {{0, 0, 0, 0}, {0, 0}, {0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL}},
        {{~0ULL, ~0ULL, ~0ULL, ~0ULL},
         {~0ULL, ~0ULL},
         {0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL}},
        {{0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
         {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL},
         {0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL}},
    };
    for (const auto& k : kats) CHECK(philox4x64(k.ctr, k.key) == k.expect);
}

TEST_CASE("substreams are reproducible and separated by address") {
    Substream a(7, Tag::dynamics, 3, 5), b(7, Tag::dynamics, 3, 5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    std::set<std::uint64_t> firsts;
    firsts.insert(Substream(7, Tag::dynamics, 3, 5).next_u64());
    firsts.insert(Substream(8, Tag::dynamics, 3, 5).next_u64());
    firsts.insert(Substream(7, Tag::initial, 3, 5).next_u64());
    firsts.insert(Substream(7, Tag::dynamics, 4, 5).next_u64());
    firsts.insert(Substream(7, Tag::dynamics, 3, 6).next_u64());
    firsts.insert(Substream(7, Tag::dynamics, 5, 3).next_u64());
    CHECK(firsts.size() == 6);
}

TEST_CASE("variate ranges and first moments") {
    Substream s(11, Tag::verification, 0);
    const int n = 200000;
    double su = 0, se = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double e = s.exponential();
        REQUIRE(e >= 0.0);
        se += e;
        const double g = s.normal();
        sn += g;
        sn2 += g * g;
        const auto k = s.below(7);
        REQUIRE(k < 7);
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s.uniform_pos() > 0.0);
}

TEST_CASE("below is uniform over small ranges") {
    Substream s(5, Tag::scan, 1);
    int counts[3] = {0, 0, 0};
    const int n = 90000;
    for (int i = 0; i < n; ++i) ++counts[s.below(3)];
    for (int c : counts) CHECK(std::abs(c - n / 3) < 600);
    CHECK(s.below(1) == 0);
}
