#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fpp/parallel.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

TEST_CASE("philox known answers") {
    auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(a == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b == std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and separated") {
    Stream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
    for (int i = 0; i < 100; ++i) {
        uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    Stream u(9, 0);
    for (int i = 0; i < 10000; ++i) {
        double v = u.uniform();
        REQUIRE(v >= 0);
        REQUIRE(v < 1);
        // 53-bit grid
        REQUIRE(std::ldexp(v, 53) == std::floor(std::ldexp(v, 53)));
    }
}

TEST_CASE("poisson sampler moments") {
    for (double mean : {0.5, 4.0, 30.0, 1000.0}) {
        Stream rs(3, static_cast<uint64_t>(mean * 10));
        const int n = 40000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            double k = double(rs.poisson(mean));
            s += k;
            s2 += k * k;
        }
        double m = s / n, var = s2 / n - m * m;
        CHECK(std::abs(m - mean) <= 4 * std::sqrt(mean / n));
        CHECK(var == doctest::Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("for_each_index serial and parallel agree") {
    std::vector<double> a(1000), b(1000);
    auto f = [](std::vector<double>& out) {
        return [&out](long long i) {
            Stream rs(11, static_cast<uint64_t>(i));
            out[i] = rs.normal();
        };
    };
    for_each_index(1000, Exec::serial, f(a));
    for_each_index(1000, Exec::parallel, f(b));
    CHECK(a == b);
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
    std::atomic<int> calls{0};
    try {
        for_each_index(64, Exec::parallel, [&](long long i) {
            ++calls;
            if (i == 40 || i == 17) throw std::runtime_error("idx " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "idx 17");
    }
    CHECK(calls == 64);
}
