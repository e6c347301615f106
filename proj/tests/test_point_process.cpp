#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fpp/point_process.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("sampling contract") {
    CHECK_THROWS_AS(sample_poisson(Box({0, 0}, {0, 1}), 1, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_poisson(Box({0, 0}, {1, 1}), 0, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_poisson(Box({0, 0}, {1e5, 1e5}), 1, 1), TooLarge);
    Box box({0, 0}, {10, 10});
    PointCloud a = sample_poisson(box, 1, 42), b = sample_poisson(box, 1, 42), c = sample_poisson(box, 1, 43);
    CHECK(a.coords == b.coords);
    CHECK(a.coords != c.coords);
    for (size_t i = 0; i < a.size(); ++i) CHECK(box.contains(a.point(i)));
}

TEST_CASE("mean count equals the box volume") {
    Box box({0, 0}, {10, 10});
    double total = 0;
    for (int s = 0; s < 10000; ++s) total += double(sample_poisson(box, 1, substream_key(77, s)).size());
    CHECK(std::abs(total / 10000 - 100) <= 0.3);
}

TEST_CASE("field windows are consistent") {
    PoissonField f(2, 5);
    PointCloud big = f.sample(Box({-7, -7}, {9, 9}));
    Box small({-1.3, 0.2}, {3.7, 4.1});
    PointCloud part = f.sample(small);
    std::vector<Vec> expect;
    for (size_t i = 0; i < big.size(); ++i)
        if (small.contains(big.point(i))) expect.push_back(big.point_vec(i));
    std::vector<Vec> got;
    for (size_t i = 0; i < part.size(); ++i) got.push_back(part.point_vec(i));
    std::sort(expect.begin(), expect.end());
    std::sort(got.begin(), got.end());
    CHECK(got == expect);
}

TEST_CASE("index queries match a linear scan") {
    for (double p : {1.0, 2.0, 3.0, kInf}) {
        NormSpec spec(2, p);
        PointCloud pc = sample_poisson(Box({0, 0}, {20, 12}), 1.3, 8);
        for (double cell : {0.7, 1.0, 3.0}) {
            SpatialIndex idx = build_index(pc, cell);
            Stream rs(4, static_cast<uint64_t>(cell * 10), static_cast<uint64_t>(p == kInf ? 9 : p));
            for (int q = 0; q < 1000; ++q) {
                Vec a{rs.uniform(-2, 22), rs.uniform(-2, 14)}, b{rs.uniform(-2, 22), rs.uniform(-2, 14)};
                double r = rs.uniform(0, 3);
                std::vector<int> ball, tube;
                for (size_t i = 0; i < pc.size(); ++i) {
                    if (spec.dist(a.data(), pc.point(i)) <= r) ball.push_back(static_cast<int>(i));
                    if (segment_distance(spec, a.data(), b.data(), pc.point(i)) <= r) tube.push_back(static_cast<int>(i));
                }
                REQUIRE(query_ball(idx, spec, a, r) == ball);
                REQUIRE(query_segment_tube(idx, spec, a, b, r) == tube);
            }
        }
    }
}

TEST_CASE("segment distance is the exact minimum") {
    NormSpec spec(2, 2);
    double t = -1;
    double a[2] = {0, 0}, b[2] = {4, 0}, x[2] = {1, 3}, y[2] = {-3, 4};
    CHECK(segment_distance(spec, a, b, x, &t) == doctest::Approx(3));
    CHECK(t == doctest::Approx(0.25));
    CHECK(segment_distance(spec, a, b, y) == doctest::Approx(5));
    // against a fine scan for other norms
    for (double p : {1.0, 1.7, kInf}) {
        NormSpec s(2, p);
        double best = kInf;
        for (int k = 0; k <= 100000; ++k) {
            double tt = k / 100000.0, z[2] = {4 * tt - 1, -3};
            best = std::min(best, s(z));
        }
        CHECK(segment_distance(s, a, b, x) == doctest::Approx(best).epsilon(1e-6));
    }
}

TEST_CASE("edge cases") {
    NormSpec spec(2, 2);
    PointCloud empty;
    empty.d = 2;
    empty.box = Box({0, 0}, {1, 1});
    SpatialIndex e = build_index(empty);
    CHECK(query_ball(e, spec, {0.5, 0.5}, 10).empty());
    CHECK(query_segment_tube(e, spec, {0, 0}, {1, 1}, 10).empty());

    PointCloud pc = sample_poisson(Box({0, 0}, {5, 5}), 1, 3);
    SpatialIndex idx = build_index(pc);
    CHECK(query_ball(idx, spec, pc.point_vec(2), 0) == std::vector<int>{2});
    CHECK(query_ball(idx, spec, {-1, -1}, 0).empty());
}

TEST_CASE("cloud text round trip") {
    PointCloud pc = sample_poisson(Box({0, 0, 0}, {3, 3, 3}), 1, 12);
    std::stringstream ss;
    dump_cloud(ss, pc);
    PointCloud back = load_cloud(ss);
    CHECK(back.coords == pc.coords);
    CHECK(back.seed == pc.seed);
}
