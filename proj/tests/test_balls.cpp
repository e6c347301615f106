#include <doctest.h>

#include <cmath>
#include <limits>

#include "fpp/balls.hpp"
#include "fpp/oracles.hpp"
#include "fpp/rewards.hpp"

using namespace fpp;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

PointCloud cloud_of(const std::vector<Vec>& pts) {
    PointCloud pc;
    pc.d = 2;
    pc.box = Box({-100, -100}, {100, 100});
    for (auto& p : pts) pc.push(p.data());
    return pc;
}

PointCloud random_cloud(Stream& rs, long n, double w, double h) {
    PointCloud pc;
    pc.d = 2;
    pc.box = Box({0, -h}, {w, h});
    for (long i = 0; i < n; ++i) {
        double x[2] = {rs.uniform(0, w), rs.uniform(-h, h)};
        pc.push(x);
    }
    return pc;
}

Path through(const std::vector<Vec>& v) {
    std::vector<bool> in(v.size(), true);
    in.front() = in.back() = false;
    return Path{v, in};
}

double n_dist(const NormSpec& s, const Vec& a, const Vec& b) {
    double z[2] = {a[0] - b[0], a[1] - b[1]};
    return s(z);
}

} // namespace

TEST_CASE("segment clipping examples") {
    NormSpec s(2, 2);
    // epsilon = 1 gives radius 1/2 in the plane
    BooleanModel two(s, cloud_of({{1, 0}, {3, 0}}), 1.0);
    CHECK(two.radius() == doctest::Approx(0.5));
    CHECK(segment_outside_length(two, {0, 0}, {5, 0}) == doctest::Approx(3));
    CHECK(segment_outside_length(two, {0, 5}, {5, 5}) == doctest::Approx(5));
    CHECK(segment_outside_length(two, {0.8, 0.1}, {1.2, -0.1}) == doctest::Approx(0).scale(1));
    // overlapping balls are not double counted
    BooleanModel lap(s, cloud_of({{1, 0}, {1.6, 0}}), 1.0);
    CHECK(segment_outside_length(lap, {0, 0}, {3, 0}) == doctest::Approx(3 - 1.6));
    Stream rs(4, 4);
    for (int i = 0; i < 200; ++i) {
        PointCloud pc = random_cloud(rs, 12, 4, 2);
        BooleanModel m(NormSpec(2, i % 3 == 0 ? 1.0 : i % 3 == 1 ? 2.0 : kInf), pc, rs.uniform(0.01, 0.5));
        Vec a{rs.uniform(0, 4), rs.uniform(-2, 2)}, b{rs.uniform(0, 4), rs.uniform(-2, 2)};
        double t = rs.uniform(0, 1);
        Vec mid{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        double whole = segment_outside_length(m, a, b);
        REQUIRE(whole == doctest::Approx(segment_outside_length(m, a, mid) + segment_outside_length(m, mid, b)));
        REQUIRE(whole <= n_dist(m.spec(), a, b) + 1e-12);
        REQUIRE(whole >= -1e-12);
    }
}

TEST_CASE("ball interval routes agree") {
    NormSpec s(2, 2);
    Stream rs(8, 1);
    int nonempty = 0;
    for (int i = 0; i < 2000; ++i) {
        double a[2] = {rs.uniform(-2, 2), rs.uniform(-2, 2)}, b[2] = {rs.uniform(-2, 2), rs.uniform(-2, 2)};
        double c[2] = {rs.uniform(-1, 1), rs.uniform(-1, 1)};
        double r = rs.uniform(0.05, 1);
        double t0, t1, g0, g1;
        bool q = ball_interval(s, a, b, c, r, t0, t1);
        bool g = ball_interval(s, a, b, c, r, g0, g1, true);
        if (q && g) {
            ++nonempty;
            REQUIRE(std::abs(t0 - g0) <= 1e-7);
            REQUIRE(std::abs(t1 - g1) <= 1e-7);
        } else if (q != g) {
            REQUIRE(std::abs(t1 - t0) <= 1e-6); // tangency
        }
    }
    CHECK(nonempty > 200);
}

TEST_CASE("radius and components") {
    CHECK(BooleanModel(NormSpec(2, 2), cloud_of({}), 0.04).radius() == doctest::Approx(0.1));
    PointCloud c3;
    c3.d = 3;
    c3.box = Box({0, 0, 0}, {1, 1, 1});
    CHECK(BooleanModel(NormSpec(3, 1), c3, 0.008).radius() == doctest::Approx(0.1));

    for (int i = 0; i < 60; ++i) {
        Stream rs(12, i);
        NormSpec s(2, i % 3 == 0 ? 1.0 : i % 3 == 1 ? 2.0 : kInf);
        double eps = rs.uniform(0.01, 0.6);
        PointCloud pc = random_cloud(rs, 40, 5, 2.5);
        BooleanModel m(s, pc, eps);
        std::vector<int> ref = brute_force_components(s, pc, eps);
        for (size_t a = 0; a < pc.size(); ++a)
            for (size_t b = a + 1; b < pc.size(); ++b)
                REQUIRE((m.component(int(a)) == m.component(int(b))) == (ref[a] == ref[b]));
    }
}

TEST_CASE("exhaustive enumeration oracle") {
    SolverOptions complete;
    complete.mode = SolverMode::exact_complete;
    for (double p : Vec{1.0, 2.0, kInf})
        for (double eps : Vec{0.01, 0.25})
            for (int i = 0; i < 12; ++i) {
                Stream rs(37, static_cast<uint64_t>(p == kInf ? 7 : p), static_cast<uint64_t>(eps * 100) * 100 + i);
                NormSpec s(2, p);
                PointCloud pc = random_cloud(rs, static_cast<long>(rs.next_u64() % 11), 3, 1);
                BooleanModel m(s, pc, eps);
                Vec x{0, 0}, y{3, 0};
                double ref = brute_force_balls(m, x, y);
                GeodesicResult a = solve_balls_window(m, x, y, {});
                GeodesicResult b = solve_balls_window(m, x, y, complete);
                REQUIRE(std::abs(a.time - ref) <= 1e-9);
                REQUIRE(std::abs(b.time - ref) <= 1e-9);
                CHECK(std::abs(path_time_balls(m, a.path) - a.time) <= 1e-9);
            }
}

TEST_CASE("balls time is dominated by the norm and dominates rewards") {
    for (int i = 0; i < 150; ++i) {
        Stream rs(19, i);
        NormSpec s(2, i % 3 == 0 ? 1.0 : i % 3 == 1 ? 2.0 : kInf);
        double eps = rs.uniform(0.005, 0.2);
        PointCloud pc = sample_poisson(Box({0, 0}, {6, 6}), 1.0, substream_key(19, 1, i));
        Vec x{rs.uniform(0, 6), rs.uniform(0, 6)}, y{rs.uniform(0, 6), rs.uniform(0, 6)};
        BooleanModel m(s, pc, eps);
        double tb = solve_balls_window(m, x, y, {}).time;
        double tr = solve_rewards_window(s, pc, x, y, eps, {}).time;
        REQUIRE(tb <= n_dist(s, x, y) + 1e-9);
        REQUIRE(tb >= tr - 1e-9);
        REQUIRE(tb >= 0);
    }
}

TEST_CASE("covered length is at most one diameter per ball met") {
    NormSpec s(2, 2);
    for (int i = 0; i < 40; ++i) {
        double eps = 0.02 + 0.005 * i;
        PoissonField f(2, 300 + i);
        GeodesicResult g = geodesic_balls(s, source_of(f), {0, 0}, {20, 0}, eps);
        BooleanModel m(s, f.sample(g.window), eps);
        long met = 0;
        for (size_t c = 0; c < m.cloud().size(); ++c) {
            double t0, t1;
            for (size_t k = 0; k + 1 < g.path.size(); ++k)
                if (ball_interval(s, g.path.vertices[k].data(), g.path.vertices[k + 1].data(), m.cloud().point(c),
                                  m.radius(), t0, t1)) {
                    ++met;
                    break;
                }
        }
        CHECK(g.n_length - g.time <= m.diameter() * met + 1e-9);
    }
}

TEST_CASE("pi check validation") {
    NormSpec s(2, 2);
    // A and B share a component, C is far away
    BooleanModel m(s, cloud_of({{1, 0}, {1.9, 0}, {1.45, 3}}), 1.0);
    Path good = through({{0, 0}, {1, 0}, {1.9, 0}, {3, 0}});
    CHECK(validate_pi_check(m, good).valid);
    Path off = through({{0, 0}, {1, 0.3}, {3, 0}});
    PiCheckReport r1 = validate_pi_check(m, off);
    CHECK_FALSE(r1.valid);
    CHECK(r1.violation == 1);
    Path back = through({{0, 0}, {1, 0}, {1.45, 3}, {1.9, 0}, {3, 0}});
    PiCheckReport r2 = validate_pi_check(m, back);
    CHECK_FALSE(r2.valid);
    CHECK(r2.violation == 2);
    Path fixed = canonicalize_to_pi_check(m, back);
    CHECK(validate_pi_check(m, fixed).valid);
    CHECK(path_time_balls(m, fixed) <= path_time_balls(m, back) + 1e-12);
}

TEST_CASE("canonicalization on geodesics") {
    for (int i = 0; i < 100; ++i) {
        Stream rs(23, i);
        NormSpec s(2, i % 3 == 0 ? 1.0 : i % 3 == 1 ? 2.0 : kInf);
        double eps = rs.uniform(0.01, 0.3);
        PointCloud pc = sample_poisson(Box({-1, -3}, {9, 3}), 1.0, substream_key(23, 2, i));
        BooleanModel m(s, pc, eps);
        GeodesicResult g = solve_balls_window(m, {0, 0}, {8, 0}, {});
        Path c = canonicalize_to_pi_check(m, g.path);
        PiCheckReport rep = validate_pi_check(m, c);
        REQUIRE_MESSAGE(rep.valid, rep.message);
        REQUIRE(path_time_balls(m, c) <= g.time + 1e-9);
        REQUIRE(c.vertices.front() == g.path.vertices.front());
        REQUIRE(c.vertices.back() == g.path.vertices.back());
    }
}

TEST_CASE("travel time is 1-Lipschitz in the endpoint") {
    NormSpec s(2, 2);
    for (int i = 0; i < 80; ++i) {
        Stream rs(29, i);
        double eps = rs.uniform(0.01, 0.3);
        PointCloud pc = sample_poisson(Box({0, 0}, {6, 6}), 1.0, substream_key(29, 3, i));
        BooleanModel m(s, pc, eps);
        Vec x{rs.uniform(0, 6), rs.uniform(0, 6)}, y{rs.uniform(0, 6), rs.uniform(0, 6)};
        Vec x2{x[0] + rs.uniform(-0.3, 0.3), x[1] + rs.uniform(-0.3, 0.3)};
        double a = solve_balls_window(m, x, y, {}).time;
        double b = solve_balls_window(m, x2, y, {}).time;
        REQUIRE(std::abs(a - b) <= n_dist(s, x, x2) + 1e-9);
    }
}

TEST_CASE("overlap diagnostics") {
    NormSpec s(2, 2);
    OverlapDiagnostics sep = overlap_diagnostics(s, through({{0, 0}, {2, 0}, {4, 0}, {6, 0}}), 0.01);
    CHECK(sep.y_count == 0);
    CHECK(sep.z_count == 0);
    OverlapDiagnostics close = overlap_diagnostics(s, through({{0, 0}, {2, 0}, {2.05, 0}, {6, 0}}), 0.01);
    CHECK(close.y_count == 1);
    CHECK(close.z_count == 1);
}

TEST_CASE("serial and parallel solver runs agree") {
    NormSpec s(2, 1);
    BooleanModel m(s, sample_poisson(Box({-3, -5}, {33, 5}), 1, 6), 0.05);
    GeodesicResult a = solve_balls_window(m, {0, 0}, {30, 0}, {}, Exec::serial);
    GeodesicResult b = solve_balls_window(m, {0, 0}, {30, 0}, {}, Exec::parallel);
    CHECK(a.time == b.time);
    CHECK(a.path.vertices == b.path.vertices);
}

TEST_CASE("canonicalization on wandering paths") {
    for (int i = 0; i < 300; ++i) {
        NormSpec s(2, i % 3 == 0 ? 1.0 : i % 3 == 1 ? 2.0 : kInf);
        Stream rs(41, i);
        double eps = rs.uniform(0.05, 0.6);
        PointCloud pc = random_cloud(rs, 25, 5, 2);
        BooleanModel m(s, pc, eps);
        std::vector<Vec> v{{0, 0}};
        for (int k = 0; k < 6; ++k) v.push_back(pc.point_vec(rs.next_u64() % pc.size()));
        v.push_back({5, 0});
        std::vector<Vec> dedup{v.front()};
        for (size_t k = 1; k < v.size(); ++k)
            if (v[k] != dedup.back()) dedup.push_back(v[k]);
        Path wander = through(dedup);
        Path c = canonicalize_to_pi_check(m, wander);
        PiCheckReport rep = validate_pi_check(m, c);
        REQUIRE_MESSAGE(rep.valid, rep.message);
        REQUIRE(path_time_balls(m, c) <= path_time_balls(m, wander) + 1e-9);
    }
}
