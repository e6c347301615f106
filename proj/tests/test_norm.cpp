#include <doctest.h>

#include <cmath>
#include <limits>

#include "fpp/norm.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("norm values") {
    CHECK(norm_eval(NormSpec(2, 2), {3, 4}) == doctest::Approx(5).epsilon(1e-15));
    CHECK(norm_eval(NormSpec(2, 1), {1, -1}) == 2);
    CHECK(norm_eval(NormSpec(3, kInf), {1, -3, 2}) == 3);
    CHECK(norm_eval(NormSpec(2, 3), {1, 1}) == doctest::Approx(std::cbrt(2.0)));
    // large p stays finite through max-factoring
    CHECK(norm_eval(NormSpec(2, 400), {1e200, 1e200}) == doctest::Approx(1e200 * std::pow(2.0, 1.0 / 400)));
}

TEST_CASE("norm argument checks") {
    CHECK_THROWS_AS(norm_eval(NormSpec(2, 2), {1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(NormSpec(1, 2), InvalidArgument);
    CHECK_THROWS_AS(NormSpec(2, 0.5), InvalidArgument);
    CHECK(std::isinf(parse_p("inf")));
    CHECK(std::isinf(parse_p("Infinity")));
    CHECK(parse_p("1.5") == 1.5);
    CHECK_THROWS_AS(parse_p("0.9"), InvalidArgument);
    CHECK_THROWS_AS(parse_p("2x"), InvalidArgument);
    CHECK(NormSpec(2, 1.5).p_rational() == Rational(3, 2));
    CHECK_THROWS_AS(NormSpec(2, kInf).p_rational(), InvalidArgument);
}

TEST_CASE("triangle inequality and homogeneity fuzz") {
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
        for (int d : {2, 3}) {
            NormSpec spec(d, p);
            Stream rs(5, static_cast<uint64_t>(p == kInf ? 99 : p * 10), d);
            for (int i = 0; i < 10000; ++i) {
                Vec x(d), y(d), s(d);
                for (int k = 0; k < d; ++k) {
                    x[k] = rs.normal() * 3;
                    y[k] = rs.normal() * 3;
                    s[k] = x[k] + y[k];
                }
                REQUIRE(spec(s) <= spec(x) + spec(y) + 1e-12);
                double c = rs.uniform(-5, 5);
                Vec cx = x;
                for (double& v : cx) v *= c;
                REQUIRE(spec(cx) == doctest::Approx(std::abs(c) * spec(x)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("equivalence radii bracket the unit ball") {
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
        NormSpec spec(3, p);
        Stream rs(8, 1);
        for (int i = 0; i < 2000; ++i) {
            Vec x{rs.normal(), rs.normal(), rs.normal()};
            double e = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            // B_2(alpha) inside B_N(1) inside B_2(beta)
            CHECK(spec(x) <= e / spec.alpha() + 1e-12);
            CHECK(e <= spec.beta() * spec(x) + 1e-12);
        }
    }
}

TEST_CASE("rational conversion") {
    CHECK(to_rational(0.75) == Rational(3, 4));
    CHECK(to_rational(1.0 / 3) == Rational(1, 3));
    CHECK(to_double(Rational(2, 3)) == doctest::Approx(2.0 / 3));
}
