#include <doctest.h>

#include <cmath>
#include <limits>

#include "fpp/geometry.hpp"
#include "fpp/oracles.hpp"

using namespace fpp;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool within(const VolumeEstimate& v, double exact, double k = 3) { return std::abs(v.value - exact) <= k * v.std_err; }

} // namespace

TEST_CASE("support data case table") {
    {
        Direction d = support_data(NormSpec(2, 2), {1, 0});
        CHECK(d.u_star[0] == doctest::Approx(1));
        CHECK(d.u_star[1] == doctest::Approx(0));
        CHECK(d.d1 == 1);
        CHECK(d.d2 == 1);
    }
    {
        Direction d = support_data(NormSpec(2, 1), {0.5, 0.5});
        CHECK(d.u_star[0] == doctest::Approx(1));
        CHECK(d.u_star[1] == doctest::Approx(1));
        CHECK(d.d1 == 2);
        CHECK(d.d2 == 0);
    }
    {
        Direction d = support_data(NormSpec(2, kInf), {1, 1});
        CHECK(d.u_star[0] == doctest::Approx(0.5));
        CHECK(d.u_star[1] == doctest::Approx(0.5));
        CHECK(d.d3 == 2);
        CHECK(d.d4 == 0);
    }
    CHECK_THROWS_AS(support_data(NormSpec(2, 2), {0, 0}), InvalidArgument);
}

TEST_CASE("direction invariants on random directions") {
    Stream rs(21, 0);
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
        for (int d : {2, 3}) {
            NormSpec spec(d, p);
            for (int t = 0; t < 8; ++t) {
                Vec u(d);
                for (auto& x : u) x = rs.normal();
                if (t == 0) u.assign(d, 1.0); // all coordinates maximal
                if (t == 1) {
                    u.assign(d, 0.0);
                    u[d - 1] = -2;
                }
                Direction dir = support_data(spec, u);
                CHECK(std::abs(spec(dir.u) - 1) <= 1e-12);
                CHECK(dot(dir.u, dir.u_star) == doctest::Approx(1).epsilon(1e-12));
                REQUIRE(static_cast<int>(dir.h_basis.size()) == d - 1);
                for (size_t i = 0; i < dir.h_basis.size(); ++i) {
                    CHECK(std::abs(dot(dir.h_basis[i], dir.u_star)) <= 1e-12);
                    for (size_t j = 0; j < dir.h_basis.size(); ++j)
                        CHECK(std::abs(dot(dir.h_basis[i], dir.h_basis[j]) - (i == j)) <= 1e-12);
                }
                CHECK(dir.d1 + dir.d2 == d);
                CHECK(dir.d3 + dir.d4 == d);
                double n2 = dir.u_star_norm2();
                CHECK(n2 >= 1 / spec.beta() - 1e-12);
                CHECK(n2 <= 1 / spec.alpha() + 1e-12);
                // supporting hyperplane: N(u + v) >= 1 on H
                for (int k = 0; k < 1000; ++k) {
                    Vec v = dir.u;
                    double scale = std::exp(rs.uniform(-6, 2));
                    for (auto& b : dir.h_basis) {
                        double c = rs.normal() * scale;
                        for (int i = 0; i < d; ++i) v[i] += c * b[i];
                    }
                    REQUIRE(spec(v) >= 1 - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("exponent examples") {
    Exponents a = exponents(NormSpec(2, 2), Vec{0.3, -0.7});
    CHECK(a.kappa == Rational(2, 3));
    Exponents b = exponents(NormSpec(2, 1), Vec{0.5, 0.5});
    CHECK(b.kappa == Rational(1, 2));
    CHECK(b.gamma == Rational(0));
    CHECK(b.flat_edge);
    Exponents c = exponents(NormSpec(2, kInf), Vec{1, 0});
    CHECK(c.kappa == Rational(1, 2));
    CHECK(c.gamma == Rational(0));
    CHECK(c.flat_edge);
    Exponents e = exponents(NormSpec(3, 3), Vec{1, 0, 0});
    CHECK(e.gamma == Rational(2, 3));
    CHECK(e.kappa == Rational(3, 7));
    CHECK_FALSE(e.flat_edge);
    for (double p : {1.0, 1.25, 2.0, 4.0, kInf}) {
        Exponents x = exponents(NormSpec(3, p), Vec{1, 0.5, 0});
        CHECK(x.kappa == Rational(1) / (Rational(3) - x.gamma));
        CHECK(x.kappa <= Rational(1));
    }
}

TEST_CASE("analytic cap volumes") {
    MCParams mc{100000, 3};
    {
        NormSpec s(2, 1);
        CHECK(within(k_volume(s, support_data(s, {1, 0}), 0.1, mc), 0.2));
    }
    {
        NormSpec s(2, 2);
        Direction d = support_data(s, {1, 0});
        VolumeEstimate k = k_volume(s, d, 0.1, mc);
        CHECK(within(k, 2 * std::sqrt(0.21)));
        // symmetric cap
        CHECK(m_volume(s, d, 0.1, mc).value == doctest::Approx(k.value).epsilon(1e-12));
    }
    {
        NormSpec s(2, kInf);
        CHECK(within(k_volume(s, support_data(s, {1, 1}), 0.1, mc), 0.2 * std::sqrt(2.0)));
    }
    CHECK_THROWS_AS(k_volume(NormSpec(2, 2), support_data(NormSpec(2, 2), {1, 0}), 0, mc), InvalidArgument);
}

TEST_CASE("m_volume against a one-dimensional membership scan") {
    NormSpec s(2, 1);
    Direction d = support_data(s, {2.0 / 3, 1.0 / 3});
    const double eta = 0.1;
    // H is spanned by (1,-1)/sqrt 2; scan t and keep points in K and -K
    const Vec& u = d.u;
    auto in_k = [&](double t) {
        Vec v{u[0] + t / std::sqrt(2.0), u[1] - t / std::sqrt(2.0)};
        return s(v) <= 1 + eta;
    };
    const double h = 1e-6;
    double m = 0, k = 0;
    for (double t = -3; t < 3; t += h) {
        bool a = in_k(t), b = in_k(-t);
        k += a * h;
        m += (a && b) * h;
    }
    MCParams mc{200000, 4};
    VolumeEstimate mv = m_volume(s, d, eta, mc);
    VolumeEstimate kv = k_volume(s, d, eta, mc);
    CHECK(std::abs(mv.value - m) <= 3 * mv.std_err + 1e-5);
    CHECK(std::abs(kv.value - k) <= 3 * kv.std_err + 1e-5);
    CHECK(mv.value > 0);
    CHECK(mv.value <= kv.value);
}

TEST_CASE("M inside K on mixed cases") {
    MCParams mc{50000, 6};
    for (double p : {1.0, 1.5, 3.0, kInf})
        for (const Vec& u : {Vec{1, 0.3, 0}, Vec{0.2, 1, 0.7}}) {
            NormSpec s(3, p);
            Direction d = support_data(s, u);
            for (double eta : {0.05, 0.3}) {
                VolumeEstimate k = k_volume(s, d, eta, mc), m = m_volume(s, d, eta, mc);
                CHECK(m.value <= k.value + 3 * std::hypot(k.std_err, m.std_err));
            }
        }
}

TEST_CASE("h profile and inverses") {
    NormSpec s(2, 1);
    Direction d = support_data(s, {1, 0});
    HProfile prof = h_profile(s, d, default_eta_grid(), {100000, 9});
    // |K_eta| = 2 eta exactly for this direction, so h = 2 / eta
    CHECK(prof.h_at(0.1) == doctest::Approx(20).epsilon(0.02));
    for (size_t i = 0; i + 1 < prof.eta.size(); ++i) CHECK(prof.h_iso[i] >= prof.h_iso[i + 1]);
    for (size_t i = 0; i < prof.eta.size(); ++i) {
        Inverse g = prof.g(prof.h_iso[i]);
        CHECK(std::abs(g.value - prof.eta[i]) <= 1e-4 * prof.eta[i]);
        CHECK(g.bracket <= 1e-6);
    }
    Inverse r = prof.g(prof.h_at(0.1));
    CHECK(r.value == doctest::Approx(0.1).epsilon(1e-5));
    try {
        prof.g(1e9);
        FAIL("expected out-of-range");
    } catch (const OutOfRange& e) {
        CHECK(e.lo == doctest::Approx(prof.h_iso.back()));
        CHECK(e.hi == doctest::Approx(prof.h_iso.front()));
    }
    CHECK_THROWS_AS(h_profile(s, d, {0.2, 0.1}, {}), InvalidArgument);
}

TEST_CASE("p=2 h is strictly decreasing") {
    NormSpec s(2, 2);
    HProfile prof = h_profile(s, support_data(s, {1, 0}), {0.01, 0.03, 0.1, 0.3, 1}, {100000, 2});
    for (size_t i = 0; i + 1 < prof.h.size(); ++i) CHECK(prof.h[i] > prof.h[i + 1]);
}

TEST_CASE("integral I against quadrature") {
    NormSpec s(2, 2);
    Direction d = support_data(s, {1, 0});
    const double eta = 0.5;
    IntegralEstimate est = integral_I(s, d, eta, {200000, 13});
    auto f = [&](double x, double y) { return std::exp(-(std::hypot(x, y) - (1 - eta) * x)); };
    const long n = 3000;
    double full = trapezoid([&](double x) { return trapezoid([&](double y) { return f(x, y); }, -30, 30, n); }, -30, 30,
                            n);
    double half = trapezoid([&](double x) { return trapezoid([&](double y) { return f(x, y); }, -30, 30, n); }, 0, 30,
                            n / 2);
    CHECK(std::abs(est.i - full) <= 3 * est.i_err);
    CHECK(std::abs(est.i_plus - half) <= 3 * est.i_plus_err);
    CHECK(est.i >= est.i_plus);
    CHECK(est.i_plus >= 0);
    CHECK_THROWS_AS(integral_I(s, d, 1.0, {}), InvalidArgument);
    CHECK_THROWS_AS(integral_I(s, d, 0.0, {}), InvalidArgument);
}

TEST_CASE("I plus over h stays in a band") {
    NormSpec s(2, 2);
    Direction d = support_data(s, {1, 0});
    HProfile prof = h_profile(s, d, {0.05, 0.1, 0.2}, {100000, 4});
    double lo = kInf, hi = 0;
    for (size_t i = 0; i < 3; ++i) {
        IntegralEstimate e = integral_I(s, d, prof.eta[i], {100000, 5 + i});
        double r = e.i_plus / prof.h[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo <= 10);
}

TEST_CASE("scaling maps") {
    {
        NormSpec s(2, 2);
        ScalingMap m = scaling_map(s, support_data(s, {1, 0}), 0.01);
        CHECK(std::abs(m.det - 1) <= 1e-12);
        CHECK(std::abs(determinant(m.matrix, 2) - 1) <= 1e-12);
        ScalingMap id = scaling_map(s, support_data(s, {1, 0}), 1.0);
        CHECK(id.matrix == Vec{1, 0, 0, 1});
    }
    {
        NormSpec s(3, 1);
        ScalingMap m = scaling_map(s, support_data(s, {0.5, 0.5, 0}), 0.1);
        CHECK(std::abs(m.det - 1) <= 1e-12);
    }
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
        NormSpec s(3, p);
        ScalingMap m = scaling_map(s, support_data(s, {1, 0, 0}), 0.05);
        CHECK(std::abs(m.det - 1) <= 1e-12);
    }
    {
        NormSpec s(2, kInf);
        CHECK(std::abs(scaling_map(s, support_data(s, {1, 1}), 0.2).det - 1) <= 1e-12);
    }
    CHECK_THROWS_AS(scaling_map(NormSpec(3, kInf), support_data(NormSpec(3, kInf), {1, 1, 1}), 0.1), UnsupportedCase);
    CHECK_THROWS_AS(scaling_map(NormSpec(2, 3), support_data(NormSpec(2, 3), {1, 1}), 0.1), UnsupportedCase);
}

TEST_CASE("volume estimates do not depend on the executor") {
    NormSpec s(3, 1.5);
    Direction d = support_data(s, {1, 0.4, 0.2});
    VolumeEstimate a = k_volume(s, d, 0.2, {60000, 17, Exec::serial});
    VolumeEstimate b = k_volume(s, d, 0.2, {60000, 17, Exec::parallel});
    CHECK(a.value == b.value);
    CHECK(a.std_err == b.std_err);
}
