#include <doctest.h>

#include <cmath>

#include "fpp/estimation.hpp"

using namespace fpp;

namespace {

EstimationOptions serial_opts() {
    EstimationOptions o;
    o.exec = Exec::serial;
    return o;
}

Vec geom(double lo, double ratio, int n) {
    Vec v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(ratio, i));
    return v;
}

} // namespace

TEST_CASE("empty realizations travel at unit speed") {
    NormSpec spec(2, 2);
    EstimationOptions o;
    o.empty_cloud = true;
    for (auto m : {ModelKind::rewards, ModelKind::balls}) {
        MuEstimate e = estimate_mu(m, spec, {1, 0}, 0.05, {10, 20}, 8, 1, o);
        for (auto& ps : e.per_s) CHECK(ps.mean == doctest::Approx(1).epsilon(1e-12));
        CHECK(e.mu_hat == doctest::Approx(1).epsilon(1e-12));
    }
}

TEST_CASE("estimate structure and paired models") {
    NormSpec spec(2, 1);
    MuEstimate r = estimate_mu(ModelKind::rewards, spec, {1, 0}, 0.05, {10, 20}, 8, 9);
    MuEstimate b = estimate_mu(ModelKind::balls, spec, {1, 0}, 0.05, {10, 20}, 8, 9);
    REQUIRE(r.per_s.size() == 2);
    CHECK(r.per_s[1].s == 20);
    CHECK(r.mu_hat == r.per_s[1].mean);
    CHECK(r.records.size() == 16);
    CHECK(b.mu_hat <= 1);
    CHECK(r.mu_hat < 1);
    REQUIRE(r.records.size() == b.records.size());
    for (size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].time <= b.records[i].time + 1e-9);
    CHECK(r.mu_hat <= b.mu_hat + 3 * std::hypot(r.mu_err, b.mu_err));
    CHECK(replica_seed(9, 0, 1) != replica_seed(9, 0, 2));
    CHECK(replica_seed(9, 0, 1) != replica_seed(9, 1, 1));
}

TEST_CASE("grid evaluation matches single evaluations") {
    NormSpec spec(2, 2);
    Vec eps{0.02, 0.08};
    auto grid = estimate_mu_grid(ModelKind::rewards, spec, {1, 0}, eps, {15}, 8, 4);
    for (size_t i = 0; i < eps.size(); ++i) {
        MuEstimate one = estimate_mu(ModelKind::rewards, spec, {1, 0}, eps[i], {15}, 8, 4);
        CHECK(grid[i].mu_hat == one.mu_hat);
        CHECK(grid[i].mu_err == one.mu_err);
    }
    // common random numbers: smaller epsilon, smaller reward, larger time
    for (size_t k = 0; k < grid[0].records.size(); ++k)
        CHECK(grid[0].records[k].time >= grid[1].records[k].time - 1e-9);
}

TEST_CASE("serial and parallel estimates are identical") {
    NormSpec spec(2, 2);
    EstimationOptions par;
    par.exec = Exec::parallel;
    for (auto m : {ModelKind::rewards, ModelKind::balls}) {
        MuEstimate a = estimate_mu(m, spec, {1, 0}, 0.05, {12}, 8, 21, serial_opts());
        MuEstimate b = estimate_mu(m, spec, {1, 0}, 0.05, {12}, 8, 21, par);
        CHECK(a.mu_hat == b.mu_hat);
        CHECK(a.mu_err == b.mu_err);
        for (size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].time == b.records[i].time);
    }
}

TEST_CASE("estimate validation") {
    NormSpec spec(2, 2);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {1, 0}, 0.05, {}, 8, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {1, 0}, 0.05, {20, 10}, 8, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {1, 0}, 0.05, {0}, 8, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {1, 0}, 0.05, {10}, 7, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {0, 0}, 0.05, {10}, 8, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_mu(ModelKind::rewards, spec, {1, 0}, 0, {10}, 8, 1), InvalidArgument);
    CHECK_THROWS_AS(parse_model_kind("lattice"), InvalidArgument);
    CHECK(parse_model_kind(to_string(ModelKind::balls)) == ModelKind::balls);
}

TEST_CASE("scaling fit on synthetic points") {
    std::vector<FitPoint> pts;
    for (double e : geom(0.004, 2, 6)) pts.push_back({e, 0.5 * std::pow(e, 2.0 / 3), 0.01 * std::pow(e, 2.0 / 3)});
    ScalingFit f = fit_scaling(ModelKind::rewards, pts, Rational{2, 3}, 0.15);
    CHECK(f.slope == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(f.intercept == doctest::Approx(std::log(0.5)).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1).epsilon(1e-10));
    CHECK(f.within_tolerance);

    std::vector<FitPoint> off = pts;
    for (auto& p : off) p.one_minus_mu = std::pow(p.epsilon, 0.9);
    CHECK_FALSE(fit_scaling(ModelKind::rewards, off, Rational{2, 3}, 0.15).within_tolerance);

    std::vector<FitPoint> bad = pts;
    bad[2].one_minus_mu = -0.001;
    try {
        fit_scaling(ModelKind::rewards, bad, Rational{2, 3}, 0.15);
        FAIL("expected DegeneratePoint");
    } catch (const DegeneratePoint& e) {
        CHECK(e.epsilon == bad[2].epsilon);
    }
    CHECK_THROWS_AS(fit_scaling(ModelKind::rewards, {pts[0]}, Rational{2, 3}, 0.15), InvalidArgument);
}

TEST_CASE("scaling sweep grid checks") {
    NormSpec spec(2, 2);
    Vec u{1, 0};
    CHECK_THROWS_AS(scaling_sweep(spec, u, geom(0.01, 2, 4), 10, 8, 1, ModelKind::rewards), InvalidArgument);
    CHECK_THROWS_AS(scaling_sweep(spec, u, geom(0.02, 2, 5), 10, 8, 1, ModelKind::rewards), InvalidArgument);
    CHECK_THROWS_AS(scaling_sweep(spec, u, {0.1, 0.05, 0.025, 0.0125, 0.00625}, 10, 8, 1, ModelKind::rewards),
                    InvalidArgument);
    CHECK_THROWS_AS(scaling_sweep(spec, u, {0.004, 0.008, 0.02, 0.03, 0.06}, 10, 8, 1, ModelKind::rewards),
                    InvalidArgument);
}

TEST_CASE("model comparison at one epsilon") {
    NormSpec spec(2, 2);
    ModelComparison c = compare_models(spec, {1, 0}, {0.05}, 15, 8, 3, serial_opts());
    REQUIRE(c.points.size() == 1);
    const GapPoint& g = c.points[0];
    CHECK(g.mu == c.rewards[0].mu_hat);
    CHECK(g.mu_tilde == c.balls[0].mu_hat);
    CHECK(g.gap == doctest::Approx(g.mu_tilde - g.mu));
    CHECK(g.gap >= 0);
    CHECK(g.normalized == doctest::Approx(g.gap / std::pow(0.05, 2.0 / 3)));
    CHECK(c.kappa == Rational{2, 3});
}

TEST_CASE("monotonicity check coverage") {
    CHECK_THROWS_AS(monotonicity_check(NormSpec(3, INFINITY), {1, 1, 1}, {0.05, 0.1}, 10, 8, 1), UnsupportedCase);
    MonotonicityReport rep = monotonicity_check(NormSpec(2, INFINITY), {1, 1}, {0.05, 0.1}, 10, 8, 1);
    CHECK(rep.points.size() == 2);
    CHECK(rep.kappa == exponents(NormSpec(2, INFINITY), Vec{1, 1}).kappa);
    for (auto& p : rep.points) CHECK(std::isfinite(p.value));
}
