#include "fpp/selftest.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "fpp/balls.hpp"
#include "fpp/commands.hpp"
#include "fpp/config.hpp"
#include "fpp/estimation.hpp"
#include "fpp/geometry.hpp"
#include "fpp/greedy.hpp"
#include "fpp/oracles.hpp"
#include "fpp/rewards.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

std::string rat(const Rational& r) {
    return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
}

// Fitted slope of log y on log x, unweighted.
double loglog_slope(const Vec& x, const Vec& y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

struct CapCase {
    const char* label;
    int d;
    double p;
    Vec u;
    double gamma;
    std::function<double(double)> volume; // analytic |K_eta|, empty if unknown
};

std::vector<CapCase> cap_cases() {
    return {
        {"p=1 u=(1,0)", 2, 1, {1, 0}, 1, [](double e) { return 2 * e; }},
        {"p=2 u=(1,0)", 2, 2, {1, 0}, 0.5, [](double e) { return 2 * std::sqrt(2 * e + e * e); }},
        {"p=inf u=(1,1)", 2, kInf, {1, 1}, 1, [](double e) { return 2 * std::sqrt(2.0) * e; }},
        {"p=inf u=(1,0)", 2, kInf, {1, 0}, 0, [](double e) { return 2 * (1 + e); }},
    };
}

CriterionResult c1_exponents() {
    struct Row {
        int d;
        double p;
        Vec u;
        Rational kappa, gamma;
    };
    // hand-evaluated from the case formulas
    const std::vector<Row> rows = {
        {2, 2, {1, 0}, {2, 3}, {1, 2}},
        {3, 2, {1, 0, 0}, {1, 2}, {1, 1}},
        {3, 2, {1, 1, 1}, {1, 2}, {1, 1}},
        {2, 1.5, {1, 0}, {3, 4}, {2, 3}},
        {3, 3, {1, 0, 0}, {3, 7}, {2, 3}},
        {2, 1, {1, 0}, {1, 1}, {1, 1}},
        {2, 1, {1, 1}, {1, 2}, {0, 1}},
        {3, 1, {1, 1, 0}, {1, 2}, {1, 1}},
        {2, kInf, {1, 0}, {1, 2}, {0, 1}},
        {2, kInf, {1, 1}, {1, 1}, {1, 1}},
        {3, kInf, {1, 1, 0}, {1, 2}, {1, 1}},
        {3, kInf, {1, 1, 1}, {1, 1}, {2, 1}},
    };
    CriterionResult r{1, "exponent formulas", true, "", 0};
    int ok = 0;
    for (auto& row : rows) {
        NormSpec spec(row.d, row.p);
        Exponents e = exponents(spec, row.u);
        if (e.kappa == row.kappa && e.gamma == row.gamma && e.kappa == Rational(1) / (Rational(row.d) - e.gamma))
            ++ok;
        else
            r.detail += " mismatch d=" + std::to_string(row.d) + " p=" + spec.p_string() + " kappa=" + rat(e.kappa) +
                        " gamma=" + rat(e.gamma) + ";";
    }
    r.pass = ok == static_cast<int>(rows.size());
    r.detail = std::to_string(ok) + "/" + std::to_string(rows.size()) + " cases exact" + r.detail;
    return r;
}

CriterionResult c2_cap_volumes(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{2, "analytic cap volumes", true, "", 0};
    int ok = 0, total = 0;
    double worst = 0;
    for (auto& c : cap_cases()) {
        NormSpec spec(c.d, c.p);
        Direction dir = support_data(spec, c.u);
        for (double eta : {0.025, 0.1, 0.4}) {
            MCParams mc{b.mc_samples, substream_key(seed, 0xC2, total), Exec::parallel};
            VolumeEstimate v = k_volume(spec, dir, eta, mc);
            double exact = c.volume(eta);
            double z = v.std_err > 0 ? std::abs(v.value - exact) / v.std_err : (v.value == exact ? 0 : kInf);
            worst = std::max(worst, z);
            ++total;
            if (z <= 3) ++ok;
            else r.detail += std::string(" ") + c.label + " eta=" + num(eta) + " z=" + num(z) + ";";
        }
    }
    r.pass = ok == total;
    r.detail = std::to_string(ok) + "/" + std::to_string(total) + " within 3 std err, worst |z|=" + num(worst, 3) +
               r.detail;
    return r;
}

CriterionResult c3_gamma(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{3, "gamma recovery", true, "", 0};
    auto cases = cap_cases();
    cases.push_back({"d=3 p=2 u=(1,0,0)", 3, 2, {1, 0, 0}, 1, {}});
    // small eta: gamma is the eta -> 0 exponent, and e.g. 2 (1 + eta) still
    // has a log-log slope near 0.11 over [0.025, 0.4]
    const Vec etas{0.001, 0.002, 0.004, 0.008, 0.016};
    int ok = 0, k = 0;
    for (auto& c : cases) {
        NormSpec spec(c.d, c.p);
        Direction dir = support_data(spec, c.u);
        Vec vol;
        for (double eta : etas) {
            MCParams mc{b.mc_samples, substream_key(seed, 0xC3, k++), Exec::parallel};
            vol.push_back(k_volume(spec, dir, eta, mc).value);
        }
        double slope = loglog_slope(etas, vol);
        bool pass = std::abs(slope - c.gamma) <= 0.05;
        ok += pass;
        r.detail += std::string(" ") + c.label + ": " + num(slope) + " vs " + num(c.gamma) + (pass ? "" : " (off)") + ";";
    }
    r.pass = ok == static_cast<int>(cases.size());
    r.detail = std::to_string(ok) + "/" + std::to_string(cases.size()) + " slopes within 0.05:" + r.detail;
    return r;
}

PointCloud uniform_cloud(int d, long n, const Vec& lo, const Vec& hi, Stream& rs) {
    PointCloud pc;
    pc.d = d;
    pc.box = Box(lo, hi);
    Vec x(d);
    for (long i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) x[k] = rs.uniform(lo[k], hi[k]);
        pc.push(x.data());
    }
    return pc;
}

CriterionResult c4_oracle(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{4, "geodesic oracle equivalence", true, "", 0};
    const double ps[] = {1, 2, kInf};
    const double epss[] = {0.01, 0.25};
    double worst = 0;
    int bad = 0;
    SolverOptions pruned, complete;
    complete.mode = SolverMode::exact_complete;
    for (int i = 0; i < b.oracle_instances; ++i) {
        Stream rs(seed, 0xC4, i);
        NormSpec spec(2, ps[i % 3]);
        double eps = epss[(i / 3) % 2];
        long n = static_cast<long>(rs.next_u64() % 11);
        PointCloud pc = uniform_cloud(2, n, {0, -1}, {3, 1}, rs);
        Vec x{0, 0}, y{3, 0};
        double ref_r = brute_force_rewards(spec, pc, x, y, eps);
        BooleanModel model(spec, pc, eps);
        double ref_b = brute_force_balls(model, x, y);
        for (auto* o : {&pruned, &complete}) {
            double tr = solve_rewards_window(spec, pc, x, y, eps, *o).time;
            double tb = solve_balls_window(model, x, y, *o).time;
            double e = std::max(std::abs(tr - ref_r), std::abs(tb - ref_b));
            worst = std::max(worst, e);
            if (e > 1e-9) ++bad;
        }
    }
    double worst_pc = 0;
    for (int i = 0; i < b.pruned_instances; ++i) {
        Stream rs(seed, 0xC44, i);
        NormSpec spec(2, ps[i % 3]);
        const double eps_set[] = {0.01, 0.05, 0.128};
        double eps = eps_set[(i / 3) % 3];
        long n = 20 + static_cast<long>(rs.next_u64() % (b.pruned_max_points - 19));
        double side = std::sqrt(double(n));
        PointCloud pc = uniform_cloud(2, n, {0, 0}, {side, side}, rs);
        Vec x{0, side / 2}, y{side, side / 2};
        double a = solve_rewards_window(spec, pc, x, y, eps, pruned).time;
        double c = solve_rewards_window(spec, pc, x, y, eps, complete).time;
        BooleanModel model(spec, pc, eps);
        double ab = solve_balls_window(model, x, y, pruned).time;
        double cb = solve_balls_window(model, x, y, complete).time;
        double e = std::max(std::abs(a - c), std::abs(ab - cb));
        worst_pc = std::max(worst_pc, e);
        if (e > 1e-9) ++bad;
    }
    r.pass = bad == 0;
    r.detail = std::to_string(b.oracle_instances) + " instances per model vs enumeration, max |diff|=" + num(worst, 3) +
               "; pruned vs complete on " + std::to_string(b.pruned_instances) +
               " instances per model, max |diff|=" + num(worst_pc, 3) + "; failures=" + std::to_string(bad);
    return r;
}

CriterionResult c5_greedy_law(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{5, "greedy renewal law", true, "", 0};
    struct Case {
        const char* label;
        int d;
        double p;
        Vec u;
        double eta, m_vol, ustar2;
    };
    // |M_eta| from the analytic cap volume (both caps are symmetric here)
    const std::vector<Case> cases = {
        {"p=2 u=(1,0) eta=0.1", 2, 2, {1, 0}, 0.1, 2 * std::sqrt(0.21), 1},
        {"p=1 u=(1,0) eta=0.2", 2, 1, {1, 0}, 0.2, 0.4, 1},
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    int ok = 0, total = 0, k = 0;
    for (auto& c : cases) {
        NormSpec spec(c.d, c.p);
        Direction dir = support_data(spec, c.u);
        const double a = c.m_vol / (c.d * c.ustar2);
        for (bool spaced : {false, true}) {
            double expect = spaced ? 1 + integrator.integrate([&](double t) { return std::exp(-a * (std::pow(1 + t, c.d) - 1)); })
                                   : integrator.integrate([&](double t) { return std::exp(-a * std::pow(t, c.d)); });
            Vec draws = greedy_lambda_draws(dir, c.m_vol, b.greedy_draws, spaced, substream_key(seed, 0xC5, k++));
            double m = 0, m2 = 0;
            for (double x : draws) m += x;
            m /= draws.size();
            for (double x : draws) m2 += (x - m) * (x - m);
            double se = std::sqrt(m2 / (draws.size() - 1) / draws.size());
            double z = std::abs(m - expect) / se;
            ++total;
            ok += z <= 3;
            r.detail += std::string(" ") + c.label + (spaced ? " spaced" : "") + ": mean " + num(m, 6) + " vs " +
                        num(expect, 6) + " (z=" + num(z, 2) + ");";
        }
    }
    r.pass = ok == total;
    r.detail = std::to_string(ok) + "/" + std::to_string(total) + " within 3 std err:" + r.detail;
    return r;
}

CriterionResult c6_domination(const AcceptanceBudget& b, uint64_t seed, const std::vector<ReplicaRecord>& rewards_recs) {
    CriterionResult r{6, "pathwise domination", true, "", 0};
    const double ps[] = {1, 2, kInf};
    int viol = 0;
    double worst = kInf;
    for (int i = 0; i < b.domination_instances; ++i) {
        Stream rs(seed, 0xC6, i);
        NormSpec spec(2, ps[i % 3]);
        double eps = rs.uniform(0.005, 0.2);
        PointCloud pc = sample_poisson(Box({0, 0}, {6, 6}), 1.0, substream_key(seed, 0xC66, i));
        Vec x{rs.uniform(0, 6), rs.uniform(0, 6)}, y{rs.uniform(0, 6), rs.uniform(0, 6)};
        double t = solve_rewards_window(spec, pc, x, y, eps, {}).time;
        BooleanModel model(spec, pc, eps);
        double tb = solve_balls_window(model, x, y, {}).time;
        worst = std::min(worst, tb - t);
        if (tb < t - 1e-9) ++viol;
    }
    long yz_viol = 0;
    for (auto& rec : rewards_recs)
        if (rec.y_count > 2 * rec.z_count) ++yz_viol;
    r.pass = viol == 0 && yz_viol == 0 && !rewards_recs.empty();
    r.detail = std::to_string(b.domination_instances) + " realizations, violations=" + std::to_string(viol) +
               ", min(T_balls - T_rewards)=" + num(worst, 4) + "; card Y <= 2 card Z on " +
               std::to_string(rewards_recs.size()) + " rewards geodesics, violations=" + std::to_string(yz_viol);
    return r;
}

struct SweepCase {
    const char* label;
    double p;
    Vec u;
};

struct SweepOutcome {
    std::string label;
    ScalingFit rewards, balls;
    ModelComparison cmp;
};

void run_sweeps(const AcceptanceBudget& b, uint64_t seed, std::vector<SweepOutcome>& out, std::ostream* log) {
    const std::vector<SweepCase> cases = {
        {"p=2 u=(1,0)", 2, {1, 0}}, {"p=1 u=(1,0)", 1, {1, 0}}, {"p=1 u=(1/2,1/2)", 1, {0.5, 0.5}}};
    for (auto& c : cases) {
        NormSpec spec(2, c.p);
        SweepOutcome o;
        o.label = c.label;
        std::vector<MuEstimate> er, eb;
        o.rewards = scaling_sweep(spec, c.u, b.sweep_eps, b.sweep_s, b.sweep_replicas, seed, ModelKind::rewards, {}, 0.15,
                                  &er);
        if (log) *log << "  sweep " << c.label << " rewards slope " << num(o.rewards.slope) << std::endl;
        o.balls = scaling_sweep(spec, c.u, b.sweep_eps, b.sweep_s, b.sweep_replicas, seed, ModelKind::balls, {}, 0.2, &eb);
        if (log) *log << "  sweep " << c.label << " balls slope " << num(o.balls.slope) << std::endl;
        o.cmp = compare_estimates(spec, c.u, er, eb);
        out.push_back(std::move(o));
    }
}

CriterionResult c7_scaling(const std::vector<SweepOutcome>& sw) {
    CriterionResult r{7, "scaling exponents", true, "", 0};
    for (auto& o : sw) {
        r.pass = r.pass && o.rewards.within_tolerance && o.balls.within_tolerance;
        r.detail += " " + o.label + ": rewards " + num(o.rewards.slope) + " +- " + num(o.rewards.slope_err, 2) +
                    (o.rewards.within_tolerance ? "" : " (off)") + ", balls " + num(o.balls.slope) + " +- " +
                    num(o.balls.slope_err, 2) + (o.balls.within_tolerance ? "" : " (off)") + " vs " +
                    rat(o.rewards.kappa_ref) + ";";
    }
    r.detail = "slopes of log(1-mu) on log eps:" + r.detail;
    return r;
}

CriterionResult c8_gap(const std::vector<SweepOutcome>& sw) {
    CriterionResult r{8, "model-gap decay", true, "", 0};
    for (auto& o : sw) {
        const GapPoint& lo = o.cmp.points.front();
        const GapPoint& hi = o.cmp.points.back();
        bool pass = lo.normalized <= hi.normalized + 3 * std::hypot(lo.normalized_err, hi.normalized_err);
        r.pass = r.pass && pass;
        r.detail += " " + o.label + ": " + num(lo.normalized) + " +- " + num(lo.normalized_err, 2) + " at eps=" +
                    num(lo.epsilon) + " vs " + num(hi.normalized) + " +- " + num(hi.normalized_err, 2) + " at eps=" +
                    num(hi.epsilon) + (pass ? "" : " (off)") + ";";
    }
    r.detail = "(mu_tilde - mu) / eps^kappa, smallest vs largest eps:" + r.detail;
    return r;
}

CriterionResult c9_monotonicity(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{9, "monotonicity trend", true, "", 0};
    NormSpec spec(2, 2);
    MonotonicityReport rep = monotonicity_check(spec, {1, 0}, b.mono_eps, b.mono_s, b.mono_replicas, seed);
    r.pass = rep.flagged.empty();
    r.detail = "(1-mu)/eps^2/3:";
    for (auto& p : rep.points) r.detail += " " + num(p.value) + " +- " + num(p.std_err, 2) + " (eps=" + num(p.epsilon) + ");";
    r.detail += " flagged decreases=" + std::to_string(rep.flagged.size());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CriterionResult c10_determinism(const AcceptanceBudget& b, uint64_t seed) {
    CriterionResult r{10, "determinism", true, "", 0};
    const std::string ini = "[model]\nd = 2\np = 2\nu = 1, 0\n"
                            "[sweep]\nepsilon_grid = 0.02, 0.05, 0.1\ns_grid = 10, 20\nreplicas = 8\n";
    auto run = [&](const std::string& sub, int threads) {
        std::map<std::string, std::string> ov{{"run.seed", std::to_string(seed)},
                                              {"run.out", (fs::path(b.scratch_dir) / sub).string()}};
        RunConfig cfg = parse_config(ini, ov);
        const int before = max_threads();
        set_threads(threads);
        std::vector<std::string> files = cmd_sweep(cfg);
        set_threads(before);
        return files;
    };
    fs::remove_all(b.scratch_dir);
    auto f1 = run("t1_a", 1);
    run("t1_b", 1);
    run("t8", 8);
    int same = 0, diff = 0;
    for (auto& f : f1) {
        fs::path name = fs::path(f).filename();
        std::string a = slurp(f);
        bool ok = !a.empty() && a == slurp(fs::path(b.scratch_dir) / "t1_b" / name) &&
                  a == slurp(fs::path(b.scratch_dir) / "t8" / name);
        if (ok) ++same;
        else {
            ++diff;
            r.detail += " differs: " + name.string() + ";";
        }
    }
    fs::remove_all(b.scratch_dir);
    r.pass = diff == 0 && same > 0;
    r.detail = std::to_string(same) + " data files byte-identical across replay and --threads 1 vs 8" + r.detail;
    return r;
}

template <class F>
CriterionResult timed(std::ostream* log, int id, const char* name, F&& f) {
    if (log) *log << "criterion " << id << " running" << std::endl;
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = f();
    } catch (const std::exception& e) {
        r.id = id;
        r.name = name;
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << format_result(r) << std::endl;
    return r;
}

} // namespace

AcceptanceBudget full_budget() {
    AcceptanceBudget b;
    for (int i = 0; i < 6; ++i) b.sweep_eps.push_back(0.004 * std::pow(2.0, i));
    return b;
}

AcceptanceBudget reduced_budget() {
    AcceptanceBudget b;
    b.oracle_instances = 45;
    b.pruned_instances = 18;
    b.pruned_max_points = 200;
    b.domination_instances = 200;
    b.sweep_s = 50;
    b.sweep_replicas = 8;
    for (int i = 0; i < 5; ++i) b.sweep_eps.push_back(0.008 * std::pow(2.0, i));
    b.mono_s = 50;
    b.mono_replicas = 16;
    return b;
}

std::string format_result(const CriterionResult& r) {
    std::ostringstream os;
    os << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << " [" << r.name << "] " << r.detail << " ("
       << num(r.seconds, 3) << " s)";
    return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceBudget& b, uint64_t seed, std::ostream* log) {
    std::vector<CriterionResult> res(10);
    res[0] = timed(log, 1, "exponent formulas", [&] { return c1_exponents(); });
    res[1] = timed(log, 2, "analytic cap volumes", [&] { return c2_cap_volumes(b, seed); });
    res[2] = timed(log, 3, "gamma recovery", [&] { return c3_gamma(b, seed); });
    res[3] = timed(log, 4, "geodesic oracle equivalence", [&] { return c4_oracle(b, seed); });
    res[4] = timed(log, 5, "greedy renewal law", [&] { return c5_greedy_law(b, seed); });

    std::vector<SweepOutcome> sw;
    std::string sweep_error;
    auto t0 = std::chrono::steady_clock::now();
    if (log) *log << "criteria 7 and 8 running (shared sweep)" << std::endl;
    try {
        run_sweeps(b, seed, sw, log);
    } catch (const std::exception& e) {
        sweep_error = e.what();
    }
    double sweep_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto from_sweep = [&](int id, const char* name, auto&& f) {
        CriterionResult r;
        if (!sweep_error.empty()) r = {id, name, false, "error: " + sweep_error, 0};
        else r = f();
        r.seconds = sweep_sec;
        return r;
    };
    res[6] = from_sweep(7, "scaling exponents", [&] { return c7_scaling(sw); });
    res[7] = from_sweep(8, "model-gap decay", [&] { return c8_gap(sw); });
    if (log) *log << format_result(res[6]) << "\n" << format_result(res[7]) << std::endl;

    std::vector<ReplicaRecord> rewards_recs;
    for (auto& o : sw)
        for (auto& e : o.cmp.rewards) rewards_recs.insert(rewards_recs.end(), e.records.begin(), e.records.end());
    res[5] = timed(log, 6, "pathwise domination", [&] { return c6_domination(b, seed, rewards_recs); });
    res[8] = timed(log, 9, "monotonicity trend", [&] { return c9_monotonicity(b, seed); });
    res[9] = timed(log, 10, "determinism", [&] { return c10_determinism(b, seed); });
    return res;
}

} // namespace fpp
