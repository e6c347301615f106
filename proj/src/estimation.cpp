#include "fpp/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "fpp/rewards.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr uint64_t kReplicaTag = 0x52504c;

// Sum in a fixed pairwise tree so the result depends only on the values.
double tree_sum(const Vec& v, size_t lo, size_t hi) {
    if (hi - lo == 0) return 0;
    if (hi - lo == 1) return v[lo];
    size_t mid = lo + (hi - lo) / 2;
    return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

std::pair<double, double> mean_err(const Vec& v) {
    const double n = double(v.size());
    double m = tree_sum(v, 0, v.size()) / n;
    Vec sq(v.size());
    for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    double var = v.size() > 1 ? tree_sum(sq, 0, sq.size()) / (n - 1) : 0.0;
    return {m, std::sqrt(var / n)};
}

void check_grid(const Vec& s_grid, int replicas) {
    if (s_grid.empty()) throw InvalidArgument("s grid is empty");
    for (size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0)) throw InvalidArgument("s values must be > 0");
        if (i && !(s_grid[i] > s_grid[i - 1])) throw InvalidArgument("s grid must be increasing");
    }
    if (replicas < 8) throw InvalidArgument("replicas must be >= 8");
}

ReplicaRecord run_replica(ModelKind model, const NormSpec& spec, const Vec& u, double epsilon, double s,
                          size_t s_index, int replica, uint64_t seed, const EstimationOptions& opts) {
    const int d = spec.d();
    Vec x(d, 0.0), y(d);
    for (int i = 0; i < d; ++i) y[i] = s * u[i];
    PoissonField field(d, replica_seed(seed, s_index, replica));
    PointSource source = source_of(field);
    if (opts.empty_cloud)
        source = [d](const Box& b) {
            PointCloud pc;
            pc.d = d;
            pc.box = b;
            return pc;
        };
    GeodesicResult g = model == ModelKind::rewards ? geodesic_rewards(spec, source, x, y, epsilon, opts.solver)
                                                   : geodesic_balls(spec, source, x, y, epsilon, opts.solver);
    ReplicaRecord r;
    r.s = s;
    r.replica = replica;
    r.time = g.time;
    r.n_length = g.n_length;
    r.reward_count = g.reward_count;
    OverlapDiagnostics od = overlap_diagnostics(spec, g.path, epsilon);
    r.y_count = od.y_count;
    r.z_count = od.z_count;
    r.certificate = g.certificate;
    r.max_memory = g.stats.max_memory;
    r.nodes = g.stats.nodes;
    return r;
}

MuEstimate aggregate(ModelKind model, const NormSpec& spec, const Vec& u, double epsilon, const Vec& s_grid,
                     std::vector<ReplicaRecord> recs) {
    MuEstimate est;
    est.model = model;
    est.p = spec.p();
    est.u = u;
    est.epsilon = epsilon;
    const size_t R = recs.size() / s_grid.size();
    for (size_t i = 0; i < s_grid.size(); ++i) {
        Vec ratio(R);
        for (size_t r = 0; r < R; ++r) ratio[r] = recs[i * R + r].time / s_grid[i];
        auto [m, e] = mean_err(ratio);
        est.per_s.push_back({s_grid[i], m, e, static_cast<int>(R)});
    }
    est.mu_hat = est.per_s.back().mean;
    est.mu_err = est.per_s.back().std_err;
    if (s_grid.size() > 1) {
        double ms = 0, mv = 0;
        for (auto& p : est.per_s) {
            ms += p.s;
            mv += p.mean;
        }
        ms /= est.per_s.size();
        mv /= est.per_s.size();
        double num = 0, den = 0;
        for (auto& p : est.per_s) {
            num += (p.s - ms) * (p.mean - mv);
            den += (p.s - ms) * (p.s - ms);
        }
        est.gap_trend = num / den;
    }
    est.records = std::move(recs);
    return est;
}

Vec unit_direction(const NormSpec& spec, const Vec& u) {
    double n = spec(u);
    if (!(n > 0)) throw InvalidArgument("direction must be nonzero");
    Vec v = u;
    for (double& x : v) x /= n;
    return v;
}

} // namespace

std::string to_string(ModelKind m) { return m == ModelKind::rewards ? "rewards" : "balls"; }

ModelKind parse_model_kind(const std::string& s) {
    if (s == "rewards") return ModelKind::rewards;
    if (s == "balls") return ModelKind::balls;
    throw InvalidArgument("model must be rewards or balls, got '" + s + "'");
}

uint64_t replica_seed(uint64_t seed, size_t s_index, int replica) {
    return substream_key(seed, kReplicaTag, s_index, static_cast<uint64_t>(replica));
}

std::vector<MuEstimate> estimate_mu_grid(ModelKind model, const NormSpec& spec, const Vec& u_in, const Vec& eps_grid,
                                         const Vec& s_grid, int replicas, uint64_t seed,
                                         const EstimationOptions& opts) {
    check_grid(s_grid, replicas);
    for (double e : eps_grid)
        if (!(e > 0)) throw InvalidArgument("epsilon must be > 0");
    const Vec u = unit_direction(spec, u_in);
    const size_t per_eps = s_grid.size() * replicas;
    std::vector<ReplicaRecord> recs(eps_grid.size() * per_eps);
    for_each_index(static_cast<long long>(recs.size()), opts.exec, [&](long long t) {
        size_t e = t / per_eps, rem = t % per_eps;
        size_t i = rem / replicas;
        int r = static_cast<int>(rem % replicas);
        recs[t] = run_replica(model, spec, u, eps_grid[e], s_grid[i], i, r, seed, opts);
    });
    std::vector<MuEstimate> out;
    for (size_t e = 0; e < eps_grid.size(); ++e)
        out.push_back(aggregate(model, spec, u, eps_grid[e], s_grid,
                                std::vector<ReplicaRecord>(recs.begin() + e * per_eps,
                                                           recs.begin() + (e + 1) * per_eps)));
    return out;
}

MuEstimate estimate_mu(ModelKind model, const NormSpec& spec, const Vec& u, double epsilon, const Vec& s_grid,
                       int replicas, uint64_t seed, const EstimationOptions& opts) {
    return estimate_mu_grid(model, spec, u, Vec{epsilon}, s_grid, replicas, seed, opts).front();
}

ScalingFit fit_scaling(ModelKind model, const std::vector<FitPoint>& pts, Rational kappa_ref, double tolerance) {
    ScalingFit fit;
    fit.model = model;
    fit.points = pts;
    fit.kappa_ref = kappa_ref;
    fit.tolerance = tolerance;
    if (pts.size() < 2) throw InvalidArgument("a scaling fit needs at least two points");
    bool weighted = true;
    for (auto& p : pts) {
        if (!(p.one_minus_mu > 0))
            throw DegeneratePoint("1 - mu_hat <= 0 at epsilon=" + std::to_string(p.epsilon), p.epsilon);
        if (!(p.std_err > 0)) weighted = false;
    }
    double sw = 0, sx = 0, sy = 0;
    Vec X, Y, W;
    for (auto& p : pts) {
        double w = weighted ? std::pow(p.one_minus_mu / p.std_err, 2) : 1.0;
        X.push_back(std::log(p.epsilon));
        Y.push_back(std::log(p.one_minus_mu));
        W.push_back(w);
        sw += w;
        sx += w * X.back();
        sy += w * Y.back();
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        sxx += W[i] * (X[i] - mx) * (X[i] - mx);
        sxy += W[i] * (X[i] - mx) * (Y[i] - my);
        syy += W[i] * (Y[i] - my) * (Y[i] - my);
    }
    if (!(sxx > 0)) throw InvalidArgument("epsilon values must not all be equal");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        double r = Y[i] - fit.intercept - fit.slope * X[i];
        ss_res += W[i] * r * r;
    }
    fit.r_squared = syy > 0 ? 1 - ss_res / syy : 1.0;
    // with inverse-variance weights the slope variance is 1 / sxx
    fit.slope_err = weighted ? std::sqrt(1 / sxx) : 0.0;
    fit.within_tolerance = std::abs(fit.slope - to_double(kappa_ref)) <= tolerance;
    return fit;
}

ScalingFit scaling_sweep(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                         uint64_t seed, ModelKind model, const EstimationOptions& opts, double tolerance,
                         std::vector<MuEstimate>* estimates) {
    if (eps_grid.size() < 5) throw InvalidArgument("epsilon grid needs at least 5 points");
    for (size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0 && eps_grid[i] <= 0.25)) throw InvalidArgument("epsilon values must lie in (0, 0.25]");
        if (i && !(eps_grid[i] > eps_grid[i - 1])) throw InvalidArgument("epsilon grid must be increasing");
    }
    const double r0 = eps_grid[1] / eps_grid[0];
    for (size_t i = 2; i < eps_grid.size(); ++i)
        if (std::abs(eps_grid[i] / eps_grid[i - 1] / r0 - 1) > 1e-6)
            throw InvalidArgument("epsilon grid must be geometric");
    auto est = estimate_mu_grid(model, spec, u, eps_grid, Vec{s}, replicas, seed, opts);
    std::vector<FitPoint> pts;
    for (auto& e : est) pts.push_back({e.epsilon, 1 - e.mu_hat, e.mu_err});
    ScalingFit fit = fit_scaling(model, pts, exponents(spec, u).kappa, tolerance);
    if (estimates) *estimates = std::move(est);
    return fit;
}

ModelComparison compare_estimates(const NormSpec& spec, const Vec& u, const std::vector<MuEstimate>& rewards,
                                  const std::vector<MuEstimate>& balls) {
    if (rewards.size() != balls.size()) throw InvalidArgument("estimate lists differ in length");
    ModelComparison mc;
    mc.kappa = exponents(spec, u).kappa;
    const double kappa = to_double(mc.kappa);
    mc.rewards = rewards;
    mc.balls = balls;
    for (size_t k = 0; k < rewards.size(); ++k) {
        const MuEstimate& a = rewards[k];
        const MuEstimate& b = balls[k];
        if (a.records.size() != b.records.size()) throw InvalidArgument("estimates are not paired");
        // paired differences at the largest s
        const double s = a.per_s.back().s;
        Vec diff;
        for (size_t i = 0; i < a.records.size(); ++i)
            if (a.records[i].s == s) diff.push_back((b.records[i].time - a.records[i].time) / s);
        auto [m, e] = mean_err(diff);
        GapPoint g;
        g.epsilon = a.epsilon;
        g.mu = a.mu_hat;
        g.mu_err = a.mu_err;
        g.mu_tilde = b.mu_hat;
        g.mu_tilde_err = b.mu_err;
        g.gap = m;
        g.gap_err = e;
        double scale = std::pow(a.epsilon, kappa);
        g.normalized = m / scale;
        g.normalized_err = e / scale;
        mc.points.push_back(g);
    }
    return mc;
}

ModelComparison compare_models(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                               uint64_t seed, const EstimationOptions& opts) {
    auto r = estimate_mu_grid(ModelKind::rewards, spec, u, eps_grid, Vec{s}, replicas, seed, opts);
    auto b = estimate_mu_grid(ModelKind::balls, spec, u, eps_grid, Vec{s}, replicas, seed, opts);
    return compare_estimates(spec, u, r, b);
}

MonotonicityReport monotonicity_check(const NormSpec& spec, const Vec& u, const Vec& eps_grid, double s, int replicas,
                                      uint64_t seed, const EstimationOptions& opts) {
    Direction dir = support_data(spec, u);
    // only the cases with a measure-preserving rescaling are covered
    scaling_map(spec, dir, 0.5);
    for (size_t i = 1; i < eps_grid.size(); ++i)
        if (!(eps_grid[i] > eps_grid[i - 1])) throw InvalidArgument("epsilon grid must be increasing");
    MonotonicityReport rep;
    rep.kappa = exponents(spec, dir).kappa;
    const double kappa = to_double(rep.kappa);
    rep.estimates = estimate_mu_grid(ModelKind::rewards, spec, u, eps_grid, Vec{s}, replicas, seed, opts);
    for (auto& e : rep.estimates) {
        double scale = std::pow(e.epsilon, kappa);
        rep.points.push_back({e.epsilon, (1 - e.mu_hat) / scale, e.mu_err / scale});
    }
    for (size_t i = 0; i + 1 < rep.points.size(); ++i) {
        const auto& a = rep.points[i];
        const auto& b = rep.points[i + 1];
        if (b.value < a.value - 2 * std::hypot(a.std_err, b.std_err)) rep.flagged.push_back(static_cast<int>(i));
    }
    return rep;
}

} // namespace fpp
