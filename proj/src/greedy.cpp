#include "fpp/greedy.hpp"

#include <cmath>

#include "fpp/point_process.hpp"
#include "fpp/rewards.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr uint64_t kGreedyTag = 0x475244;
constexpr uint64_t kLambdaTag = 0x4c414d;

double draw_lambda(Stream& rs, double a, int d, bool spaced) {
    double e = rs.exponential();
    return spaced ? std::pow(1.0 + e / a, 1.0 / d) : std::pow(e / a, 1.0 / d);
}

struct Step {
    double lambda;
    Vec w;
};

// First point of the field in X + C_eta, ordered by its u* coordinate.
Step cloud_step(const NormSpec& spec, const Direction& dir, const PoissonField& field, const Vec& X, double eta,
                double lo, double guess) {
    const int d = dir.d();
    Vec z(d), zp(d), zm(d);
    for (double lam_max = std::max(guess, lo + 1.0);; lam_max *= 2) {
        Vec blo(d), bhi(d);
        for (int i = 0; i < d; ++i) {
            blo[i] = X[i] - lam_max * (1 + eta);
            bhi[i] = X[i] + lam_max * (1 + eta);
        }
        PointCloud pc = field.sample(Box(blo, bhi));
        double best = INFINITY;
        Vec best_w;
        for (size_t k = 0; k < pc.size(); ++k) {
            const double* p = pc.point(k);
            double lam = 0;
            for (int i = 0; i < d; ++i) {
                z[i] = p[i] - X[i];
                lam += z[i] * dir.u_star[i];
            }
            if (!(lam > lo) || lam > lam_max || lam >= best) continue;
            for (int i = 0; i < d; ++i) {
                double v = z[i] - lam * dir.u[i];
                zp[i] = lam * dir.u[i] + v;
                zm[i] = lam * dir.u[i] - v;
            }
            if (spec(zp.data()) > lam * (1 + eta) || spec(zm.data()) > lam * (1 + eta)) continue;
            best = lam;
            best_w.resize(d);
            for (int i = 0; i < d; ++i) best_w[i] = z[i] - lam * dir.u[i];
        }
        if (best < INFINITY) return {best, best_w};
        if (lam_max > 1e6) throw std::runtime_error("greedy: no point found in the cone");
    }
}

GreedyRun run_greedy(const NormSpec& spec, const Direction& dir, double eta, double epsilon, double s,
                     GreedyMode mode, uint64_t seed, bool spaced, double m_vol, const MCParams& mc) {
    if (!(eta > 0 && eta < 1)) throw InvalidArgument("eta must be in (0, 1)");
    if (!(s > 0)) throw InvalidArgument("s must be > 0");
    if (!(epsilon > 0)) throw InvalidArgument("epsilon must be > 0");
    const int d = dir.d();
    if (!(m_vol > 0)) m_vol = m_volume(spec, dir, eta, mc).value;
    if (!(m_vol > 0)) throw InvalidArgument("|M_eta| estimate is zero; raise samples");
    const double a = greedy_rate(dir, m_vol);
    GreedyRun run;
    run.eta = eta;
    run.epsilon = epsilon;
    run.s = s;
    run.mode = mode;
    run.spaced = spaced;
    run.m_volume = m_vol;
    run.S.push_back(0);
    run.V.push_back(Vec(d, 0.0));
    Vec X(d, 0.0);
    run.path.vertices.push_back(X);
    run.path.interior_in_cloud.push_back(false);
    Stream rs(seed, kGreedyTag);
    CapSampler sampler(spec, dir, eta, true);
    PoissonField field(d, seed);
    // mean step, used to size the first search box
    const double mean = std::tgamma(1.0 + 1.0 / d) * std::pow(a, -1.0 / d);
    for (;;) {
        Step st;
        if (mode == GreedyMode::direct_law) {
            st.lambda = draw_lambda(rs, a, d, spaced);
            st.w = sampler.sample(rs);
            for (double& x : st.w) x *= st.lambda;
        } else {
            st = cloud_step(spec, dir, field, X, eta, spaced ? 1.0 : 0.0, 2 * mean + (spaced ? 1.0 : 0.0));
        }
        run.increments.push_back({st.lambda, st.w});
        double Sn = run.S.back() + st.lambda;
        Vec Vn = run.V.back();
        for (int i = 0; i < d; ++i) Vn[i] += st.w[i];
        run.S.push_back(Sn);
        run.V.push_back(Vn);
        if (Sn > s) break;
        for (int i = 0; i < d; ++i) X[i] += st.lambda * dir.u[i] + st.w[i];
        run.path.vertices.push_back(X);
        run.path.interior_in_cloud.push_back(true);
        ++run.z_s;
    }
    Vec end(d);
    for (int i = 0; i < d; ++i) end[i] = s * dir.u[i];
    run.path.vertices.push_back(end);
    run.path.interior_in_cloud.push_back(false);
    run.n_length = path_length(spec, run.path);
    run.path_time = run.n_length - reward_delta(d, epsilon) * run.z_s;
    return run;
}

} // namespace

std::string to_string(GreedyMode m) { return m == GreedyMode::direct_law ? "direct-law" : "on-cloud"; }

GreedyMode parse_greedy_mode(const std::string& s) {
    if (s == "direct-law") return GreedyMode::direct_law;
    if (s == "on-cloud") return GreedyMode::on_cloud;
    throw InvalidArgument("greedy mode must be direct-law or on-cloud, got '" + s + "'");
}

double greedy_rate(const Direction& dir, double m_volume) { return m_volume / (dir.d() * dir.u_star_norm2()); }

GreedyRun greedy_path(const NormSpec& spec, const Direction& dir, double eta, double epsilon, double s,
                      GreedyMode mode, uint64_t seed, double m_volume, const MCParams& mc) {
    return run_greedy(spec, dir, eta, epsilon, s, mode, seed, false, m_volume, mc);
}

GreedyRun greedy_path_spaced(const NormSpec& spec, const Direction& dir, double eta, double epsilon, double s,
                             uint64_t seed, GreedyMode mode, double m_volume, const MCParams& mc) {
    return run_greedy(spec, dir, eta, epsilon, s, mode, seed, true, m_volume, mc);
}

Vec greedy_lambda_draws(const Direction& dir, double m_volume, long long n, bool spaced, uint64_t seed) {
    if (!(m_volume > 0)) throw InvalidArgument("m_volume must be > 0");
    const double a = greedy_rate(dir, m_volume);
    Stream rs(seed, kLambdaTag);
    Vec out(n);
    for (auto& x : out) x = draw_lambda(rs, a, dir.d(), spaced);
    return out;
}

} // namespace fpp
