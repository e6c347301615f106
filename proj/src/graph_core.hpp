#pragma once

// Candidate graphs over a window of cloud points plus the two endpoints,
// lens-witness pruning and the all-pairs optimality check used by both
// geodesic solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "fpp/geometry.hpp"
#include "fpp/parallel.hpp"
#include "fpp/paths.hpp"
#include "fpp/point_process.hpp"

namespace fpp::detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node ids: cloud points 0..n-1, then x = n, then y = n + 1.
struct Nodes {
    const NormSpec* spec = nullptr;
    const PointCloud* cloud = nullptr;
    int d = 0;
    int n = 0;
    Vec x, y;
    SpatialIndex index;

    Nodes(const NormSpec& s, const PointCloud& c, Vec x_, Vec y_)
        : spec(&s), cloud(&c), d(s.d()), n(static_cast<int>(c.size())), x(std::move(x_)), y(std::move(y_)),
          index(c, 1.0) {}

    int X() const { return n; }
    int Y() const { return n + 1; }
    int total() const { return n + 2; }
    const double* pt(int i) const { return i < n ? cloud->point(i) : (i == n ? x.data() : y.data()); }
    double dist(int a, int b) const { return spec->dist(pt(a), pt(b)); }
};

// A vector v with <z, v> <= N(z) for all z and <y - x, v> = N(y - x).
inline Vec dual_unit(const NormSpec& spec, const Vec& x, const Vec& y) {
    Vec u(x.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = y[i] - x[i];
    Vec v = support_data(spec, u).u_star;
    // guard the dual norm against rounding in the renormalization
    double q;
    if (spec.kind() == NormSpec::Kind::one) {
        q = 0;
        for (double t : v) q = std::max(q, std::abs(t));
    } else if (spec.is_inf()) {
        q = 0;
        for (double t : v) q += std::abs(t);
    } else {
        double e = spec.p() / (spec.p() - 1);
        q = 0;
        for (double t : v) q += std::pow(std::abs(t), e);
        q = std::pow(q, 1 / e);
    }
    for (double& t : v) t /= q;
    return v;
}

// True if some allowed cloud point z, away from both ends by more than delta,
// lies strictly inside the lens N(a - z) + N(z - b) <= N(a - b) + delta.
template <class Allowed>
bool has_witness(const Nodes& g, int a, int b, double delta, Allowed&& allowed) {
    const int d = g.d;
    const double* pa = g.pt(a);
    const double* pb = g.pt(b);
    const double L = g.dist(a, b);
    const double bound = L + delta - 1e-12;
    // the lens sits inside a Euclidean spheroid with foci a, b
    double c2 = 0;
    for (int i = 0; i < d; ++i) c2 += (pb[i] - pa[i]) * (pb[i] - pa[i]);
    const double A = 0.5 * g.spec->beta() * (L + delta);
    const double B2 = std::max(0.0, A * A - 0.25 * c2);
    double lo[8], hi[8];
    std::vector<double> lo_v, hi_v;
    double* plo = lo;
    double* phi = hi;
    if (d > 8) {
        lo_v.resize(d);
        hi_v.resize(d);
        plo = lo_v.data();
        phi = hi_v.data();
    }
    for (int i = 0; i < d; ++i) {
        double e2 = c2 > 0 ? (pb[i] - pa[i]) * (pb[i] - pa[i]) / c2 : 0.0;
        double h = std::sqrt(A * A * e2 + B2 * (1 - e2));
        double m = 0.5 * (pa[i] + pb[i]);
        plo[i] = m - h;
        phi[i] = m + h;
    }
    return g.index.any_in_box(plo, phi, [&](int z) {
        if (z == a || z == b || !allowed(z)) return false;
        double da = g.spec->dist(pa, g.pt(z));
        if (da <= delta || da >= bound) return false;
        double db = g.spec->dist(g.pt(z), pb);
        return db > delta && da + db <= bound;
    });
}

struct Adjacency {
    std::vector<std::vector<std::pair<int, double>>> out; // by source node
    size_t edges = 0;

    void add(int a, int b, double w) {
        out[a].emplace_back(b, w);
        ++edges;
    }
};

// keep(a, b): pair exempt from pruning; allowed(z): z may serve as a witness.
template <class Weight, class Keep, class Allowed>
Adjacency build_candidates(const Nodes& g, SolverMode mode, double radius, double delta, Weight&& w, Keep&& keep,
                           Allowed&& allowed, Exec ex) {
    Adjacency adj;
    adj.out.resize(g.total());
    const int n = g.n;
    // sources are 0..n-1 and X; slot n handles X
    for_each_index(n + 1, ex, [&](long long s) {
        const int a = static_cast<int>(s);
        auto& row = adj.out[a];
        if (mode == SolverMode::exact_complete) {
            for (int b = 0; b < n; ++b)
                if (b != a) row.emplace_back(b, w(a, b));
            row.emplace_back(g.Y(), w(a, g.Y()));
            return;
        }
        auto consider = [&](int b) {
            if (b == a) return;
            if (keep(a, b) || !has_witness(g, a, b, delta, allowed)) row.emplace_back(b, w(a, b));
        };
        for (int b : g.index.query_ball(*g.spec, g.pt(a), radius)) consider(b);
        if (g.dist(a, g.Y()) <= radius) consider(g.Y());
    });
    for (auto& row : adj.out) adj.edges += row.size();
    return adj;
}

// After the points in `lost` stopped being allowed witnesses, adds back the
// candidate pairs (a, b) with N(b - a) <= radius that one of them was pruning
// and that no remaining witness covers.
// Returns the pairs added.
template <class Weight, class Allowed>
std::vector<std::pair<int, int>> repair_candidates(const Nodes& g, double radius, double delta, Weight&& w,
                                                   Allowed&& allowed, const std::vector<int>& lost, Adjacency& adj) {
    std::vector<std::pair<int, int>> added;
    for (int z : lost) {
        const double* pz = g.pt(z);
        std::vector<int> as = g.index.query_ball(*g.spec, pz, radius + delta);
        if (g.spec->dist(g.pt(g.X()), pz) <= radius + delta) as.push_back(g.X());
        for (int a : as) {
            if (a == z) continue;
            const double da = g.spec->dist(g.pt(a), pz);
            if (da <= delta) continue;
            std::vector<int> bs = g.index.query_ball(*g.spec, g.pt(a), radius);
            if (g.dist(a, g.Y()) <= radius) bs.push_back(g.Y());
            for (int b : bs) {
                if (b == a || b == z) continue;
                const double db = g.spec->dist(pz, g.pt(b));
                if (db <= delta || da + db > g.dist(a, b) + delta - 1e-12) continue;
                auto& row = adj.out[a];
                if (std::any_of(row.begin(), row.end(), [&](const auto& e) { return e.first == b; })) continue;
                if (!has_witness(g, a, b, delta, allowed)) {
                    adj.add(a, b, w(a, b));
                    added.emplace_back(a, b);
                }
            }
        }
    }
    return added;
}

// Pairs (a, b) with N(b - a) > radius, not exempted by skip(a, b), for which
// dst[b] > src[a] + w(a, b) and no witness exists. For every other pair the
// optimality condition holds, either directly or through a chain of
// strictly shorter dominating pairs. Pairs are screened in blocks using
// the tilted potential phi(v) = D(v) - mu <v, dual> and the bound
// N(z) - mu <z, dual> >= (1 - mu) N(z), valid for 0 <= mu <= 1 when
// <z, dual> <= N(z).
template <class Weight, class Skip, class Allowed>
std::vector<std::pair<int, int>> certificate_violations(const Nodes& g, double radius, double delta, const Vec& src,
                                                        const Vec& dst, Weight&& w, Skip&& skip, Allowed&& allowed,
                                                        const Vec& dual, double mu, double block, Exec ex) {
    const int d = g.d;
    const int total = g.total();
    mu = std::clamp(mu, 0.0, 1.0);
    Vec lo(d, kInf), hi(d, -kInf);
    for (int v = 0; v < total; ++v)
        for (int i = 0; i < d; ++i) {
            lo[i] = std::min(lo[i], g.pt(v)[i]);
            hi[i] = std::max(hi[i], g.pt(v)[i]);
        }
    std::vector<int> dims(d);
    size_t nblocks = 1;
    for (int i = 0; i < d; ++i) {
        dims[i] = std::max(1, static_cast<int>(std::floor((hi[i] - lo[i]) / block)) + 1);
        nblocks *= dims[i];
    }
    auto block_of = [&](int v) {
        size_t f = 0;
        for (int i = 0; i < d; ++i) {
            int c = std::clamp(static_cast<int>(std::floor((g.pt(v)[i] - lo[i]) / block)), 0, dims[i] - 1);
            f = f * dims[i] + c;
        }
        return f;
    };
    auto proj = [&](int v) {
        double s = 0;
        for (int i = 0; i < d; ++i) s += g.pt(v)[i] * dual[i];
        return s;
    };
    struct Block {
        std::vector<int> srcs, dsts;
        double min_src = kInf, max_dst = -kInf;
        Vec lo, hi;
    };
    std::vector<Block> blocks(nblocks);
    for (int v = 0; v < total; ++v) {
        bool is_src = v != g.Y() && src[v] < kInf;
        bool is_dst = v != g.X();
        if (!is_src && !is_dst) continue;
        Block& B = blocks[block_of(v)];
        if (B.lo.empty()) {
            B.lo.assign(g.pt(v), g.pt(v) + d);
            B.hi = B.lo;
        }
        for (int i = 0; i < d; ++i) {
            B.lo[i] = std::min(B.lo[i], g.pt(v)[i]);
            B.hi[i] = std::max(B.hi[i], g.pt(v)[i]);
        }
        double t = mu * proj(v);
        if (is_src) {
            B.srcs.push_back(v);
            B.min_src = std::min(B.min_src, src[v] - t);
        }
        if (is_dst) {
            B.dsts.push_back(v);
            B.max_dst = std::max(B.max_dst, dst[v] - t);
        }
    }
    std::vector<int> active_src, active_dst;
    for (size_t k = 0; k < nblocks; ++k) {
        if (!blocks[k].srcs.empty()) active_src.push_back(static_cast<int>(k));
        if (!blocks[k].dsts.empty()) active_dst.push_back(static_cast<int>(k));
    }
    std::vector<std::vector<std::pair<int, int>>> found(active_src.size());
    for_each_index(static_cast<long long>(active_src.size()), ex, [&](long long ia) {
        const Block& A = blocks[active_src[ia]];
        Vec gap(d);
        for (int kb : active_dst) {
            const Block& B = blocks[kb];
            for (int i = 0; i < d; ++i) gap[i] = std::max({0.0, A.lo[i] - B.hi[i], B.lo[i] - A.hi[i]});
            if (B.max_dst - A.min_src <= (1 - mu) * (*g.spec)(gap.data()) - delta - 1e-9) continue;
            for (int a : A.srcs)
                for (int b : B.dsts) {
                    if (a == b || skip(a, b)) continue;
                    if (dst[b] <= src[a] + w(a, b) + 1e-9) continue;
                    if (g.dist(a, b) <= radius) continue;
                    if (has_witness(g, a, b, delta, allowed)) continue;
                    found[ia].emplace_back(a, b);
                }
        }
    });
    std::vector<std::pair<int, int>> out;
    for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
    return out;
}

// Repeatedly doubles the window margin around x, y until two consecutive
// windows give the same optimum.
template <class SolveOne>
GeodesicResult solve_with_windows(const PointSource& source, const Vec& x, const Vec& y, const SolverOptions& opts,
                                  SolveOne&& solve_one) {
    if (!(opts.window_margin > 0)) throw InvalidArgument("window_margin must be > 0");
    double m = opts.window_margin;
    GeodesicResult prev;
    bool have_prev = false;
    int windows = 0;
    for (int k = 0; k <= opts.max_doublings; ++k, m *= 2) {
        Box window = Box::hull(x, y, m);
        PointCloud cloud = source(window);
        if (cloud.size() + 2 > opts.max_nodes) {
            if (opts.mode == SolverMode::exact_complete || !have_prev)
                throw ResourceError("window needs " + std::to_string(cloud.size() + 2) + " nodes, max_nodes is " +
                                    std::to_string(opts.max_nodes));
            break;
        }
        GeodesicResult r = solve_one(cloud);
        r.window = window;
        r.stats.windows = ++windows;
        if (have_prev && std::abs(r.time - prev.time) <= 1e-9 * (1 + std::abs(r.time))) {
            r.certificate = opts.mode == SolverMode::exact_complete ? Certificate::exact_complete
                                                                    : Certificate::exact_pruned;
            return r;
        }
        prev = std::move(r);
        have_prev = true;
    }
    prev.certificate = Certificate::window_saturated;
    prev.upper_bound = true;
    return prev;
}

inline Path make_path(const Nodes& g, const std::vector<int>& seq) {
    Path p;
    for (int v : seq) {
        p.vertices.emplace_back(g.pt(v), g.pt(v) + g.d);
        p.interior_in_cloud.push_back(v < g.n);
    }
    return p;
}

} // namespace fpp::detail
