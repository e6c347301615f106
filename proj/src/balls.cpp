#include "fpp/balls.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include "fpp/rewards.hpp"
#include "graph_core.hpp"

namespace fpp {

using detail::kInf;
using detail::Nodes;

BooleanModel::BooleanModel(const NormSpec& spec, PointCloud cloud, double epsilon)
    : spec_(spec), epsilon_(epsilon) {
    if (cloud.size() > 0 && cloud.d != spec.d()) throw InvalidArgument("cloud dimension mismatch");
    cloud.d = spec.d();
    radius_ = 0.5 * reward_delta(spec.d(), epsilon);
    cloud_ = std::make_shared<const PointCloud>(std::move(cloud));
    index_ = std::make_shared<const SpatialIndex>(*cloud_, 1.0);
    const int n = static_cast<int>(cloud_->size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int v = 0; v < n; ++v)
        for (int w : index_->query_ball(spec_, cloud_->point(v), 2 * radius_ + 1e-12)) {
            int a = find(v), b = find(w);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    comp_.assign(n, -1);
    std::vector<int> label(n, -1);
    for (int v = 0; v < n; ++v) {
        int r = find(v);
        if (label[r] < 0) {
            label[r] = static_cast<int>(members_.size());
            members_.emplace_back();
        }
        comp_[v] = label[r];
        members_[label[r]].push_back(v);
    }
}

int BooleanModel::find_center(const double* x) const {
    for (int k : index_->query_ball(spec_, x, 0.0)) {
        const double* c = cloud_->point(k);
        if (std::equal(c, c + spec_.d(), x)) return k;
    }
    return -1;
}

bool ball_interval(const NormSpec& spec, const double* a, const double* b, const double* c, double r, double& t0,
                   double& t1, bool generic) {
    const int d = spec.d();
    if (spec.kind() == NormSpec::Kind::two && !generic) {
        double vv = 0, wv = 0, ww = 0;
        for (int i = 0; i < d; ++i) {
            double v = b[i] - a[i], w = a[i] - c[i];
            vv += v * v;
            wv += w * v;
            ww += w * w;
        }
        if (vv == 0) {
            if (ww > r * r) return false;
            t0 = 0;
            t1 = 1;
            return true;
        }
        double disc = wv * wv - vv * (ww - r * r);
        if (disc < 0) return false;
        double s = std::sqrt(disc);
        double lo = (-wv - s) / vv, hi = (-wv + s) / vv;
        if (hi < 0 || lo > 1) return false;
        t0 = std::max(0.0, lo);
        t1 = std::min(1.0, hi);
        return true;
    }
    double tm;
    double fm = segment_distance(spec, a, b, c, &tm);
    if (fm > r) return false;
    Vec y(d);
    auto f = [&](double t) {
        for (int i = 0; i < d; ++i) y[i] = a[i] + t * (b[i] - a[i]) - c[i];
        return spec(y.data());
    };
    if (f(0) <= r) {
        t0 = 0;
    } else {
        double lo = 0, hi = tm; // f(lo) > r >= f(hi)
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            (f(mid) > r ? lo : hi) = mid;
        }
        t0 = hi;
    }
    if (f(1) <= r) {
        t1 = 1;
    } else {
        double lo = tm, hi = 1; // f(lo) <= r < f(hi)
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            (f(mid) > r ? hi : lo) = mid;
        }
        t1 = lo;
    }
    return true;
}

namespace {

// Parameter intervals of [a, b] inside each ball, tagged with the centre.
std::vector<std::pair<std::pair<double, double>, int>> ball_hits(const BooleanModel& model, const double* a,
                                                                 const double* b) {
    std::vector<std::pair<std::pair<double, double>, int>> out;
    for (int k : model.index().query_segment_tube(model.spec(), a, b, model.radius())) {
        double t0, t1;
        if (ball_interval(model.spec(), a, b, model.cloud().point(k), model.radius(), t0, t1))
            out.push_back({{t0, t1}, k});
    }
    std::sort(out.begin(), out.end());
    return out;
}

double covered_fraction(std::vector<std::pair<double, double>> iv) {
    std::sort(iv.begin(), iv.end());
    double covered = 0, lo = 0, hi = -1;
    for (auto [s, e] : iv) {
        if (s > hi) {
            if (hi > lo) covered += hi - lo;
            lo = s;
            hi = e;
        } else {
            hi = std::max(hi, e);
        }
    }
    if (hi > lo) covered += hi - lo;
    return covered;
}

} // namespace

double segment_outside_length(const BooleanModel& model, const Vec& a, const Vec& b) {
    const double L = model.spec().dist(a.data(), b.data());
    if (L == 0) return 0;
    std::vector<std::pair<double, double>> iv;
    for (auto& h : ball_hits(model, a.data(), b.data())) iv.push_back(h.first);
    return std::max(0.0, L * (1 - covered_fraction(std::move(iv))));
}

double path_time_balls(const BooleanModel& model, const Path& path) {
    double s = 0;
    for (size_t i = 1; i < path.vertices.size(); ++i)
        s += segment_outside_length(model, path.vertices[i - 1], path.vertices[i]);
    return s;
}

GeodesicResult solve_balls_window(const BooleanModel& model, const Vec& x, const Vec& y, const SolverOptions& opts,
                                  Exec ex) {
    const NormSpec& spec = model.spec();
    const int d = spec.d();
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        throw InvalidArgument("endpoint dimension mismatch");
    if (x == y) throw InvalidArgument("endpoints must differ");
    if (opts.mode == SolverMode::exact_complete && model.cloud().size() + 2 > opts.max_nodes)
        throw ResourceError("exact-complete mode needs " + std::to_string(model.cloud().size() + 2) +
                            " nodes, max_nodes is " + std::to_string(opts.max_nodes));
    Nodes g(spec, model.cloud(), x, y);
    const double r = model.radius();
    const double delta = 2 * r;
    // distance between the balls (radius 0 at the endpoints)
    auto w = [&](int a, int b) {
        double ra = a < g.n ? r : 0.0, rb = b < g.n ? r : 0.0;
        return std::max(0.0, g.dist(a, b) - ra - rb);
    };
    auto none = [](int, int) { return false; };
    auto any = [](int) { return true; };
    detail::Adjacency adj = detail::build_candidates(g, opts.mode, opts.candidate_radius, delta, w, none, any, ex);
    Vec D;
    std::vector<int> pred;
    auto dijkstra = [&] {
        D.assign(g.total(), kInf);
        pred.assign(g.total(), -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        D[g.X()] = 0;
        pq.push({0.0, g.X()});
        while (!pq.empty()) {
            auto [da, a] = pq.top();
            pq.pop();
            if (da > D[a] || a == g.Y()) continue;
            for (auto [b, wb] : adj.out[a]) {
                double nd = da + wb;
                if (nd < D[b]) {
                    D[b] = nd;
                    pred[b] = a;
                    pq.push({nd, b});
                }
            }
        }
    };
    dijkstra();
    int rounds = 0;
    if (opts.mode == SolverMode::exact_pruned) {
        const Vec dual = detail::dual_unit(spec, x, y);
        for (;;) {
            Vec src = D;
            src[g.Y()] = kInf;
            double mu = D[g.Y()] / g.dist(g.X(), g.Y());
            auto viol = detail::certificate_violations(g, opts.candidate_radius, delta, src, D, w, none, any, dual, mu,
                                                       std::max(2.0, opts.candidate_radius / 2), ex);
            if (viol.empty()) break;
            if (++rounds > 100) throw ResourceError("optimality certificate did not converge");
            for (auto [a, b] : viol) adj.add(a, b, w(a, b));
            dijkstra();
        }
    }
    if (!(D[g.Y()] < kInf)) throw ResourceError("no path found between the endpoints");
    std::vector<int> seq;
    for (int v = g.Y(); v >= 0; v = pred[v]) seq.push_back(v);
    std::reverse(seq.begin(), seq.end());
    GeodesicResult res;
    // an endpoint sitting on a centre would repeat a vertex
    std::vector<int> clean;
    for (int v : seq)
        if (clean.empty() || !std::equal(g.pt(v), g.pt(v) + d, g.pt(clean.back()))) clean.push_back(v);
        else if (v == g.Y()) clean.back() = v;
    res.path = detail::make_path(g, clean);
    res.graph_value = D[g.Y()];
    res.n_length = path_length(spec, res.path);
    res.time = path_time_balls(model, res.path);
    res.reward_count = 0;
    for (size_t i = 1; i + 1 < res.path.size(); ++i) res.reward_count += res.path.interior_in_cloud[i];
    res.certificate = opts.mode == SolverMode::exact_complete ? Certificate::exact_complete : Certificate::exact_pruned;
    if (!model.cloud().box.lo.empty()) res.window = model.cloud().box;
    res.stats.nodes = g.total();
    res.stats.edges = adj.edges;
    res.stats.states = g.total();
    res.stats.certificate_rounds = rounds;
    return res;
}

GeodesicResult geodesic_balls(const NormSpec& spec, const PointSource& source, const Vec& x, const Vec& y,
                              double epsilon, const SolverOptions& opts, Exec ex) {
    return detail::solve_with_windows(source, x, y, opts, [&](const PointCloud& cloud) {
        BooleanModel model(spec, cloud, epsilon);
        return solve_balls_window(model, x, y, opts, ex);
    });
}

namespace {

struct Piece {
    double s0, s1; // global path parameter: segment index + local t
};

// Merged stretches of the path parameter spent in each component.
std::map<int, std::vector<Piece>> component_pieces(const BooleanModel& model, const Path& path) {
    std::map<int, std::vector<Piece>> raw;
    for (size_t i = 1; i < path.size(); ++i)
        for (auto& h : ball_hits(model, path.vertices[i - 1].data(), path.vertices[i].data()))
            raw[model.component(h.second)].push_back({double(i - 1) + h.first.first, double(i - 1) + h.first.second});
    std::map<int, std::vector<Piece>> out;
    for (auto& [c, v] : raw) {
        std::sort(v.begin(), v.end(), [](const Piece& a, const Piece& b) { return a.s0 < b.s0; });
        std::vector<Piece> m;
        for (auto& p : v) {
            if (!m.empty() && p.s0 <= m.back().s1 + 1e-9) m.back().s1 = std::max(m.back().s1, p.s1);
            else m.push_back(p);
        }
        out[c] = std::move(m);
    }
    return out;
}

Vec point_at(const Path& path, double s) {
    size_t i = std::min(static_cast<size_t>(std::floor(s)), path.size() - 2);
    double t = s - static_cast<double>(i);
    Vec p(path.vertices[i].size());
    for (size_t k = 0; k < p.size(); ++k)
        p[k] = path.vertices[i][k] + t * (path.vertices[i + 1][k] - path.vertices[i][k]);
    return p;
}

} // namespace

PiCheckReport validate_pi_check(const BooleanModel& model, const Path& path) {
    PiCheckReport rep;
    auto fail = [&](int code, std::string msg) {
        rep.valid = false;
        rep.violation = code;
        rep.message = std::move(msg);
        return rep;
    };
    const size_t nv = path.size();
    if (nv < 2) return fail(1, "path needs at least two vertices");
    std::vector<int> centre(nv, -1);
    for (size_t i = 1; i + 1 < nv; ++i) {
        centre[i] = model.find_center(path.vertices[i].data());
        if (centre[i] < 0) return fail(1, "interior vertex " + std::to_string(i) + " is not a cloud point");
    }
    for (size_t i = 0; i < nv; i += nv - 1) centre[i] = model.find_center(path.vertices[i].data());
    const double last = static_cast<double>(nv - 1);
    for (auto& [c, pieces] : component_pieces(model, path)) {
        if (pieces.size() > 1)
            return fail(2, "path re-enters component " + std::to_string(c) + " at parameter " +
                               std::to_string(pieces[1].s0));
        const Piece& p = pieces[0];
        std::vector<size_t> inside;
        for (size_t i = 0; i < nv; ++i)
            if (centre[i] >= 0 && model.component(centre[i]) == c) inside.push_back(i);
        const bool from_start = p.s0 <= 1e-9, to_end = p.s1 >= last - 1e-9;
        if (inside.empty()) {
            if (from_start || to_end) continue;
            return fail(3, "component " + std::to_string(c) + " is crossed without visiting a centre");
        }
        for (size_t j = 1; j < inside.size(); ++j) {
            if (inside[j] != inside[j - 1] + 1)
                return fail(3, "centres of component " + std::to_string(c) + " are not visited consecutively");
            double step = model.spec().dist(path.vertices[inside[j - 1]].data(), path.vertices[inside[j]].data());
            if (step > model.diameter() + 1e-12)
                return fail(3, "step of length " + std::to_string(step) + " inside component " + std::to_string(c));
        }
        Vec a = point_at(path, p.s0), b = point_at(path, p.s1);
        if (!from_start && model.spec().dist(a.data(), path.vertices[inside.front()].data()) > model.radius() + 1e-9)
            return fail(3, "entry into component " + std::to_string(c) + " is not on the first centre's ball");
        if (!to_end && model.spec().dist(b.data(), path.vertices[inside.back()].data()) > model.radius() + 1e-9)
            return fail(3, "exit from component " + std::to_string(c) + " is not on the last centre's ball");
    }
    return rep;
}

namespace {

Path canonical_pass(const BooleanModel& model, const Path& path) {
    if (path.size() < 2) return path;
    auto pieces = component_pieces(model, path);
    if (pieces.empty()) return path;
    struct Span {
        double s0, s1;
        int comp;
    };
    // Walk the pieces in path order; a component is entered at its first
    // piece and left at its last one, and anything met in between is skipped.
    std::vector<Span> all;
    std::map<int, double> last_exit;
    for (auto& [c, v] : pieces) {
        for (auto& pc : v) all.push_back({pc.s0, pc.s1, c});
        last_exit[c] = v.back().s1;
    }
    std::sort(all.begin(), all.end(), [](const Span& a, const Span& b) { return a.s0 < b.s0; });
    std::vector<Span> spans;
    double cur = -kInf;
    for (const Span& sp : all) {
        if (sp.s0 < cur) continue;
        spans.push_back({sp.s0, last_exit[sp.comp], sp.comp});
        cur = last_exit[sp.comp];
    }
    const NormSpec& spec = model.spec();
    const double r = model.radius();
    auto nearest_centre = [&](int comp, const Vec& p) {
        int best = -1;
        double bd = kInf;
        for (int k : model.members(comp)) {
            double dd = spec.dist(p.data(), model.cloud().point(k));
            if (dd < bd) {
                bd = dd;
                best = k;
            }
        }
        return best;
    };
    auto chain = [&](int comp, int from, int to) {
        // fewest hops of length <= diameter inside the component
        std::map<int, int> prev;
        std::queue<int> q;
        prev[from] = from;
        q.push(from);
        while (!q.empty() && !prev.count(to)) {
            int v = q.front();
            q.pop();
            for (int w : model.index().query_ball(spec, model.cloud().point(v), 2 * r + 1e-12))
                if (model.component(w) == comp && !prev.count(w)) {
                    prev[w] = v;
                    q.push(w);
                }
        }
        std::vector<int> out;
        for (int v = to; v != from; v = prev.at(v)) out.push_back(v);
        out.push_back(from);
        std::reverse(out.begin(), out.end());
        return out;
    };
    Path out;
    auto push = [&](const Vec& v, bool in_cloud) {
        if (!out.vertices.empty() && out.vertices.back() == v) return;
        out.vertices.push_back(v);
        out.interior_in_cloud.push_back(in_cloud);
    };
    push(path.vertices.front(), false);
    for (const Span& sp : spans) {
        int c = nearest_centre(sp.comp, point_at(path, sp.s0));
        int e = nearest_centre(sp.comp, point_at(path, sp.s1));
        for (int k : chain(sp.comp, c, e)) push(model.cloud().point_vec(k), true);
    }
    if (out.vertices.back() == path.vertices.back()) out.interior_in_cloud.back() = false;
    else push(path.vertices.back(), false);
    out.interior_in_cloud.front() = false;
    return out;
}

} // namespace

// A connector between two components can enter the next one through a
// different ball than the one it aims at; another pass then retargets it.
Path canonicalize_to_pi_check(const BooleanModel& model, const Path& path) {
    Path cur = canonical_pass(model, path);
    for (int pass = 0; pass < 32 && !validate_pi_check(model, cur).valid; ++pass) {
        Path next = canonical_pass(model, cur);
        if (next.vertices == cur.vertices) break;
        cur = std::move(next);
    }
    return cur;
}

OverlapDiagnostics overlap_diagnostics(const NormSpec& spec, const Path& path, double epsilon) {
    OverlapDiagnostics od;
    const double delta = reward_delta(spec.d(), epsilon);
    const size_t nv = path.size();
    for (size_t j = 1; j < nv; ++j)
        if (spec.dist(path.vertices[j - 1].data(), path.vertices[j].data()) <= 5 * delta) ++od.z_count;
    if (nv <= 1000) {
        for (size_t j = 1; j < nv; ++j)
            for (size_t i = 0; i < j; ++i)
                if (spec.dist(path.vertices[i].data(), path.vertices[j].data()) <= delta) {
                    ++od.y_count;
                    break;
                }
        return od;
    }
    PointCloud pc;
    pc.d = spec.d();
    for (auto& v : path.vertices) pc.push(v.data());
    SpatialIndex idx(pc, std::max(delta, 1e-3));
    for (size_t j = 1; j < nv; ++j) {
        auto near = idx.query_ball(spec, pc.point(j), delta);
        if (!near.empty() && near.front() < static_cast<int>(j)) ++od.y_count;
    }
    return od;
}

} // namespace fpp
