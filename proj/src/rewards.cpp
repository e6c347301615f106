#include "fpp/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "graph_core.hpp"

namespace fpp {

using detail::kInf;
using detail::Nodes;

double reward_delta(int d, double epsilon) {
    if (!(epsilon > 0)) throw InvalidArgument("epsilon must be > 0");
    return std::pow(epsilon, 1.0 / d);
}

long count_rewards(const NormSpec& spec, const Path& path, const PointCloud& cloud) {
    if (path.vertices.empty() || cloud.size() == 0) return 0;
    SpatialIndex idx(cloud, 1.0);
    std::set<int> hit;
    if (path.vertices.size() == 1) {
        for (int k : idx.query_ball(spec, path.vertices[0].data(), 1e-12)) hit.insert(k);
    }
    for (size_t i = 1; i < path.vertices.size(); ++i)
        for (int k : idx.query_segment_tube(spec, path.vertices[i - 1].data(), path.vertices[i].data(), 1e-12))
            hit.insert(k);
    return static_cast<long>(hit.size());
}

double path_time_rewards(const NormSpec& spec, const Path& path, const PointCloud& cloud, double epsilon) {
    return path_length(spec, path) - reward_delta(spec.d(), epsilon) * count_rewards(spec, path, cloud);
}

namespace {

// Label-correcting search over (vertex, memory) states. Each cloud vertex v
// has a neighbourhood N(v) of nearby points; a label at v remembers which of
// them the walk visited since it last left N(v), and may not step onto a
// remembered point. Neighbourhoods start as the points within delta plus the
// short negative cycles, and grow whenever the search finds a negative cycle
// or the best walk revisits a point. Labels that depended on a grown
// neighbourhood are discarded and rebuilt from their valid neighbours. Every
// simple path stays feasible, so a simple optimal walk is an optimal path.
class RewardsSolver {
public:
    RewardsSolver(const Nodes& g, double delta, const SolverOptions& opts, Exec ex)
        : g_(g), delta_(delta), opts_(opts), ex_(ex), nb_(g.n), remembered_(g.n, 0), changed_flag_(g.n, 0) {}

    GeodesicResult run() {
        for (int v = 0; v < g_.n; ++v)
            for (int w : g_.index.query_ball(*g_.spec, g_.pt(v), delta_))
                if (w != v) add_memory(v, w);
        forbid_short_cycles();
        newly_.clear();
        for (int v : changed_) changed_flag_[v] = 0;
        changed_.clear();
        adj_ = detail::build_candidates(g_, opts_.mode, opts_.candidate_radius, delta_, weight(), no_keep, allowed(),
                                        ex_);
        rev_.assign(g_.total(), {});
        for (int a = 0; a < g_.total(); ++a)
            for (auto [b, w] : adj_.out[a]) rev_[b].push_back(a);
        at_.assign(g_.total(), {});
        states_.push_back({g_.X(), 0, 0.0, -1});
        states_.push_back({g_.Y(), 0, kInf, -1});
        at_[g_.X()].push_back(kX);
        at_[g_.Y()].push_back(kY);
        inq_.assign(2, 0);
        push(kX);
        for (;;) {
            settle();
            if (opts_.mode == SolverMode::exact_pruned) certify();
            std::vector<int> seq = extract();
            // every revisit in the walk is ruled out before the next solve
            std::vector<int> last(g_.total(), -1);
            bool simple = true;
            for (size_t i = 0; i < seq.size(); ++i) {
                const int v = seq[i];
                if (last[v] >= 0) {
                    for (size_t j = last[v] + 1; j < i; ++j) add_memory(seq[j], v);
                    ++growths_;
                    simple = false;
                }
                last[v] = static_cast<int>(i);
            }
            if (!simple) continue;
            GeodesicResult res;
            res.path = detail::make_path(g_, seq);
            res.graph_value = states_[kY].D;
            res.stats.nodes = g_.total();
            res.stats.edges = adj_.edges;
            res.stats.states = states_.size();
            res.stats.certificate_rounds = rounds_;
            res.stats.memory_growths = growths_;
            for (auto& m : nb_) res.stats.max_memory = std::max(res.stats.max_memory, static_cast<int>(m.size()));
            res.certificate = opts_.mode == SolverMode::exact_complete ? Certificate::exact_complete
                                                                       : Certificate::exact_pruned;
            return res;
        }
    }

private:
    struct State {
        int node;
        uint64_t mask; // bit j: nb_[node][j] is remembered
        double D;
        int pred;
    };
    static constexpr int kX = 0, kY = 1;
    static bool no_keep(int, int) { return false; }

    struct Weight {
        const Nodes* g;
        double delta;
        double operator()(int a, int b) const { return g->dist(a, b) - (b < g->n ? delta : 0.0); }
    };
    // a witness must never be remembered, so that detouring through it cannot
    // add to the memory of the label it replaces
    struct Allowed {
        const std::vector<int>* remembered;
        bool operator()(int z) const { return (*remembered)[z] == 0; }
    };
    Weight weight() const { return {&g_, delta_}; }
    Allowed allowed() const { return {&remembered_}; }

    // Makes v remember z from now on. Lists only grow at the back, so mask
    // bits of existing states keep their meaning.
    void add_memory(int v, int z) {
        auto& m = nb_[v];
        if (std::find(m.begin(), m.end(), z) != m.end()) return;
        if (static_cast<int>(m.size()) >= opts_.max_memory)
            throw EpsilonTooLarge("a point would have to remember more than max_memory=" +
                                  std::to_string(opts_.max_memory) +
                                  " neighbours to rule out revisits; epsilon is too large");
        m.push_back(z);
        if (remembered_[z]++ == 0) newly_.push_back(z);
        if (!changed_flag_[v]) {
            changed_flag_[v] = 1;
            changed_.push_back(v);
        }
    }

    int find_state(int node, uint64_t mask) const {
        for (int t : at_[node])
            if (states_[t].mask == mask) return t;
        return -1;
    }

    // Memory after stepping from state (a, ma) to cloud point b, or false if b is remembered.
    bool step_mask(int a, uint64_t ma, int b, uint64_t& mb) const {
        mb = 0;
        if (a >= g_.n) return true;
        const auto& A = nb_[a];
        const auto& B = nb_[b];
        auto held = [&](int x) {
            for (size_t i = 0; i < A.size(); ++i)
                if (A[i] == x) return (ma >> i & 1) != 0;
            return false;
        };
        if (held(b)) return false;
        for (size_t j = 0; j < B.size(); ++j)
            if (B[j] == a || held(B[j])) mb |= uint64_t(1) << j;
        return true;
    }

    // small label first: a label below the head's goes to the front
    void push(int s) {
        if (s == kY || inq_[s] || !(states_[s].D < kInf)) return;
        if (!q_.empty() && states_[s].D < states_[q_.front()].D) q_.push_front(s);
        else q_.push_back(s);
        inq_[s] = 1;
    }

    void push_node(int a) {
        for (int t : at_[a]) push(t);
    }

    // Queue-based Bellman-Ford until no label improves and no negative cycle remains.
    void settle() {
        for (;;) {
            apply_pending();
            drain();
            if (!grow_on_cycles() && changed_.empty() && newly_.empty() && !cut_) return;
        }
    }

    void drain() {
        size_t relax = 0, next_check = states_.size() + g_.total();
        while (!q_.empty()) {
            const int s = q_.front();
            q_.pop_front();
            inq_[s] = 0;
            const int a = states_[s].node;
            const uint64_t ma = states_[s].mask;
            const double ds = states_[s].D;
            if (!(ds < kInf)) continue;
            for (auto [b, w] : adj_.out[a]) {
                const double nd = ds + w;
                int t;
                if (b == g_.Y()) {
                    t = kY;
                } else {
                    uint64_t mb;
                    if (!step_mask(a, ma, b, mb)) continue;
                    t = find_state(b, mb);
                    if (t < 0) {
                        bool dominated = false;
                        for (int o : at_[b])
                            if ((states_[o].mask & ~mb) == 0 && states_[o].D <= nd) {
                                dominated = true;
                                break;
                            }
                        if (dominated) continue;
                        t = static_cast<int>(states_.size());
                        states_.push_back({b, mb, kInf, -1});
                        at_[b].push_back(t);
                        inq_.push_back(0);
                    }
                }
                if (nd < states_[t].D) {
                    states_[t].D = nd;
                    states_[t].pred = s;
                    ++relax;
                    push(t);
                }
            }
            if (relax >= next_check) {
                // with strict updates every cycle of predecessor links is negative
                if (grow_on_cycles()) apply_pending();
                next_check = relax + states_.size() + g_.total();
            }
        }
    }

    // Brings labels and candidate edges in line with grown neighbourhoods.
    void apply_pending() {
        if (!newly_.empty()) {
            if (opts_.mode == SolverMode::exact_pruned) {
                auto added = detail::repair_candidates(g_, opts_.candidate_radius, delta_, weight(), allowed(),
                                                       newly_, adj_);
                for (auto [a, b] : added) {
                    rev_[b].push_back(a);
                    push_node(a);
                }
            }
            newly_.clear();
        }
        if (changed_.empty() && !cut_) return;
        cut_ = false;
        // a label is stale if its predecessor chain meets a changed vertex or a cut link
        const size_t S = states_.size();
        std::vector<char> status(S, 0); // 1 valid, 2 stale
        status[kX] = 1;
        std::vector<int> chain;
        for (size_t s0 = 0; s0 < S; ++s0) {
            int s = static_cast<int>(s0);
            chain.clear();
            char verdict = 0;
            while (!status[s]) {
                const State& st = states_[s];
                if (!(st.D < kInf)) {
                    verdict = chain.empty() ? 1 : 2; // unreached, nothing to discard
                    break;
                }
                if (st.pred < 0 || (st.node < g_.n && changed_flag_[st.node])) {
                    verdict = 2;
                    break;
                }
                chain.push_back(s);
                status[s] = 3;
                s = st.pred;
            }
            if (!verdict) verdict = status[s] == 3 ? 2 : status[s];
            else status[s] = verdict;
            for (int c : chain) status[c] = verdict;
        }
        std::vector<char> touched(g_.total(), 0);
        for (size_t s = 0; s < S; ++s)
            if (status[s] == 2) {
                states_[s].D = kInf;
                states_[s].pred = -1;
                touched[states_[s].node] = 1;
            }
        for (int v : changed_) changed_flag_[v] = 0;
        changed_.clear();
        for (int u = 0; u < g_.total(); ++u)
            if (touched[u])
                for (int a : rev_[u]) push_node(a);
    }

    // Makes the closed walk through cyc infeasible: its most central vertex
    // is remembered all the way round.
    void forbid_cycle(std::vector<int> cyc) {
        std::sort(cyc.begin(), cyc.end());
        cyc.erase(std::unique(cyc.begin(), cyc.end()), cyc.end());
        int pivot = cyc[0];
        double best = kInf;
        for (int c : cyc) {
            double r = 0;
            for (int o : cyc) r = std::max(r, g_.dist(c, o));
            if (r < best) {
                best = r;
                pivot = c;
            }
        }
        for (int c : cyc)
            if (c != pivot) add_memory(c, pivot);
    }

    // Negative simple cycles with at most kShortCycle edges, found by a
    // depth-first search from their smallest vertex.
    void forbid_short_cycles() {
        constexpr int kShortCycle = 5;
        std::vector<std::vector<int>> found(g_.n);
        for_each_index(g_.n, ex_, [&](long long i) {
            const int v = static_cast<int>(i);
            // every vertex of such a cycle is within kShortCycle * delta / 2 of v
            std::vector<int> near;
            for (int u : g_.index.query_ball(*g_.spec, g_.pt(v), 0.5 * kShortCycle * delta_))
                if (u > v) near.push_back(u);
            if (near.size() < 2) return;
            std::vector<int> path{v};
            auto dfs = [&](auto&& self, double cost) -> void {
                const int cur = path.back();
                const int used = static_cast<int>(path.size()) - 1;
                if (used >= 2 && cost + g_.dist(cur, v) - delta_ < -1e-12) {
                    found[v].insert(found[v].end(), path.begin(), path.end());
                    found[v].push_back(-1);
                    return;
                }
                if (used + 1 >= kShortCycle) return;
                for (int x : near) {
                    if (std::find(path.begin(), path.end(), x) != path.end()) continue;
                    const double c2 = cost + g_.dist(cur, x) - delta_;
                    // the remaining legs cover at least N(x - v) and collect delta each
                    if (c2 + g_.dist(x, v) - (kShortCycle - used - 1) * delta_ >= -1e-12) continue;
                    path.push_back(x);
                    self(self, c2);
                    path.pop_back();
                }
            };
            dfs(dfs, 0.0);
        });
        for (auto& f : found) {
            std::vector<int> cyc;
            for (int x : f) {
                if (x >= 0) {
                    cyc.push_back(x);
                    continue;
                }
                forbid_cycle(cyc);
                ++growths_;
                cyc.clear();
            }
        }
    }

    // Forbids every cycle of predecessor links and cuts it.
    bool grow_on_cycles() {
        const size_t S = states_.size();
        std::vector<uint32_t> mark(S, 0);
        uint32_t stamp = 0;
        bool found = false;
        for (size_t s0 = 0; s0 < S; ++s0) {
            if (mark[s0]) continue;
            ++stamp;
            int s = static_cast<int>(s0);
            while (s >= 0 && !mark[s]) {
                mark[s] = stamp;
                s = states_[s].pred;
            }
            if (s < 0 || mark[s] != stamp) continue;
            std::vector<int> cyc;
            int t = s;
            do {
                cyc.push_back(states_[t].node);
                t = states_[t].pred;
            } while (t != s);
            forbid_cycle(cyc);
            states_[s].pred = -1;
            cut_ = true;
            found = true;
            ++growths_;
        }
        return found;
    }

    // Adds far pairs that violate the optimality condition until none do.
    void certify() {
        rounds_ = 0;
        const Vec dual = detail::dual_unit(*g_.spec, g_.x, g_.y);
        for (;;) {
            Vec src(g_.total(), kInf), dst(g_.total(), kInf);
            for (const State& st : states_)
                if (st.node != g_.Y()) src[st.node] = std::min(src[st.node], st.D);
            for (int b = 0; b < g_.n; ++b) {
                int t = find_state(b, 0);
                if (t >= 0) dst[b] = states_[t].D;
            }
            dst[g_.Y()] = states_[kY].D;
            const double mu = states_[kY].D / g_.dist(g_.X(), g_.Y());
            auto viol = detail::certificate_violations(g_, opts_.candidate_radius, delta_, src, dst, weight(), no_keep,
                                                       allowed(), dual, mu,
                                                       std::max(2.0, opts_.candidate_radius / 2), ex_);
            if (viol.empty()) return;
            if (++rounds_ > 100) throw ResourceError("optimality certificate did not converge");
            auto w = weight();
            for (auto [a, b] : viol) {
                adj_.add(a, b, w(a, b));
                rev_[b].push_back(a);
                push_node(a);
            }
            settle();
        }
    }

    std::vector<int> extract() const {
        if (!(states_[kY].D < kInf)) throw ResourceError("no path found between the endpoints");
        std::vector<int> seq;
        int s = kY;
        size_t guard = 0;
        while (s >= 0) {
            seq.push_back(states_[s].node);
            if (s == kX) break;
            s = states_[s].pred;
            if (++guard > states_.size() + 2) throw ResourceError("predecessor chain contains a cycle");
        }
        if (seq.back() != g_.X()) throw ResourceError("broken predecessor chain");
        std::reverse(seq.begin(), seq.end());
        return seq;
    }

    const Nodes& g_;
    double delta_;
    const SolverOptions& opts_;
    Exec ex_;
    std::vector<std::vector<int>> nb_;
    std::vector<int> remembered_;
    std::vector<int> newly_;
    std::vector<char> changed_flag_;
    std::vector<int> changed_;
    detail::Adjacency adj_;
    std::vector<std::vector<int>> rev_;
    std::vector<State> states_;
    std::vector<std::vector<int>> at_;
    std::vector<char> inq_;
    std::deque<int> q_;
    bool cut_ = false;
    int rounds_ = 0;
    int growths_ = 0;
};

bool same_point(const double* a, const Vec& b) {
    for (size_t i = 0; i < b.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace

GeodesicResult solve_rewards_window(const NormSpec& spec, const PointCloud& cloud, const Vec& x, const Vec& y,
                                    double epsilon, const SolverOptions& opts, Exec ex) {
    const int d = spec.d();
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        throw InvalidArgument("endpoint dimension mismatch");
    if (cloud.size() > 0 && cloud.d != d) throw InvalidArgument("cloud dimension mismatch");
    if (x == y) throw InvalidArgument("endpoints must differ");
    if (opts.max_memory < 1 || opts.max_memory > 64) throw InvalidArgument("max_memory must be in [1, 64]");
    const double delta = reward_delta(d, epsilon);
    if (opts.mode == SolverMode::exact_complete && cloud.size() + 2 > opts.max_nodes)
        throw ResourceError("exact-complete mode needs " + std::to_string(cloud.size() + 2) +
                            " nodes, max_nodes is " + std::to_string(opts.max_nodes));
    // points sitting exactly on an endpoint are collected for free
    PointCloud pts;
    pts.d = d;
    pts.box = cloud.box;
    pts.seed = cloud.seed;
    pts.intensity = cloud.intensity;
    int on_ends = 0;
    for (size_t k = 0; k < cloud.size(); ++k) {
        if (same_point(cloud.point(k), x) || same_point(cloud.point(k), y)) ++on_ends;
        else pts.push(cloud.point(k));
    }
    Nodes g(spec, pts, x, y);
    RewardsSolver solver(g, delta, opts, ex);
    GeodesicResult res = solver.run();
    res.graph_value -= delta * on_ends;
    res.n_length = path_length(spec, res.path);
    res.reward_count = count_rewards(spec, res.path, cloud);
    res.time = res.n_length - delta * res.reward_count;
    if (!cloud.box.lo.empty()) res.window = cloud.box;
    return res;
}

GeodesicResult geodesic_rewards(const NormSpec& spec, const PointSource& source, const Vec& x, const Vec& y,
                                double epsilon, const SolverOptions& opts, Exec ex) {
    return detail::solve_with_windows(source, x, y, opts, [&](const PointCloud& cloud) {
        return solve_rewards_window(spec, cloud, x, y, epsilon, opts, ex);
    });
}

PathStats path_stats(const NormSpec& spec, const Path& path, double s, double epsilon, double eta, double k_eta_volume,
                     double c) {
    if (!(s > 0)) throw InvalidArgument("s must be > 0");
    PathStats st;
    const double len = path_length(spec, path);
    long pts = 0;
    for (size_t i = 1; i + 1 < path.vertices.size(); ++i)
        if (path.interior_in_cloud[i]) ++pts;
    st.length_ratio = len / s;
    st.reward_rate = reward_delta(spec.d(), epsilon) * pts / s;
    st.chernov_flag = len <= (1 + eta) * s && pts > c * std::pow(k_eta_volume, 1.0 / spec.d()) * s;
    return st;
}

} // namespace fpp
