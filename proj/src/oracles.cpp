#include "fpp/oracles.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>

namespace fpp {

namespace {

// w[i][j] for nodes 0..n-1 = cloud, n = x, n+1 = y
double enumerate(const std::vector<Vec>& w, size_t n) {
    const size_t src = n, dst = n + 1;
    double best = w[src][dst];
    std::vector<char> used(n, 0);
    std::function<void(size_t, double)> dfs = [&](size_t at, double acc) {
        best = std::min(best, acc + w[at][dst]);
        for (size_t k = 0; k < n; ++k) {
            if (used[k]) continue;
            used[k] = 1;
            dfs(k, acc + w[at][k]);
            used[k] = 0;
        }
    };
    dfs(src, 0.0);
    return best;
}

} // namespace

double brute_force_rewards(const NormSpec& spec, const PointCloud& cloud, const Vec& x, const Vec& y,
                           double epsilon) {
    const size_t n = cloud.size();
    const double delta = reward_delta(spec.d(), epsilon);
    std::vector<const double*> pt(n + 2);
    for (size_t i = 0; i < n; ++i) pt[i] = cloud.point(i);
    pt[n] = x.data();
    pt[n + 1] = y.data();
    std::vector<Vec> w(n + 2, Vec(n + 2));
    for (size_t i = 0; i < n + 2; ++i)
        for (size_t j = 0; j < n + 2; ++j) w[i][j] = spec.dist(pt[i], pt[j]) - (j < n ? delta : 0.0);
    return enumerate(w, n);
}

double brute_force_balls(const BooleanModel& model, const Vec& x, const Vec& y) {
    const PointCloud& cloud = model.cloud();
    const size_t n = cloud.size();
    std::vector<Vec> pt(n + 2);
    for (size_t i = 0; i < n; ++i) pt[i] = cloud.point_vec(i);
    pt[n] = x;
    pt[n + 1] = y;
    std::vector<Vec> w(n + 2, Vec(n + 2, 0.0));
    for (size_t i = 0; i < n + 2; ++i)
        for (size_t j = 0; j < n + 2; ++j)
            if (i != j) w[i][j] = segment_outside_length(model, pt[i], pt[j]);
    return enumerate(w, n);
}

std::vector<int> brute_force_components(const NormSpec& spec, const PointCloud& cloud, double epsilon) {
    const size_t n = cloud.size();
    const double diam = reward_delta(spec.d(), epsilon);
    std::vector<int> label(n);
    std::iota(label.begin(), label.end(), 0);
    // relabel to the minimum until nothing changes
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (spec.dist(cloud.point(i), cloud.point(j)) <= diam + 1e-12 && label[j] < label[i]) {
                    label[i] = label[j];
                    changed = true;
                }
    }
    return label;
}

} // namespace fpp
