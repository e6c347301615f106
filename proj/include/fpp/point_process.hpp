#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpp/norm.hpp"

namespace fpp {

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec lo_, Vec hi_);
    int d() const { return static_cast<int>(lo.size()); }
    double volume() const;
    bool contains(const double* x) const;
    // Box hull of a and b dilated by margin on every side.
    static Box hull(const Vec& a, const Vec& b, double margin);
};

struct PointCloud {
    int d = 0;
    Vec coords; // row-major, size() * d
    Box box;
    uint64_t seed = 0;
    double intensity = 1.0;

    size_t size() const { return d ? coords.size() / d : 0; }
    const double* point(size_t i) const { return coords.data() + i * d; }
    Vec point_vec(size_t i) const { return Vec(point(i), point(i) + d); }
    void push(const double* x) { coords.insert(coords.end(), x, x + d); }
};

PointCloud sample_poisson(const Box& box, double intensity, uint64_t seed);

// A fixed realization of the process on all of R^d. Space is tiled by cubes
// of side `tile`; each tile draws its points from its own substream, so any
// window sees the same points whatever its size.
class PoissonField {
public:
    PoissonField(int d, uint64_t seed, double intensity = 1.0, double tile = 2.0);
    // Points inside box (closed), ordered by tile then draw order.
    PointCloud sample(const Box& box) const;
    int d() const { return d_; }
    uint64_t seed() const { return seed_; }

private:
    int d_;
    uint64_t seed_;
    double intensity_;
    double tile_;
};

class SpatialIndex {
public:
    SpatialIndex() = default;
    SpatialIndex(const PointCloud& cloud, double cell_size = 1.0);

    double cell_size() const { return cell_; }
    size_t size() const { return n_; }
    const double* point(size_t i) const { return pts_ + i * d_; }

    // Indices with N(x - center) <= radius, ascending.
    std::vector<int> query_ball(const NormSpec& spec, const double* center, double radius) const;
    // Indices with min_t N(x - a - t (b - a)) <= radius, ascending.
    std::vector<int> query_segment_tube(const NormSpec& spec, const double* a, const double* b, double radius) const;

    // Visits indices in the cells meeting the axis box [lo, hi]; no filtering.
    template <class F>
    void for_each_in_box(const double* lo, const double* hi, F&& f) const;
    // Like for_each_in_box but stops once pred returns true; returns whether it did.
    template <class F>
    bool any_in_box(const double* lo, const double* hi, F&& pred) const;

private:
    void cell_range(const double* lo, const double* hi, std::vector<int>& c0, std::vector<int>& c1) const;

    int d_ = 0;
    size_t n_ = 0;
    const double* pts_ = nullptr;
    double cell_ = 1.0;
    Vec origin_;
    std::vector<int> dims_;
    std::vector<int> start_; // CSR offsets per cell
    std::vector<int> items_;
};

SpatialIndex build_index(const PointCloud& cloud, double cell_size = 1.0);

inline std::vector<int> query_ball(const SpatialIndex& idx, const NormSpec& spec, const Vec& center, double r) {
    return idx.query_ball(spec, center.data(), r);
}

inline std::vector<int> query_segment_tube(const SpatialIndex& idx, const NormSpec& spec, const Vec& a, const Vec& b,
                                           double r) {
    return idx.query_segment_tube(spec, a.data(), b.data(), r);
}

// min over t in [0,1] of N(x - a - t (b - a)) and the minimizing t.
double segment_distance(const NormSpec& spec, const double* a, const double* b, const double* x, double* t_out = nullptr);

void dump_cloud(std::ostream& os, const PointCloud& cloud);
PointCloud load_cloud(std::istream& is);

template <class F>
bool SpatialIndex::any_in_box(const double* lo, const double* hi, F&& pred) const {
    if (n_ == 0) return false;
    std::vector<int> c0, c1;
    cell_range(lo, hi, c0, c1);
    for (int i = 0; i < d_; ++i)
        if (c0[i] > c1[i]) return false;
    std::vector<int> c = c0;
    for (;;) {
        int flat = 0;
        for (int i = 0; i < d_; ++i) flat = flat * dims_[i] + c[i];
        for (int k = start_[flat]; k < start_[flat + 1]; ++k)
            if (pred(items_[k])) return true;
        int i = d_ - 1;
        while (i >= 0 && c[i] == c1[i]) {
            c[i] = c0[i];
            --i;
        }
        if (i < 0) return false;
        ++c[i];
    }
}

template <class F>
void SpatialIndex::for_each_in_box(const double* lo, const double* hi, F&& f) const {
    any_in_box(lo, hi, [&](int k) {
        f(k);
        return false;
    });
}

} // namespace fpp
