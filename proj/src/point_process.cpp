#include "fpp/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr uint64_t kCountTag = 0x434e54;
constexpr uint64_t kPointTag = 0x505453;
constexpr uint64_t kTileTag = 0x54494c;

} // namespace

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.empty()) throw InvalidArgument("box corners must have equal nonzero length");
    for (size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw InvalidArgument("box must satisfy lo < hi on every axis");
}

double Box::volume() const {
    double v = 1;
    for (size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

bool Box::contains(const double* x) const {
    for (size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

Box Box::hull(const Vec& a, const Vec& b, double margin) {
    Vec lo(a.size()), hi(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        lo[i] = std::min(a[i], b[i]) - margin;
        hi[i] = std::max(a[i], b[i]) + margin;
    }
    return Box(lo, hi);
}

PointCloud sample_poisson(const Box& box, double intensity, uint64_t seed) {
    if (!(intensity > 0)) throw InvalidArgument("intensity must be > 0");
    if (box.lo.empty()) throw InvalidArgument("empty box");
    const double mean = intensity * box.volume();
    if (!(mean > 0)) throw InvalidArgument("box has zero volume");
    if (mean > 1e9) throw TooLarge("expected point count exceeds 1e9");
    PointCloud pc;
    pc.d = box.d();
    pc.box = box;
    pc.seed = seed;
    pc.intensity = intensity;
    Stream cs(seed, kCountTag);
    uint64_t n = cs.poisson(mean);
    Stream ps(seed, kPointTag);
    pc.coords.resize(n * pc.d);
    for (uint64_t k = 0; k < n; ++k)
        for (int i = 0; i < pc.d; ++i) pc.coords[k * pc.d + i] = ps.uniform(box.lo[i], box.hi[i]);
    return pc;
}

PoissonField::PoissonField(int d, uint64_t seed, double intensity, double tile)
    : d_(d), seed_(seed), intensity_(intensity), tile_(tile) {
    if (d < 1) throw InvalidArgument("dimension must be positive");
    if (!(intensity > 0)) throw InvalidArgument("intensity must be > 0");
    if (!(tile > 0)) throw InvalidArgument("tile must be > 0");
}

PointCloud PoissonField::sample(const Box& box) const {
    if (box.d() != d_) throw InvalidArgument("box dimension mismatch");
    const double mean = intensity_ * box.volume();
    if (mean > 1e9) throw TooLarge("expected point count exceeds 1e9");
    PointCloud pc;
    pc.d = d_;
    pc.box = box;
    pc.seed = seed_;
    pc.intensity = intensity_;
    std::vector<long long> t0(d_), t1(d_), t(d_);
    for (int i = 0; i < d_; ++i) {
        t0[i] = static_cast<long long>(std::floor(box.lo[i] / tile_));
        t1[i] = static_cast<long long>(std::floor(box.hi[i] / tile_));
    }
    t = t0;
    const double tile_mean = intensity_ * std::pow(tile_, d_);
    Vec x(d_);
    for (;;) {
        uint64_t h = kTileTag;
        for (int i = 0; i < d_; ++i) h = splitmix64(h ^ static_cast<uint64_t>(t[i]));
        Stream rs(seed_, h);
        uint64_t n = rs.poisson(tile_mean);
        for (uint64_t k = 0; k < n; ++k) {
            for (int i = 0; i < d_; ++i) x[i] = (static_cast<double>(t[i]) + rs.uniform()) * tile_;
            if (box.contains(x.data())) pc.push(x.data());
        }
        int i = d_ - 1;
        while (i >= 0 && t[i] == t1[i]) {
            t[i] = t0[i];
            --i;
        }
        if (i < 0) break;
        ++t[i];
    }
    return pc;
}

SpatialIndex::SpatialIndex(const PointCloud& cloud, double cell_size)
    : d_(cloud.d), n_(cloud.size()), pts_(cloud.coords.data()), cell_(cell_size) {
    if (!(cell_size > 0)) throw InvalidArgument("cell size must be > 0");
    if (d_ == 0) return;
    origin_.assign(d_, 0.0);
    dims_.assign(d_, 1);
    Vec hi(d_);
    if (!cloud.box.lo.empty()) {
        origin_ = cloud.box.lo;
        hi = cloud.box.hi;
    } else if (n_ > 0) {
        origin_.assign(pts_, pts_ + d_);
        hi = origin_;
    }
    for (size_t k = 0; k < n_; ++k)
        for (int i = 0; i < d_; ++i) {
            origin_[i] = std::min(origin_[i], pts_[k * d_ + i]);
            hi[i] = std::max(hi[i], pts_[k * d_ + i]);
        }
    size_t total = 1;
    for (int i = 0; i < d_; ++i) {
        dims_[i] = std::max(1, static_cast<int>(std::floor((hi[i] - origin_[i]) / cell_)) + 1);
        total *= static_cast<size_t>(dims_[i]);
    }
    if (total > (size_t(1) << 28)) throw TooLarge("spatial index grid too large; raise cell size");
    std::vector<int> cell_of(n_);
    start_.assign(total + 1, 0);
    for (size_t k = 0; k < n_; ++k) {
        int flat = 0;
        for (int i = 0; i < d_; ++i) {
            int c = static_cast<int>(std::floor((pts_[k * d_ + i] - origin_[i]) / cell_));
            c = std::clamp(c, 0, dims_[i] - 1);
            flat = flat * dims_[i] + c;
        }
        cell_of[k] = flat;
        ++start_[flat + 1];
    }
    for (size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    items_.resize(n_);
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (size_t k = 0; k < n_; ++k) items_[fill[cell_of[k]]++] = static_cast<int>(k);
}

void SpatialIndex::cell_range(const double* lo, const double* hi, std::vector<int>& c0, std::vector<int>& c1) const {
    c0.resize(d_);
    c1.resize(d_);
    for (int i = 0; i < d_; ++i) {
        double a = std::floor((lo[i] - origin_[i]) / cell_);
        double b = std::floor((hi[i] - origin_[i]) / cell_);
        c0[i] = static_cast<int>(std::clamp(a, 0.0, double(dims_[i] - 1)));
        c1[i] = static_cast<int>(std::clamp(b, 0.0, double(dims_[i] - 1)));
        if (b < 0 || a > dims_[i] - 1) {
            c0[i] = 1;
            c1[i] = 0;
        }
    }
}

SpatialIndex build_index(const PointCloud& cloud, double cell_size) { return SpatialIndex(cloud, cell_size); }

std::vector<int> SpatialIndex::query_ball(const NormSpec& spec, const double* center, double radius) const {
    std::vector<int> out;
    if (n_ == 0 || radius < 0) return out;
    // |x_i| <= N(x) for every p-norm, so the axis box of half-width radius is enough
    Vec lo(d_), hi(d_);
    for (int i = 0; i < d_; ++i) {
        lo[i] = center[i] - radius;
        hi[i] = center[i] + radius;
    }
    for_each_in_box(lo.data(), hi.data(), [&](int k) {
        if (spec.dist(center, point(k)) <= radius) out.push_back(k);
    });
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> SpatialIndex::query_segment_tube(const NormSpec& spec, const double* a, const double* b,
                                                  double radius) const {
    std::vector<int> out;
    if (n_ == 0 || radius < 0) return out;
    Vec lo(d_), hi(d_);
    for (int i = 0; i < d_; ++i) {
        lo[i] = std::min(a[i], b[i]) - radius;
        hi[i] = std::max(a[i], b[i]) + radius;
    }
    for_each_in_box(lo.data(), hi.data(), [&](int k) {
        if (segment_distance(spec, a, b, point(k)) <= radius) out.push_back(k);
    });
    std::sort(out.begin(), out.end());
    return out;
}

double segment_distance(const NormSpec& spec, const double* a, const double* b, const double* x, double* t_out) {
    const int d = spec.d();
    double t;
    Vec y(d);
    auto f = [&](double s) {
        for (int i = 0; i < d; ++i) y[i] = x[i] - a[i] - s * (b[i] - a[i]);
        return spec(y.data());
    };
    if (spec.kind() == NormSpec::Kind::two) {
        double num = 0, den = 0;
        for (int i = 0; i < d; ++i) {
            num += (x[i] - a[i]) * (b[i] - a[i]);
            den += (b[i] - a[i]) * (b[i] - a[i]);
        }
        t = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    } else {
        // golden section on the convex function t -> N(x - a - t (b - a))
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = 0, hi = 1;
        double c = hi - g * (hi - lo), e = lo + g * (hi - lo);
        double fc = f(c), fe = f(e);
        while (hi - lo > 1e-12) {
            if (fc <= fe) {
                hi = e;
                e = c;
                fe = fc;
                c = hi - g * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = e;
                fc = fe;
                e = lo + g * (hi - lo);
                fe = f(e);
            }
        }
        t = 0.5 * (lo + hi);
        double f0 = f(0), f1 = f(1), ft = f(t);
        if (f0 <= ft && f0 <= f1) t = 0;
        else if (f1 < ft) t = 1;
    }
    if (t_out) *t_out = t;
    return f(t);
}

void dump_cloud(std::ostream& os, const PointCloud& pc) {
    std::ostringstream line;
    line << std::setprecision(17);
    line << pc.d << ' ' << pc.seed << ' ' << pc.intensity;
    for (double v : pc.box.lo) line << ' ' << v;
    for (double v : pc.box.hi) line << ' ' << v;
    os << line.str() << '\n';
    for (size_t k = 0; k < pc.size(); ++k) {
        std::ostringstream l;
        l << std::setprecision(17);
        for (int i = 0; i < pc.d; ++i) l << (i ? " " : "") << pc.point(k)[i];
        os << l.str() << '\n';
    }
}

PointCloud load_cloud(std::istream& is) {
    PointCloud pc;
    std::string header;
    if (!std::getline(is, header)) throw InvalidArgument("cloud file is empty");
    std::istringstream hs(header);
    if (!(hs >> pc.d >> pc.seed >> pc.intensity) || pc.d < 1) throw InvalidArgument("bad cloud header");
    Vec lo(pc.d), hi(pc.d);
    for (auto& v : lo)
        if (!(hs >> v)) throw InvalidArgument("bad cloud header");
    for (auto& v : hi)
        if (!(hs >> v)) throw InvalidArgument("bad cloud header");
    pc.box = Box(lo, hi);
    std::string line;
    Vec x(pc.d);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        for (auto& v : x)
            if (!(ls >> v)) throw InvalidArgument("bad cloud point line");
        pc.push(x.data());
    }
    return pc;
}

} // namespace fpp
