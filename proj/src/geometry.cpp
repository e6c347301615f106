#include "fpp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <boost/math/special_functions/gamma.hpp>

#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr double kCoordTol = 1e-12;
constexpr long long kChunk = 4096;
constexpr uint64_t kVolumeTag = 0x564f4c;
constexpr uint64_t kIntegralTag = 0x494e54;

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// Orthonormal basis of {v supported on idx : v . n = 0}, n supported on idx.
std::vector<Vec> complement_in(const std::vector<int>& idx, const Vec& n, int d) {
    std::vector<Vec> out;
    if (idx.size() <= 1) return out;
    Vec nn = n;
    double nl = norm2(nn);
    for (auto& x : nn) x /= nl;
    std::vector<Vec> accepted{nn};
    for (int j : idx) {
        if (out.size() + 1 == idx.size()) break;
        Vec v(d, 0.0);
        v[j] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& a : accepted) {
                double c = dot(v, a);
                for (int i = 0; i < d; ++i) v[i] -= c * a[i];
            }
        double l = norm2(v);
        if (l < 1e-8) continue;
        for (auto& x : v) x /= l;
        accepted.push_back(v);
        out.push_back(v);
    }
    return out;
}

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

// Per-basis-vector scale factors of the rescaled caps; their product is eta^gamma.
Vec cap_scales(const NormSpec& spec, const Direction& dir, double eta) {
    Vec s(dir.h_basis.size());
    for (size_t j = 0; j < s.size(); ++j) {
        bool first = dir.block[j] == 0;
        switch (spec.kind()) {
        case NormSpec::Kind::one: s[j] = first ? 1.0 : eta; break;
        case NormSpec::Kind::inf: s[j] = first ? eta : 1.0; break;
        default: s[j] = first ? std::sqrt(eta) : std::pow(eta, 1.0 / spec.p()); break;
        }
    }
    return s;
}

struct CapCounts {
    long long n = 0, k_hits = 0, m_hits = 0;
    double k_reach = 0; // max |w_j| / half_width over K hits
};

CapCounts count_caps(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc,
                     double half_width) {
    const int d = dir.d();
    const int m = d - 1;
    const Vec scale = cap_scales(spec, dir, eta);
    const long long chunks = (mc.samples + kChunk - 1) / kChunk;
    std::vector<CapCounts> part(chunks);
    for_each_index(chunks, mc.exec, [&](long long c) {
        Stream rs(mc.seed, kVolumeTag, static_cast<uint64_t>(c));
        long long n = std::min(kChunk, mc.samples - c * kChunk);
        Vec w(m), xp(d), xm(d);
        CapCounts cc;
        cc.n = n;
        for (long long s = 0; s < n; ++s) {
            for (int j = 0; j < m; ++j) w[j] = rs.uniform(-half_width, half_width);
            for (int i = 0; i < d; ++i) {
                double v = 0;
                for (int j = 0; j < m; ++j) v += scale[j] * w[j] * dir.h_basis[j][i];
                xp[i] = dir.u[i] + v;
                xm[i] = dir.u[i] - v;
            }
            if (spec(xp.data()) <= 1.0 + eta) {
                ++cc.k_hits;
                for (int j = 0; j < m; ++j) cc.k_reach = std::max(cc.k_reach, std::abs(w[j]) / half_width);
                if (spec(xm.data()) <= 1.0 + eta) ++cc.m_hits;
            }
        }
        part[c] = cc;
    });
    CapCounts tot;
    for (const auto& c : part) {
        tot.n += c.n;
        tot.k_hits += c.k_hits;
        tot.m_hits += c.m_hits;
        tot.k_reach = std::max(tot.k_reach, c.k_reach);
    }
    return tot;
}

std::pair<VolumeEstimate, VolumeEstimate> cap_volumes(const NormSpec& spec, const Direction& dir, double eta,
                                                      const MCParams& mc) {
    if (!(eta > 0)) throw InvalidArgument("eta must be > 0");
    if (mc.samples < 1) throw InvalidArgument("samples must be positive");
    const int m = dir.d() - 1;
    double hw = std::sqrt(double(dir.d())) * (2.0 + eta);
    CapCounts cc;
    // The rescaled cap sits inside this box in every tested case; the box is
    // doubled if hits come close to its faces.
    for (int tries = 0; tries < 8; ++tries) {
        cc = count_caps(spec, dir, eta, mc, hw);
        if (cc.k_reach < 0.9) break;
        hw *= 2;
    }
    const Vec scale = cap_scales(spec, dir, eta);
    double jac = 1;
    for (double s : scale) jac *= s;
    double box = std::pow(2 * hw, m) * jac;
    auto make = [&](long long hits) {
        VolumeEstimate v;
        double f = double(hits) / double(cc.n);
        v.value = box * f;
        v.std_err = box * std::sqrt(f * (1 - f) / double(cc.n));
        v.samples = cc.n;
        v.eta = eta;
        return v;
    };
    return {make(cc.k_hits), make(cc.m_hits)};
}

// Half-width of a box in the rescaled frame that holds the whole cap.
double cap_half_width(const NormSpec& spec, const Direction& dir, double eta) {
    double hw = std::sqrt(double(dir.d())) * (2.0 + eta);
    MCParams probe;
    probe.samples = 20000;
    probe.seed = 0x70726f6265;
    probe.exec = Exec::serial;
    for (int tries = 0; tries < 8; ++tries) {
        if (count_caps(spec, dir, eta, probe, hw).k_reach < 0.9) break;
        hw *= 2;
    }
    return hw;
}

// Pool adjacent violators for a non-increasing fit.
Vec isotonic_decreasing(const Vec& y) {
    std::vector<double> val, wt;
    std::vector<int> len;
    for (double v : y) {
        val.push_back(v);
        wt.push_back(1);
        len.push_back(1);
        while (val.size() > 1 && val[val.size() - 2] < val.back()) {
            size_t k = val.size() - 1;
            double w = wt[k - 1] + wt[k];
            val[k - 1] = (wt[k - 1] * val[k - 1] + wt[k] * val[k]) / w;
            wt[k - 1] = w;
            len[k - 1] += len[k];
            val.pop_back();
            wt.pop_back();
            len.pop_back();
        }
    }
    Vec out;
    for (size_t k = 0; k < val.size(); ++k)
        for (int i = 0; i < len[k]; ++i) out.push_back(val[k]);
    return out;
}

// Piecewise linear interpolation of log(y) against log(eta).
double loglog_interp(const Vec& eta, const Vec& y, double x) {
    if (x <= eta.front()) return y.front();
    if (x >= eta.back()) return y.back();
    size_t k = std::upper_bound(eta.begin(), eta.end(), x) - eta.begin();
    double t = (std::log(x) - std::log(eta[k - 1])) / (std::log(eta[k]) - std::log(eta[k - 1]));
    return std::exp((1 - t) * std::log(y[k - 1]) + t * std::log(y[k]));
}

// Solves f(eta) = x for monotone f over the tabulated eta range.
template <class F>
Inverse bisect_eta(const Vec& eta, F f, double x, bool decreasing, const char* name) {
    double lo = eta.front(), hi = eta.back();
    double flo = f(lo), fhi = f(hi);
    double vmin = std::min(flo, fhi), vmax = std::max(flo, fhi);
    if (!(x >= vmin && x <= vmax))
        throw OutOfRange(std::string(name) + ": value outside tabulated range", vmin, vmax);
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        double mid = 0.5 * (a + b);
        double fm = f(std::exp(mid));
        bool go_right = decreasing ? (fm > x) : (fm < x);
        if (go_right)
            a = mid;
        else
            b = mid;
    }
    return {std::exp(0.5 * (a + b)), std::exp(b) - std::exp(a)};
}

} // namespace

CapSampler::CapSampler(const NormSpec& spec, const Direction& dir, double eta, bool symmetric)
    : spec_(spec), dir_(dir), eta_(eta), symmetric_(symmetric) {
    if (!(eta > 0)) throw InvalidArgument("eta must be > 0");
    half_width_ = cap_half_width(spec, dir, eta);
    scale_ = cap_scales(spec, dir, eta);
}

Vec CapSampler::sample(Stream& rs) const {
    const int d = dir_.d();
    const int m = d - 1;
    Vec w(m), v(d), xp(d), xm(d);
    for (long long tries = 0; tries < 100000000; ++tries) {
        for (int j = 0; j < m; ++j) w[j] = rs.uniform(-half_width_, half_width_);
        for (int i = 0; i < d; ++i) {
            double t = 0;
            for (int j = 0; j < m; ++j) t += scale_[j] * w[j] * dir_.h_basis[j][i];
            v[i] = t;
            xp[i] = dir_.u[i] + t;
            xm[i] = dir_.u[i] - t;
        }
        if (spec_(xp.data()) > 1.0 + eta_) continue;
        if (symmetric_ && spec_(xm.data()) > 1.0 + eta_) continue;
        return v;
    }
    throw std::runtime_error("cap sampler: no acceptance in 1e8 tries");
}

double Direction::u_star_norm2() const { return norm2(u_star); }

Direction support_data(const NormSpec& spec, const Vec& u_in) {
    const int d = spec.d();
    if (static_cast<int>(u_in.size()) != d) throw InvalidArgument("direction has wrong dimension");
    double nu = spec(u_in);
    if (!(nu > 0) || !std::isfinite(nu)) throw InvalidArgument("direction must be nonzero and finite");
    Direction dir;
    dir.u = u_in;
    for (auto& x : dir.u) x /= nu;

    double umax = 0;
    for (double x : dir.u) umax = std::max(umax, std::abs(x));
    std::vector<int> nonzero, zero, maxc, nonmax;
    for (int i = 0; i < d; ++i) {
        double a = std::abs(dir.u[i]);
        (a > kCoordTol ? nonzero : zero).push_back(i);
        (a >= umax - kCoordTol ? maxc : nonmax).push_back(i);
    }
    dir.d1 = static_cast<int>(nonzero.size());
    dir.d2 = d - dir.d1;
    dir.d3 = static_cast<int>(maxc.size());
    dir.d4 = d - dir.d3;

    dir.u_star.assign(d, 0.0);
    const std::vector<int>& support = spec.is_inf() ? maxc : nonzero;
    for (int i : support) {
        double s = sgn(dir.u[i]);
        switch (spec.kind()) {
        case NormSpec::Kind::one: dir.u_star[i] = s; break;
        case NormSpec::Kind::inf: dir.u_star[i] = s / dir.d3; break;
        case NormSpec::Kind::two: dir.u_star[i] = dir.u[i]; break;
        case NormSpec::Kind::general: dir.u_star[i] = s * std::pow(std::abs(dir.u[i]), spec.p() - 1); break;
        }
    }
    double c = dot(dir.u, dir.u_star);
    for (auto& x : dir.u_star) x /= c;

    dir.h_basis = complement_in(support, dir.u_star, d);
    dir.block.assign(dir.h_basis.size(), 0);
    const std::vector<int>& rest = spec.is_inf() ? nonmax : zero;
    for (int i : rest) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        dir.h_basis.push_back(e);
        dir.block.push_back(1);
    }
    return dir;
}

Exponents exponents(const NormSpec& spec, const Direction& dir) {
    Exponents e;
    const long long d = spec.d();
    switch (spec.kind()) {
    case NormSpec::Kind::one:
        e.gamma = Rational(dir.d2);
        e.flat_edge = dir.d1 == d;
        break;
    case NormSpec::Kind::inf:
        e.gamma = Rational(dir.d3 - 1);
        e.flat_edge = dir.d3 == 1;
        break;
    default:
        e.gamma = Rational(dir.d1 - 1, 2) + Rational(dir.d2) / spec.p_rational();
        e.flat_edge = false;
        break;
    }
    e.kappa = Rational(1) / (Rational(d) - e.gamma);
    return e;
}

Exponents exponents(const NormSpec& spec, const Vec& u) { return exponents(spec, support_data(spec, u)); }

VolumeEstimate k_volume(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc) {
    return cap_volumes(spec, dir, eta, mc).first;
}

VolumeEstimate m_volume(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc) {
    return cap_volumes(spec, dir, eta, mc).second;
}

Vec default_eta_grid() {
    Vec g(16);
    for (int i = 0; i < 16; ++i) g[i] = std::pow(10.0, -3.0 + 3.0 * i / 15.0);
    return g;
}

HProfile h_profile(const NormSpec& spec, const Direction& dir, const Vec& eta_grid, const MCParams& mc) {
    if (eta_grid.empty()) throw InvalidArgument("eta grid is empty");
    for (size_t i = 0; i < eta_grid.size(); ++i) {
        if (!(eta_grid[i] > 0)) throw InvalidArgument("eta grid must be positive");
        if (i > 0 && !(eta_grid[i] > eta_grid[i - 1])) throw InvalidArgument("eta grid must be strictly increasing");
    }
    HProfile hp;
    hp.d = spec.d();
    hp.eta = eta_grid;
    for (double eta : eta_grid) {
        auto [k, m] = cap_volumes(spec, dir, eta, mc);
        if (!(k.value > 0) || !(m.value > 0)) throw InvalidArgument("cap volume estimate is zero; raise samples");
        hp.k.push_back(k);
        hp.m.push_back(m);
        double s = std::pow(eta, -hp.d);
        hp.h.push_back(s * k.value);
        hp.hbar.push_back(s * m.value);
    }
    hp.h_iso = isotonic_decreasing(hp.h);
    hp.hbar_iso = isotonic_decreasing(hp.hbar);
    return hp;
}

double HProfile::h_at(double x) const { return loglog_interp(eta, h_iso, x); }
double HProfile::hbar_at(double x) const { return loglog_interp(eta, hbar_iso, x); }

Inverse HProfile::g(double x) const {
    return bisect_eta(eta, [this](double e) { return h_at(e); }, x, true, "g_u");
}

Inverse HProfile::gbar(double x) const {
    return bisect_eta(eta, [this](double e) { return hbar_at(e); }, x, true, "gbar_u");
}

Inverse HProfile::ell(double vol) const {
    // |K_eta| = eta^d h(eta); increasing since h is tabulated from a monotone set family
    Vec kv(eta.size());
    for (size_t i = 0; i < eta.size(); ++i) kv[i] = k[i].value;
    for (size_t i = 1; i < kv.size(); ++i) kv[i] = std::max(kv[i], kv[i - 1]);
    return bisect_eta(eta, [&](double e) { return loglog_interp(eta, kv, e); }, vol, false, "ell_u");
}

double unit_ball_volume(const NormSpec& spec) {
    const double d = spec.d();
    if (spec.is_inf()) return std::pow(2.0, d);
    double p = spec.p();
    return std::pow(2.0 * std::tgamma(1.0 + 1.0 / p), d) / std::tgamma(1.0 + d / p);
}

IntegralEstimate integral_I(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc) {
    if (!(eta > 0 && eta < 1)) throw InvalidArgument("eta must be in (0, 1)");
    const int d = spec.d();
    // Proposal exp(-c N(x)) with c <= eta keeps the weight bounded by Z.
    const double c = std::min(0.5, eta);
    const double log_z = std::log(unit_ball_volume(spec)) + std::lgamma(d + 1.0) - d * std::log(c);
    const long long chunks = (mc.samples + kChunk - 1) / kChunk;
    struct Acc {
        double s = 0, s2 = 0, sp = 0, sp2 = 0, wmax = 0;
        long long n = 0;
    };
    std::vector<Acc> part(chunks);
    const bool inf = spec.is_inf();
    const double p = spec.p();
    for_each_index(chunks, mc.exec, [&](long long ch) {
        Stream rs(mc.seed, kIntegralTag, static_cast<uint64_t>(ch));
        long long n = std::min(kChunk, mc.samples - ch * kChunk);
        Vec g(d);
        Acc a;
        a.n = n;
        for (long long s = 0; s < n; ++s) {
            // direction with the cone measure of the unit sphere of N
            for (int i = 0; i < d; ++i) {
                if (inf) {
                    g[i] = rs.uniform(-1.0, 1.0);
                } else {
                    double u1 = rs.uniform_pos();
                    double sign = rs.uniform() < 0.5 ? -1.0 : 1.0;
                    double gam = boost::math::gamma_p_inv(1.0 / p, u1);
                    g[i] = sign * std::pow(gam, 1.0 / p);
                }
            }
            double ng = spec(g.data());
            double r = boost::math::gamma_p_inv(double(d), rs.uniform_pos()) / c;
            double xu = 0;
            for (int i = 0; i < d; ++i) xu += r * g[i] / ng * dir.u_star[i];
            // log weight relative to Z; N(x) = r
            double lw = -(1.0 - c) * r + (1.0 - eta) * xu;
            double w = std::exp(lw);
            a.s += w;
            a.s2 += w * w;
            a.wmax = std::max(a.wmax, w);
            if (xu > 0) {
                a.sp += w;
                a.sp2 += w * w;
            }
        }
        part[ch] = a;
    });
    Acc t;
    for (const auto& a : part) {
        t.s += a.s;
        t.s2 += a.s2;
        t.sp += a.sp;
        t.sp2 += a.sp2;
        t.n += a.n;
        t.wmax = std::max(t.wmax, a.wmax);
    }
    const double z = std::exp(log_z);
    const double n = double(t.n);
    auto mean_err = [&](double s, double s2) {
        double mu = s / n;
        double var = std::max(0.0, s2 / n - mu * mu);
        return std::pair<double, double>{z * mu, z * std::sqrt(var / n)};
    };
    IntegralEstimate out;
    std::tie(out.i, out.i_err) = mean_err(t.s, t.s2);
    std::tie(out.i_plus, out.i_plus_err) = mean_err(t.sp, t.sp2);
    out.rate = c;
    out.max_weight = t.wmax;
    return out;
}

double determinant(Vec a, int n) {
    double det = 1;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (a[piv * n + k] == 0) return 0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        det *= a[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            double f = a[i * n + k] / a[k * n + k];
            for (int j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

Vec ScalingMap::apply(const Vec& x) const {
    Vec y(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) y[i] += matrix[i * d + j] * x[j];
    return y;
}

ScalingMap scaling_map(const NormSpec& spec, const Direction& dir, double epsilon) {
    if (!(epsilon > 0 && epsilon <= 1)) throw InvalidArgument("epsilon must be in (0, 1]");
    const int d = spec.d();
    const double kappa = to_double(exponents(spec, dir).kappa);
    // scale applied to the first and second blocks of H
    double f0 = 1, f1 = 1;
    switch (spec.kind()) {
    case NormSpec::Kind::two: f0 = f1 = std::pow(epsilon, kappa / 2); break;
    case NormSpec::Kind::general:
        if (dir.d1 != 1) throw UnsupportedCase("scaling map for p in (1, inf) requires u = +-e_i");
        f0 = f1 = std::pow(epsilon, kappa / spec.p());
        break;
    case NormSpec::Kind::one: f0 = 1; f1 = std::pow(epsilon, kappa); break;
    case NormSpec::Kind::inf:
        if (dir.d3 > 2) throw UnsupportedCase("scaling map for p = inf requires d3(u) in {1, 2}");
        f0 = std::pow(epsilon, kappa);
        f1 = 1;
        break;
    }
    const double a = std::pow(epsilon, -kappa + 1.0 / d);
    ScalingMap sm;
    sm.d = d;
    sm.matrix.assign(d * d, 0.0);
    // x = lambda u + sum_j c_j b_j with lambda = x . u*, c_j = b_j . (x - lambda u)
    for (int k = 0; k < d; ++k) {
        Vec x(d, 0.0);
        x[k] = 1.0;
        double lambda = dir.u_star[k];
        Vec rest = x;
        for (int i = 0; i < d; ++i) rest[i] -= lambda * dir.u[i];
        Vec y(d);
        for (int i = 0; i < d; ++i) y[i] = lambda * dir.u[i];
        for (size_t j = 0; j < dir.h_basis.size(); ++j) {
            double cj = dot(dir.h_basis[j], rest);
            double f = dir.block[j] == 0 ? f0 : f1;
            for (int i = 0; i < d; ++i) y[i] += f * cj * dir.h_basis[j][i];
        }
        for (int i = 0; i < d; ++i) sm.matrix[i * d + k] = a * y[i];
    }
    sm.det = determinant(sm.matrix, d);
    return sm;
}

} // namespace fpp
