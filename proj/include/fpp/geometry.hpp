#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fpp/norm.hpp"
#include "fpp/parallel.hpp"
#include "fpp/rng.hpp"

namespace fpp {

// Unit direction u with the supporting hyperplane H = (u*)^perp.
// h_basis is orthonormal. For p < inf its first d1 - 1 vectors span
// H1 = H ∩ span(e_i : u_i != 0) and the remaining d2 span the zero
// coordinates (H2). For p = inf the first d3 - 1 span H3 (inside the
// maximal coordinates) and the remaining d4 span H4.
struct Direction {
    Vec u;
    Vec u_star;
    std::vector<Vec> h_basis;
    int d1 = 0, d2 = 0, d3 = 0, d4 = 0;
    // 0 for the first block (H1 or H3), 1 for the second (H2 or H4).
    std::vector<int> block;

    int d() const { return static_cast<int>(u.size()); }
    double u_star_norm2() const;
};

Direction support_data(const NormSpec& spec, const Vec& u);

struct Exponents {
    Rational kappa;
    Rational gamma;
    bool flat_edge = false;
};

Exponents exponents(const NormSpec& spec, const Direction& dir);
Exponents exponents(const NormSpec& spec, const Vec& u);

struct MCParams {
    long long samples = 100000;
    uint64_t seed = 1;
    Exec exec = Exec::parallel;
};

struct VolumeEstimate {
    double value = 0;
    double std_err = 0;
    long long samples = 0;
    double eta = 0;

    double ci_lo() const { return value - 2.58 * std_err; }
    double ci_hi() const { return value + 2.58 * std_err; }
};

// Both estimates share the sample stream, so m_volume <= k_volume holds
// sample by sample for equal (seed, eta).
VolumeEstimate k_volume(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc);
VolumeEstimate m_volume(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc);

// Uniform points of M_eta(u) (symmetric) or K_eta(u), by rejection in a box
// of the rescaled cap frame. Returned vectors lie in H.
class CapSampler {
public:
    CapSampler(const NormSpec& spec, const Direction& dir, double eta, bool symmetric = true);
    Vec sample(Stream& rs) const;

private:
    NormSpec spec_;
    Direction dir_;
    double eta_;
    bool symmetric_;
    double half_width_;
    Vec scale_;
};

struct OutOfRange : std::out_of_range {
    OutOfRange(const std::string& what, double lo_, double hi_)
        : std::out_of_range(what), lo(lo_), hi(hi_) {}
    double lo, hi;
};

struct Inverse {
    double value;
    double bracket; // width of the final bisection bracket in eta
};

// Tabulated h_u(eta) = eta^-d |K_eta| and hbar_u(eta) = eta^-d |M_eta|.
struct HProfile {
    int d = 0;
    Vec eta;
    std::vector<VolumeEstimate> k, m;
    Vec h, hbar;         // raw table
    Vec h_iso, hbar_iso; // projected onto non-increasing sequences

    double h_at(double eta) const;
    double hbar_at(double eta) const;
    Inverse g(double x) const;
    Inverse gbar(double x) const;
    // inverse of eta -> |K_eta|
    Inverse ell(double vol) const;
};

HProfile h_profile(const NormSpec& spec, const Direction& dir, const Vec& eta_grid, const MCParams& mc);

// Default tabulation grid: 16 log-spaced points in [1e-3, 1].
Vec default_eta_grid();

struct IntegralEstimate {
    double i_plus = 0, i_plus_err = 0;
    double i = 0, i_err = 0;
    double rate = 0;       // proposal density is proportional to exp(-rate N(x))
    double max_weight = 0; // largest normalized weight seen
};

IntegralEstimate integral_I(const NormSpec& spec, const Direction& dir, double eta, const MCParams& mc);

// psi as a row-major d x d matrix.
struct ScalingMap {
    int d = 0;
    Vec matrix;
    double det = 0;

    Vec apply(const Vec& x) const;
};

ScalingMap scaling_map(const NormSpec& spec, const Direction& dir, double epsilon);

// |B_N(1)| in R^d
double unit_ball_volume(const NormSpec& spec);

double determinant(Vec a, int n);

} // namespace fpp
