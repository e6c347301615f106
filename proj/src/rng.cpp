#include "fpp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fpp {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

double log_factorial(uint64_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

} // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t substream_key(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ull));
    h = splitmix64(h ^ (c + 0x8CB92BA72F3D8DD7ull));
    return h;
}

uint64_t Stream::next_u64() {
    if (avail_ == 0) {
        std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(ctr_), static_cast<uint32_t>(ctr_ >> 32), 0u, 0u};
        std::array<uint32_t, 2> key = {static_cast<uint32_t>(key_), static_cast<uint32_t>(key_ >> 32)};
        auto r = philox4x32(ctr, key);
        ++ctr_;
        buf_[0] = (static_cast<uint64_t>(r[0]) << 32) | r[1];
        buf_[1] = (static_cast<uint64_t>(r[2]) << 32) | r[3];
        avail_ = 2;
    }
    return buf_[2 - avail_--];
}

double Stream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Stream::normal() {
    // Box-Muller, one variate per pair of uniforms so the consumption is fixed.
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(2.0 * M_PI * uniform());
}

uint64_t Stream::poisson(double mean) {
    if (!(mean >= 0)) throw std::invalid_argument("poisson mean must be >= 0");
    if (mean == 0) return 0;
    if (mean < 30) {
        // sequential inversion
        double u = uniform();
        double p = std::exp(-mean), f = p;
        uint64_t k = 0;
        while (u > f && k < 1000) {
            ++k;
            p *= mean / static_cast<double>(k);
            f += p;
        }
        return k;
    }
    // PTRS transformed rejection (Hormann 1993)
    double slam = std::sqrt(mean), loglam = std::log(mean);
    double b = 0.931 + 2.53 * slam;
    double a = -0.059 + 0.02483 * b;
    double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double vr = 0.9277 - 3.6224 / (b - 2);
    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<uint64_t>(k);
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - log_factorial(static_cast<uint64_t>(k)))
            return static_cast<uint64_t>(k);
    }
}

} // namespace fpp
