#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fpp {

// Philox4x32-10 (Salmon et al., SC'11). Pure function of (key, counter).
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);

uint64_t splitmix64(uint64_t x);

// Mixes a seed and a list of stream indices into one 64-bit key.
uint64_t substream_key(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

// Sequential view on the counter space of one key. Uniforms use the top 53
// bits of a 64-bit word: u = (w >> 11) * 2^-53, so u is in [0, 1).
class Stream {
public:
    explicit Stream(uint64_t key) : key_(key) {}
    Stream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0)
        : key_(substream_key(seed, a, b, c)) {}

    uint64_t next_u64();
    double uniform();
    // in (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double exponential() { return -std::log(uniform_pos()); }
    uint64_t poisson(double mean);

    uint64_t key() const { return key_; }
    uint64_t counter() const { return ctr_; }

private:
    uint64_t key_;
    uint64_t ctr_ = 0;
    uint64_t buf_[2] = {0, 0};
    int avail_ = 0;
};

} // namespace fpp
