#pragma once

#include <cmath>
#include <cstdint>

namespace ustatgof {

// SplitMix64 step, used both as a mixer for stream keys and to expand a
// single 64-bit key into generator state (Vigna's recommended seeding).
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream key from (seed, stream coordinates). Replication r of
// grid point g always gets the same key regardless of worker scheduling.
inline uint64_t stream_key(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint64_t s = seed;
    uint64_t k = splitmix64(s);
    s = k ^ (a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    k = splitmix64(s);
    s = k ^ (b * 0x9e3779b97f4a7c15ULL + 0x94d049bb133111ebULL);
    return splitmix64(s);
}

// xoshiro256++ (Blackman & Vigna, public domain), a small, fast, portable
// generator. One instance per Monte Carlo replication stream.
class RngStream {
  public:
    explicit RngStream(uint64_t key) {
        uint64_t s = key;
        for (auto& w : s_) w = splitmix64(s);
    }
    RngStream(uint64_t seed, uint64_t a, uint64_t b = 0) : RngStream(stream_key(seed, a, b)) {}

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe under log().
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal via Marsaglia's polar method; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // Gamma(shape, scale 1) via Marsaglia & Tsang (2000); the shape < 1 case
    // uses the standard boosting identity G(a) = G(a+1) * U^{1/a}.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ustatgof
