#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scenesmith {

// Deterministic RNG.  mt19937_64 output is fixed by the standard, but the
// std distributions are not, so uniform/normal are derived here directly to
// keep generated scenes byte-identical across platforms and libstdc++
// versions.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed), base_seed_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n); n must be > 0.  Modulo bias is negligible
    // for the small n used here but is avoided anyway by rejection.
    uint64_t below(uint64_t n) {
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller; caches the second value.
    double normal01() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal01(); }

    // Derives an independent stream; mixing uses splitmix64 so that nearby
    // keys do not produce correlated seeds.
    Rng fork(uint64_t key) const {
        uint64_t z = base_seed_ ^ (key + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return Rng(z);
    }

    uint64_t base_seed() const { return base_seed_; }

  private:
    std::mt19937_64 engine_;
    uint64_t base_seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace scenesmith
