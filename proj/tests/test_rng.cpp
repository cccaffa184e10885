#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "scenesmith/rng.hpp"

using namespace scenesmith;

TEST_CASE("next_u64 reproduces the standard mt19937_64 stream") {
    Rng rng(5489);
    std::mt19937_64 reference(5489);
    for (int i = 0; i < 64; ++i) CHECK(rng.next_u64() == reference());
}

TEST_CASE("uniform01 stays inside [0, 1) and uses 53 bits") {
    Rng rng(1);
    std::mt19937_64 reference(1);
    for (int i = 0; i < 1000; ++i) {
        const double expected = std::ldexp(static_cast<double>(reference() >> 11), -53);
        const double v = rng.uniform01();
        CHECK(v == expected);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("uniform maps the unit draw to [lo, hi)") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform01();
        CHECK(b.uniform(-2.0, 3.0) == -2.0 + 5.0 * u);
    }
}

TEST_CASE("below covers its range uniformly enough") {
    Rng rng(11);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    // Expected 10000 per bucket; a 5% band is ~13 sigma.
    for (int c : counts) {
        CHECK(c > 9500);
        CHECK(c < 10500);
    }
}

TEST_CASE("normal01 has the Box-Muller moments and caches the spare") {
    Rng rng(23);
    // The spare must not leak between calls with interleaved uniform draws.
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal01();
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);

    Rng s(23);
    const double first = s.normal01();
    const double second = s.normal01();
    Rng t(23);
    CHECK(t.normal01() == first);
    CHECK(t.normal01() == second);
    CHECK(t.normal(1.0, 2.0) == 1.0 + 2.0 * s.normal01());
}

TEST_CASE("fork derives independent, reproducible streams") {
    const Rng base(99);
    Rng f1 = base.fork(0x10);
    Rng f1_again = base.fork(0x10);
    Rng f2 = base.fork(0x11);
    const uint64_t a = f1.next_u64();
    CHECK(f1_again.next_u64() == a);
    CHECK(f2.next_u64() != a);

    // Forking does not disturb the parent stream position.
    Rng parent(99);
    const uint64_t before = Rng(99).next_u64();
    (void)parent.fork(0x12);
    CHECK(parent.next_u64() == before);

    // Nearby keys decorrelate: low bit overlap between outputs.
    Rng n1 = base.fork(1);
    Rng n2 = base.fork(2);
    CHECK(n1.next_u64() != n2.next_u64());
}

TEST_CASE("base_seed survives forking") {
    const Rng base(1234);
    CHECK(base.base_seed() == 1234);
    CHECK(base.fork(5).base_seed() != 1234);
}
