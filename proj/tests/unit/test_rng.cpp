#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "newsprop/rng.hpp"

using namespace newsprop;

TEST_CASE("same seed yields the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += (a.next_u64() == b.next_u64());
    CHECK(same == 0);
}

TEST_CASE("uniform01 stays in [0,1) and covers the range") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("bounded covers [0, span) without gaps") {
    Rng rng(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng.bounded(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("uniform_int hits both inclusive endpoints") {
    Rng rng(13);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t v = rng.uniform_int(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        seen.insert(v);
    }
    CHECK(seen.count(-3) == 1);
    CHECK(seen.count(3) == 1);
    CHECK(seen.size() == 7);
}

TEST_CASE("normal has roughly zero mean and unit variance") {
    Rng rng(17);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("bernoulli matches its probability") {
    Rng rng(19);
    int hits = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3);
    CHECK(std::abs(static_cast<double>(hits) / n - 0.3) < 0.02);
}

TEST_CASE("shuffle permutes without losing elements") {
    Rng rng(23);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    const std::vector<int> before = v;
    rng.shuffle(v);
    CHECK(v != before);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == before);
}

TEST_CASE("shuffle is deterministic per seed") {
    std::vector<int> a(20), b(20);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    Rng r1(5), r2(5);
    r1.shuffle(a);
    r2.shuffle(b);
    CHECK(a == b);
}

TEST_CASE("state round-trips through text exactly") {
    Rng rng(99);
    for (int i = 0; i < 37; ++i) rng.next_u64();

    std::stringstream ss;
    rng.save_state(ss);
    Rng restored(0);
    restored.load_state(ss);

    CHECK(rng == restored);
    for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == restored.next_u64());
}

TEST_CASE("mix_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 10; ++base)
        for (std::uint64_t stream = 0; stream < 10; ++stream)
            seen.insert(mix_seed(base, stream));
    CHECK(seen.size() == 100);
}
