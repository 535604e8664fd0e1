#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

#include "ecgraph/rng.hpp"

using namespace ecgraph;

TEST_SUITE("rng") {

  TEST_CASE("streams replay exactly for a seed") {
    Rng a = Rng::seeded(1234);
    Rng b = Rng::seeded(1234);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c = Rng::seeded(1235);
    bool differs = false;
    Rng a2 = Rng::seeded(1234);
    for (int i = 0; i < 100; ++i) differs = differs || a2.uniform() != c.uniform();
    CHECK(differs);
  }

  TEST_CASE("uniform stays inside its half-open range") {
    Rng rng = Rng::seeded(2);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
      double v = rng.uniform();
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(lo < 0.01); // actually fills the range
    CHECK(hi > 0.99);
    for (int i = 0; i < 1000; ++i) {
      double v = rng.uniform(-3.0, 7.0);
      CHECK(v >= -3.0);
      CHECK(v < 7.0);
    }
  }

  TEST_CASE("below covers 0..n-1 without bias artifacts") {
    Rng rng = Rng::seeded(3);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
      std::uint64_t v = rng.below(7);
      REQUIRE(v < 7);
      ++hits[std::size_t(v)];
    }
    for (int h : hits) CHECK(h > 700); // ~1000 expected per bucket
    CHECK(rng.below(1) == 0);
  }

  TEST_CASE("bernoulli respects its probability roughly") {
    Rng rng = Rng::seeded(4);
    int heads = 0;
    for (int i = 0; i < 10000; ++i) heads += rng.bernoulli(0.3) ? 1 : 0;
    CHECK(heads > 2700);
    CHECK(heads < 3300);
    Rng r2 = Rng::seeded(5);
    for (int i = 0; i < 100; ++i) {
      CHECK_FALSE(r2.bernoulli(0.0));
      CHECK(r2.bernoulli(1.0));
    }
  }

  TEST_CASE("normal draws have the right first two moments") {
    Rng rng = Rng::seeded(6);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      double v = rng.normal();
      sum += v;
      sq += v * v;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.1);
  }

  TEST_CASE("shuffle permutes without losing elements") {
    Rng rng = Rng::seeded(7);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[std::size_t(i)] = i;
    std::vector<int> orig = v;
    rng.shuffle(v);
    CHECK(v != orig); // 50! permutations, identity is essentially impossible
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == orig);
  }

  TEST_CASE("forked streams are reproducible and independent of the parent") {
    Rng parent1 = Rng::seeded(8);
    Rng parent2 = Rng::seeded(8);
    Rng f1 = parent1.fork(42);
    Rng f2 = parent2.fork(42);
    for (int i = 0; i < 50; ++i) CHECK(f1.uniform() == f2.uniform());

    // different salts give different streams
    Rng p3 = Rng::seeded(8);
    Rng g1 = p3.fork(1);
    Rng g2 = p3.fork(2);
    bool differs = false;
    for (int i = 0; i < 50; ++i) differs = differs || g1.uniform() != g2.uniform();
    CHECK(differs);

    // forking consumes nothing from the parent stream
    Rng p4 = Rng::seeded(8);
    Rng p5 = Rng::seeded(8);
    (void)p4.fork(9);
    (void)p4.fork(10);
    for (int i = 0; i < 20; ++i) CHECK(p4.uniform() == p5.uniform());
  }
}
