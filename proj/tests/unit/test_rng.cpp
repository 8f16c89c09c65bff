#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cspsamp/oracle.hpp"
#include "cspsamp/rng.hpp"

using namespace cspsamp;

TEST_SUITE("rng") {
  TEST_CASE("same seed reproduces the stream") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
  }

  TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (a.next() == b.next());
    CHECK(same == 0);
  }

  TEST_CASE("below stays in range and below(1) is zero") {
    Rng rng(99);
    for (int i = 0; i < 10000; ++i) {
      CHECK(rng.below(1) == 0);
      const uint64_t n = 2 + rng.next() % 1000;
      CHECK(rng.below(n) < n);
    }
  }

  TEST_CASE("below(7) is unbiased") {
    Rng rng(7);
    const int draws = 140000;
    std::vector<int> counts(7, 0);
    for (int i = 0; i < draws; ++i) ++counts[rng.below(7)];
    const double expected = draws / 7.0;
    double chi2 = 0.0;
    for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi_square_pvalue(chi2, 6) > 1e-6);
  }

  TEST_CASE("unit is in [0,1) with plausible mean") {
    Rng rng(5);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = rng.unit();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("stream seeds are distinct across indices") {
    const uint64_t master = 42;
    std::vector<uint64_t> seeds;
    seeds.reserve(100000);
    for (uint64_t i = 0; i < 100000; ++i) seeds.push_back(Rng::stream_seed(master, i));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  }

  TEST_CASE("stream seeds differ from the master-seeded stream") {
    Rng master(42);
    Rng child(Rng::stream_seed(42, 0));
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (master.next() == child.next());
    CHECK(same == 0);
  }
}
