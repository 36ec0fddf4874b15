#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "icn/che.hpp"
#include "icn/errors.hpp"
#include "icn/popularity.hpp"
#include "icn/simulator.hpp"
#include "test_support.hpp"

using namespace icn;

namespace {

SimConfig config(std::int64_t requests, std::uint64_t seed = 1, int batches = 10) {
  SimConfig cfg;
  cfg.requests = requests;
  cfg.seed = seed;
  cfg.batches = batches;
  return cfg;
}

bool same(const SimResult& a, const SimResult& b) {
  if (a.caches.size() != b.caches.size()) return false;
  for (std::size_t i = 0; i < a.caches.size(); ++i) {
    if (a.caches[i].hits != b.caches[i].hits || a.caches[i].misses != b.caches[i].misses) {
      return false;
    }
  }
  return a.theta_overall.value == b.theta_overall.value &&
         a.theta_overall.half_width == b.theta_overall.half_width &&
         a.theta_local.value == b.theta_local.value &&
         a.warmup_requests == b.warmup_requests;
}

// Chi-square statistic of observed rank counts against the law.
double chi_square(const PopularityLaw& law, const std::vector<std::int64_t>& counts,
                  std::int64_t draws) {
  double stat = 0.0;
  const double w = law.total_weight();
  for (Rank n = 1; n <= law.catalogue_size(); ++n) {
    const double expect = static_cast<double>(draws) * law.popularity(n) / w;
    const double d = static_cast<double>(counts[static_cast<std::size_t>(n)]) - expect;
    stat += d * d / expect;
  }
  return stat;
}

}  // namespace

TEST_CASE("LRU cache keeps recency order and evicts the tail") {
  LruCache cache(3, 10);
  CHECK_FALSE(cache.access(1));
  CHECK_FALSE(cache.access(2));
  CHECK_FALSE(cache.access(3));
  CHECK(cache.contents() == std::vector<Rank>{3, 2, 1});
  CHECK(cache.access(1));
  CHECK(cache.contents() == std::vector<Rank>{1, 3, 2});
  CHECK_FALSE(cache.access(4));
  CHECK(cache.contents() == std::vector<Rank>{4, 1, 3});
  CHECK_FALSE(cache.contains(2));
  CHECK(cache.size() == 3);

  LruCache none(0, 5);
  CHECK_FALSE(none.access(1));
  CHECK_FALSE(none.access(1));
  CHECK(none.size() == 0);
  CHECK_THROWS_AS(LruCache(-1, 5), InvalidArgument);
}

TEST_CASE("rank sampler frequencies follow the law") {
  // 99.9% quantile of chi-square with 99 degrees of freedom is about 148.
  SUBCASE("table path") {
    const PopularityLaw law = build_zipf(0.8, 100);
    RankSampler sampler(law);
    std::mt19937_64 rng(5);
    std::vector<std::int64_t> counts(101, 0);
    const std::int64_t draws = 2'000'000;
    for (std::int64_t i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sampler(rng))];
    CHECK(counts[0] == 0);
    CHECK(chi_square(law, counts, draws) < 148.0);
  }
  SUBCASE("power path over a long segment") {
    const PopularityLaw full = build_zipf(1.2, 1'000'000);
    RankSampler sampler(full);
    std::mt19937_64 rng(9);
    const std::int64_t draws = 4'000'000;
    std::vector<std::int64_t> counts(101, 0);
    std::int64_t beyond = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
      const Rank r = sampler(rng);
      REQUIRE(r >= 1);
      REQUIRE(r <= 1'000'000);
      if (r <= 100) {
        ++counts[static_cast<std::size_t>(r)];
      } else {
        ++beyond;
      }
    }
    const double w = full.total_weight();
    double stat = 0.0;
    double head = 0.0;
    for (Rank n = 1; n <= 100; ++n) {
      const double expect = static_cast<double>(draws) * full.popularity(n) / w;
      head += full.popularity(n) / w;
      const double d = static_cast<double>(counts[static_cast<std::size_t>(n)]) - expect;
      stat += d * d / expect;
    }
    const double expect_beyond = static_cast<double>(draws) * (1.0 - head);
    stat += std::pow(static_cast<double>(beyond) - expect_beyond, 2) / expect_beyond;
    CHECK(stat < 150.0);
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const PopularityLaw law = build_zipf(0.8, 5000);
  const SimResult a = simulate_lru(law, 200, config(200'000, 42));
  const SimResult b = simulate_lru(law, 200, config(200'000, 42));
  const SimResult c = simulate_lru(law, 200, config(200'000, 43));
  CHECK(same(a, b));
  CHECK_FALSE(same(a, c));
}

TEST_CASE("hits and misses are conserved") {
  const PopularityLaw law = build_zipf(0.8, 2000);
  const SimResult r = simulate_two_level(law, 50, 200, 4, config(100'000));
  std::int64_t l1 = 0;
  for (std::size_t i = 0; i + 1 < r.caches.size(); ++i) {
    CHECK(r.caches[i].hits + r.caches[i].misses == r.caches[i].requests);
    l1 += r.caches[i].requests;
  }
  CHECK(l1 == r.requests_measured);
  std::int64_t l1_misses = 0;
  for (std::size_t i = 0; i + 1 < r.caches.size(); ++i) l1_misses += r.caches[i].misses;
  CHECK(r.caches.back().requests == l1_misses);
  CHECK(r.theta_level1.value <= r.theta_overall.value);

  const SimResult ls = simulate_load_sharing(law, 60, 5, config(100'000));
  std::int64_t total = 0;
  for (const auto& cc : ls.caches) total += cc.requests;
  CHECK(total == ls.requests_measured);
}

TEST_CASE("LRU hit rate matches the exact move-to-front value") {
  const std::vector<std::pair<std::vector<double>, int>> cases{
      {{0.5, 0.3, 0.2}, 2},
      {{8, 7, 6, 5, 4, 3, 2, 1}, 4},
      {{1, 0.5, 0.25, 0.125}, 1},
  };
  for (const auto& [w, c] : cases) {
    const PopularityLaw law = test::law_from_weights(w);
    const SimResult r = simulate_lru(law, c, config(2'000'000, 3, 20));
    const double exact = test::mtf_exact_hit(w, c);
    CHECK(std::abs(r.theta_overall.value - exact) <= 3.0 * r.theta_overall.half_width);
  }
  CHECK(test::mtf_exact_hit({0.5, 0.3, 0.2}, 2) ==
        doctest::Approx(test::oracle("mtf_n3_c2_q532")).epsilon(1e-12));
  std::vector<double> z;
  for (int n = 1; n <= 8; ++n) z.push_back(std::pow(n, -0.8));
  CHECK(test::mtf_exact_hit(z, 3) ==
        doctest::Approx(test::oracle("mtf_zipf08_n8_c3")).epsilon(1e-12));
}

TEST_CASE("simulated LRU agrees with the Che approximation") {
  const PopularityLaw law = build_zipf(0.8, 10'000);
  const SimResult r = simulate_lru(law, 1000, config(1'000'000));
  CHECK(std::abs(r.theta_overall.value - overall_hit_rate(law, 1000.0)) < 0.01);
  CHECK(r.theta_overall.half_width > 0.0);
  CHECK(r.theta_overall.half_width < 0.01);
}

TEST_CASE("single-partition networks reduce to one LRU") {
  const PopularityLaw law = build_zipf(0.7, 3000);
  const SimConfig cfg = config(150'000, 17);
  const SimResult lru = simulate_lru(law, 100, cfg);
  CHECK(same(lru, simulate_load_sharing(law, 100, 1, cfg)));
  CHECK(same(lru, simulate_interaid(law, 100, 1, 1, cfg)));
}

TEST_CASE("simulator argument checks") {
  const PopularityLaw law = build_zipf(0.8, 100);
  CHECK_THROWS_AS((void)simulate_lru(build_zipf(0.8, kSimulationRankLimit + 1), 10, config(10)),
                  ScaleLimit);
  CHECK_THROWS_AS((void)simulate_load_sharing(build_zipf(0.8, 5'000'000), 10, 30, config(10)),
                  ScaleLimit);
  CHECK_THROWS_AS((void)simulate_lru(law, -1, config(10)), InvalidArgument);
  CHECK_THROWS_AS((void)simulate_lru(law, 5, config(0)), InvalidArgument);
  CHECK_THROWS_AS((void)simulate_lru(law, 5, config(5, 1, 10)), InvalidArgument);
  CHECK_THROWS_AS((void)simulate_interaid(law, 5, 3, 4, config(100)), InvalidArgument);
  CHECK_THROWS_AS((void)simulate_load_sharing(law, 5, 0, config(100)), InvalidArgument);
}

TEST_CASE("student t quantiles") {
  CHECK(student_t_975(9) == doctest::Approx(2.262157).epsilon(1e-6));
  CHECK(student_t_975(1) == doctest::Approx(12.7062).epsilon(1e-5));
  CHECK(student_t_975(1000) == doctest::Approx(1.962339).epsilon(1e-5));
  CHECK_THROWS_AS((void)student_t_975(0), InvalidArgument);
}
