#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "icn/errors.hpp"
#include "icn/popularity.hpp"
#include "test_support.hpp"

using namespace icn;

namespace {

using Segs = std::vector<Segment>;

std::vector<double> weights_of(const PopularityLaw& law) {
  std::vector<double> out;
  for (Rank n = 1; n <= law.catalogue_size(); ++n) out.push_back(law.popularity(n));
  return out;
}

}  // namespace

TEST_CASE("zipf law values and total weight") {
  const PopularityLaw law = build_zipf(0.8, 1000);
  CHECK(law.catalogue_size() == 1000);
  CHECK(law.popularity(1) == doctest::Approx(1.0));
  CHECK(law.popularity(10) == doctest::Approx(std::pow(10.0, -0.8)).epsilon(1e-15));
  double brute = 0.0;
  for (int n = 1; n <= 1000; ++n) brute += std::pow(n, -0.8);
  CHECK(law.total_weight() == doctest::Approx(brute).epsilon(1e-13));
  CHECK_THROWS_AS((void)law.popularity(0), InvalidArgument);
  CHECK_THROWS_AS((void)law.popularity(1001), InvalidArgument);
  CHECK_THROWS_AS((void)build_zipf(-0.1, 10), InvalidArgument);
  CHECK_THROWS_AS((void)build_zipf(0.8, 0), InvalidArgument);
}

TEST_CASE("zipf top-decile share matches the oracle") {
  const PopularityLaw law = build_zipf(0.8, 10'000);
  const std::vector<Rank> cuts{1000, 10'000};
  const auto shares = traffic_shares(law, cuts);
  CHECK(shares[0] == doctest::Approx(test::oracle("zipf08_n1e4_top_decile_share")).epsilon(1e-12));
  CHECK(shares[0] + shares[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("traffic shares") {
  const PopularityLaw uniform = build_zipf(0.0, 10);
  const std::vector<Rank> halves{5, 10};
  const auto s = traffic_shares(uniform, halves);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(0.5));

  const PopularityLaw emp = build_empirical(1'600'000'000);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rank> cuts;
    std::uniform_int_distribution<Rank> pick(1, emp.catalogue_size() - 1);
    for (int k = 0; k < 5; ++k) cuts.push_back(pick(rng));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(emp.catalogue_size());
    const auto shares = traffic_shares(emp, cuts);
    CHECK(std::accumulate(shares.begin(), shares.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }

  const std::vector<Rank> unsorted{6, 5, 10};
  CHECK_THROWS_AS((void)traffic_shares(uniform, unsorted), InvalidArgument);
  const std::vector<Rank> short_end{5, 9};
  CHECK_THROWS_AS((void)traffic_shares(uniform, short_end), InvalidArgument);
  const std::vector<Rank> beyond{5, 11};
  CHECK_THROWS_AS((void)traffic_shares(uniform, beyond), InvalidArgument);
}

TEST_CASE("scaling a law leaves shares unchanged") {
  const PopularityLaw law = build_empirical(1'600'000);
  const PopularityLaw big = law.scaled(1e7);
  const auto bp = empirical_breakpoints(law.catalogue_size());
  const std::vector<Rank> cuts{bp.head_end, bp.body_end, bp.catalogue};
  const auto a = traffic_shares(law, cuts);
  const auto b = traffic_shares(big, cuts);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  CHECK_THROWS_AS((void)law.scaled(0.0), InvalidArgument);
}

TEST_CASE("empirical breakpoints scale with N") {
  auto bp = empirical_breakpoints(1'600'000'000);
  CHECK(bp.head_end == 100'000);
  CHECK(bp.body_end == 100'000'000);
  bp = empirical_breakpoints(1'600'000);
  CHECK(bp.head_end == 100);
  CHECK(bp.body_end == 100'000);
  CHECK_THROWS_AS((void)empirical_breakpoints(15'999), InvalidArgument);
}

TEST_CASE("empirical law is continuous in the tail and non-increasing") {
  for (Rank n : {Rank{16'000}, Rank{1'600'000}, Rank{1'600'000'000}}) {
    const PopularityLaw law = build_empirical(n);
    const auto& segs = law.segments();
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const Rank b = segs[i].rank_hi;
      const double left = law.popularity(b);
      const double right = law.popularity(b + 1);
      CHECK(left >= right);
      // Continuity of the formulas at the shared boundary past the body.
      if (segs[i].rank_lo > n / empirical::kBodyRankDivisor) {
        const double x = static_cast<double>(b);
        CHECK(std::abs(segs[i + 1].at(x) / segs[i].at(x) - 1.0) < 1e-12);
      }
      for (Rank r : {segs[i].rank_lo, (segs[i].rank_lo + b) / 2, b}) {
        if (r > 1) CHECK(law.popularity(r - 1) >= law.popularity(r));
      }
    }
  }
}

TEST_CASE("long-segment sums agree with brute force") {
  const Rank n = 3'000'000;
  for (double alpha : {0.6, 0.8, 1.0, 1.7}) {
    const PopularityLaw law = build_zipf(alpha, n);
    double brute = 0.0;
    double brute_f = 0.0;
    for (Rank k = n; k >= 1; --k) {
      const double q = std::pow(static_cast<double>(k), -alpha);
      brute += q;
      brute_f += -std::expm1(-q * 5e4);
    }
    CHECK(law.total_weight() == doctest::Approx(brute).epsilon(1e-10));
    const double f = law.sum([](double q) { return -std::expm1(-q * 5e4); });
    CHECK(f == doctest::Approx(brute_f).epsilon(1e-10));
  }
}

TEST_CASE("law construction validates its invariants") {
  CHECK_THROWS_AS(PopularityLaw(Segs{}), InvalidArgument);
  CHECK_THROWS_AS(PopularityLaw(Segs{{2, 5, 1.0, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(PopularityLaw(Segs{{1, 5, 1.0, 0.0}, {7, 9, 0.5, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(PopularityLaw(Segs{{1, 5, 1.0, 0.0}, {6, 9, 2.0, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(PopularityLaw(Segs{{1, 5, -1.0, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(PopularityLaw(Segs{{1, 5, 1.0, -0.5}}), InvalidArgument);
  CHECK_NOTHROW(PopularityLaw(Segs{{1, 5, 1.0, 0.0}, {6, 9, 1.0, 0.0}}));
}

TEST_CASE("chunk law from object records") {
  SUBCASE("one object splits into equal chunks") {
    const std::vector<ObjectRecord> recs{{"a", 5.0, 2'000'000}};
    CHECK(weights_of(chunk_law_from_objects(recs)) == std::vector<double>{2.5, 2.5});
  }
  SUBCASE("chunks are re-sorted by weight") {
    const std::vector<ObjectRecord> recs{{"b", 10.0, 2'000'000}, {"a", 10.0, 1'000'000}};
    CHECK(weights_of(chunk_law_from_objects(recs)) == std::vector<double>{10.0, 5.0, 5.0});
  }
  SUBCASE("total weight equals total leechers for whole-chunk sizes") {
    std::vector<ObjectRecord> recs;
    double leechers = 0.0;
    for (int i = 1; i <= 200; ++i) {
      recs.push_back({"o" + std::to_string(i), 3.0 + i % 17, (1 + i % 9) * 1'000'000});
      leechers += 3.0 + i % 17;
    }
    CHECK(chunk_law_from_objects(recs).total_weight() ==
          doctest::Approx(leechers).epsilon(1e-14));
  }
  SUBCASE("intensity uses the exact byte size") {
    const ObjectRecord r{"x", 3.0, 1'500'000};
    CHECK(r.chunk_count() == 2);
    CHECK(r.chunk_intensity() == doctest::Approx(2.0));
  }
  SUBCASE("all-zero leechers") {
    const std::vector<ObjectRecord> recs{{"a", 0.0, 1'000'000}};
    CHECK_THROWS_AS((void)chunk_law_from_objects(recs), InvalidArgument);
  }
  SUBCASE("a catalogue of 1.6e6 objects of 1 GB has 1.6e9 chunks") {
    std::vector<ObjectRecord> recs(1'600'000);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      recs[i].leechers = 1e3 / static_cast<double>(1 + i % 1000);
      recs[i].size_bytes = 1'000'000'000;
    }
    CHECK(chunk_law_from_objects(recs).catalogue_size() == 1'600'000'000);
  }
}

TEST_CASE("impatience transform") {
  SUBCASE("linear decay to the floor") {
    const std::vector<ObjectRecord> recs{{"a", 6.0, 3'000'000}};
    const auto w = weights_of(apply_impatience(recs, 0.3, 0, 1'000'000'000));
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == doctest::Approx(1.3));
    CHECK(w[2] == doctest::Approx(0.6));
  }
  SUBCASE("floor 1 equals the flat law on the filtered set") {
    std::mt19937_64 rng(3);
    std::vector<ObjectRecord> recs;
    std::vector<ObjectRecord> kept;
    for (int i = 0; i < 300; ++i) {
      ObjectRecord r{"o" + std::to_string(i), static_cast<double>(1 + rng() % 50),
                     static_cast<std::int64_t>(1 + rng() % 40'000'000)};
      recs.push_back(r);
      if (r.size_bytes >= 5'000'000 && r.size_bytes <= 30'000'000) kept.push_back(r);
    }
    CHECK(apply_impatience(recs, 1.0, 5'000'000, 30'000'000) == chunk_law_from_objects(kept));
  }
  SUBCASE("single-chunk objects keep l/s") {
    const std::vector<ObjectRecord> recs{{"a", 4.0, 1'000'000}};
    CHECK(weights_of(apply_impatience(recs, 0.3, 0, 10'000'000)) == std::vector<double>{4.0});
  }
  SUBCASE("errors") {
    const std::vector<ObjectRecord> recs{{"a", 4.0, 1'000'000}};
    CHECK_THROWS_AS((void)apply_impatience(recs, 0.3, 2'000'000, 3'000'000), EmptyCatalogue);
    CHECK_THROWS_AS((void)apply_impatience(recs, 0.0, 0, 3'000'000), InvalidArgument);
    CHECK_THROWS_AS((void)apply_impatience(recs, 1.5, 0, 3'000'000), InvalidArgument);
    CHECK_THROWS_AS((void)apply_impatience(recs, 0.5, 3, 2), InvalidArgument);
  }
}

TEST_CASE("chained laws") {
  const std::vector<ChainPiece> pieces{{10, 0.5}, {100, 1.0, 0.5}};
  const PopularityLaw law = build_chained(pieces);
  CHECK(law.popularity(1) == doctest::Approx(1.0));
  const double at10 = std::pow(10.0, -0.5);
  CHECK(law.popularity(10) == doctest::Approx(at10));
  CHECK(law.segments()[1].at(10.0) == doctest::Approx(0.5 * at10));
  const std::vector<ChainPiece> bad{{10, 0.5}, {5, 1.0}};
  CHECK_THROWS_AS((void)build_chained(bad), InvalidArgument);
}
