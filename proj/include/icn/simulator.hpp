#pragma once

// Request-level simulation of exact LRU caches fed by an IRM stream.
//
// One run is single-threaded and fully determined by (law, sizes, config);
// independent runs share nothing and may run concurrently.

#include <cstdint>
#include <random>
#include <vector>

#include "icn/popularity.hpp"

namespace icn {

inline constexpr Rank kSimulationRankLimit = 10'000'000;
/// Upper bound on catalogue size times number of caches (LRU index memory).
inline constexpr std::int64_t kSimulationIndexLimit = 100'000'000;

struct WarmupPolicy {
  /// Measurement starts once every cache has been full for `factor` times
  /// its capacity in further requests (capped at SimConfig::requests events).
  double factor = 5.0;
};

struct SimConfig {
  std::int64_t requests = 1'000'000;
  std::uint64_t seed = 1;
  WarmupPolicy warmup;
  int batches = 10;
};

struct Estimate {
  double value = 0.0;
  /// 95% batch-means confidence half-width; 0 with a single batch.
  double half_width = 0.0;
};

struct CacheCounters {
  std::int64_t requests = 0;
  std::int64_t hits = 0;
  std::int64_t misses = 0;
};

struct SimResult {
  Estimate theta_local;
  Estimate theta_level1;
  Estimate theta_overall;
  std::int64_t requests_measured = 0;
  std::int64_t warmup_requests = 0;
  /// Measured-phase counters per cache (level-2 last where present).
  std::vector<CacheCounters> caches;
};

/// Exact LRU over ranks 1..N with O(1) access via an intrusive list.
class LruCache {
 public:
  LruCache(std::int64_t capacity, Rank catalogue);

  /// Looks up n; on a hit moves it to the front, on a miss inserts it and
  /// evicts the least recently used entry if needed. Returns true on a hit.
  bool access(Rank n);

  [[nodiscard]] bool contains(Rank n) const { return resident_[index(n)] != 0; }
  [[nodiscard]] std::int64_t size() const noexcept { return size_; }
  [[nodiscard]] std::int64_t capacity() const noexcept { return capacity_; }
  /// Ranks from most to least recently used.
  [[nodiscard]] std::vector<Rank> contents() const;

 private:
  static constexpr std::uint32_t kNil = 0;
  std::size_t index(Rank n) const { return static_cast<std::size_t>(n); }
  void unlink(std::uint32_t n);
  void push_front(std::uint32_t n);

  std::int64_t capacity_;
  std::int64_t size_ = 0;
  std::uint32_t head_ = kNil;
  std::uint32_t tail_ = kNil;
  std::vector<std::uint32_t> prev_;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint8_t> resident_;
};

/// Draws ranks with probability q(n) / sum q. A segment is picked from the
/// cumulative segment weights, then the rank within it by a lookup table
/// (short segments) or rejection-inversion (long power-law segments). Both
/// paths are exact.
class RankSampler {
 public:
  explicit RankSampler(const PopularityLaw& law);

  Rank operator()(std::mt19937_64& rng) const;

 private:
  struct PowerRange {
    double exponent = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double u_lo = 0.0;  // H(lo + 1/2) - h(lo)
    double u_hi = 0.0;  // H(hi + 1/2)
  };
  struct SegmentSampler {
    Rank rank_lo = 1;
    Rank rank_hi = 1;
    enum class Kind { kUniform, kTable, kPower } kind = Kind::kUniform;
    std::vector<double> table;  // cumulative weights within the segment
    PowerRange power;
  };

  Rank sample_power(const SegmentSampler& s, std::mt19937_64& rng) const;

  std::vector<double> cumulative_;  // cumulative segment weights
  std::vector<SegmentSampler> segments_;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, m).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t m) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * m) >> 64);
}

/// Single LRU cache of C unit chunks.
[[nodiscard]] SimResult simulate_lru(const PopularityLaw& law, std::int64_t c,
                                     const SimConfig& cfg);

/// P caches each owning the ranks n with n mod P == p; every request goes to
/// the owner of its partition.
[[nodiscard]] SimResult simulate_load_sharing(const PopularityLaw& law,
                                              std::int64_t c_per_cache, int p,
                                              const SimConfig& cfg);

/// S sites in S/P groups of P; within a group site s is designated for
/// partition s mod P. A local miss on a foreign chunk is forwarded to the
/// designated peer of the same group. theta_local counts local hits,
/// theta_level1 local plus peer hits.
[[nodiscard]] SimResult simulate_interaid(const PopularityLaw& law,
                                          std::int64_t c, int p, int s,
                                          const SimConfig& cfg);

/// S level-1 caches of size C1 whose misses feed one level-2 cache of size
/// C2. theta_level1 is the level-1 hit fraction, theta_overall includes
/// level-2 hits.
[[nodiscard]] SimResult simulate_two_level(const PopularityLaw& law,
                                           std::int64_t c1, std::int64_t c2,
                                           int s, const SimConfig& cfg);

/// Two-sided 95% Student-t quantile with `dof` degrees of freedom.
[[nodiscard]] double student_t_975(int dof);

}  // namespace icn
