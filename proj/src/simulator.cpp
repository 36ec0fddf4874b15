#include "icn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "icn/errors.hpp"

namespace icn {
namespace {

constexpr Rank kTableSegmentLimit = 10'000;

// H(x) = integral of x^-a, written as helper1((1-a) ln x) ln x so that a = 1
// needs no special case; helper1(y) = (e^y - 1)/y and helper2(y) =
// ln(1+y)/y are continued smoothly through y = 0.
double helper1(double y) {
  return std::abs(y) > 1e-8 ? std::expm1(y) / y : 1.0 + y * 0.5 * (1.0 + y / 3.0);
}
double helper2(double y) {
  return std::abs(y) > 1e-8 ? std::log1p(y) / y : 1.0 - y * (0.5 - y / 3.0);
}
double h_integral(double x, double a) {
  const double log_x = std::log(x);
  return helper1((1.0 - a) * log_x) * log_x;
}
double h_integral_inverse(double u, double a) {
  double t = u * (1.0 - a);
  if (t < -1.0) t = -1.0;  // rounding guard at the lower end of the range
  return std::exp(helper2(t) * u);
}
double h_density(double x, double a) { return std::exp(-a * std::log(x)); }

void require_config(const PopularityLaw& law, const SimConfig& cfg,
                    std::int64_t caches) {
  if (cfg.requests <= 0) throw InvalidArgument("requests must be > 0");
  if (cfg.batches < 1) throw InvalidArgument("batches must be >= 1");
  if (cfg.batches > cfg.requests) {
    throw InvalidArgument("more batches than measured requests");
  }
  if (!(cfg.warmup.factor >= 0.0)) {
    throw InvalidArgument("warm-up factor must be >= 0");
  }
  if (law.catalogue_size() > kSimulationRankLimit) {
    throw ScaleLimit("simulation supports catalogues up to " +
                     std::to_string(kSimulationRankLimit) + " ranks, got " +
                     std::to_string(law.catalogue_size()));
  }
  if (law.catalogue_size() * caches > kSimulationIndexLimit) {
    throw ScaleLimit("catalogue size times cache count exceeds " +
                     std::to_string(kSimulationIndexLimit));
  }
}

void require_size(std::int64_t c, const char* what) {
  if (c < 0) throw InvalidArgument(std::string(what) + " must be >= 0");
}

struct Outcome {
  bool local = false;
  bool level1 = false;
  bool overall = false;
};

// Caches plus the bookkeeping shared by every scenario: measured-phase
// counters and the warm-up rule.
class Network {
 public:
  Network(std::vector<LruCache> caches, std::vector<std::int64_t> fill_target,
          double warmup_factor)
      : caches_(std::move(caches)),
        fill_target_(std::move(fill_target)),
        since_full_(caches_.size(), 0),
        counters_(caches_.size()) {
    thresholds_.reserve(caches_.size());
    for (std::int64_t t : fill_target_) {
      const auto threshold = static_cast<std::int64_t>(
          std::ceil(warmup_factor * static_cast<double>(t)));
      thresholds_.push_back(threshold);
      if (t > 0 && threshold > 0) ++pending_;
    }
  }

  bool access(std::size_t k, Rank n) {
    const bool hit = caches_[k].access(n);
    if (measuring_) {
      CacheCounters& c = counters_[k];
      ++c.requests;
      ++(hit ? c.hits : c.misses);
    } else if (fill_target_[k] > 0 && caches_[k].size() >= fill_target_[k]) {
      if (++since_full_[k] == thresholds_[k]) --pending_;
    }
    return hit;
  }

  [[nodiscard]] bool warmed_up() const { return pending_ == 0; }
  void start_measuring() { measuring_ = true; }
  [[nodiscard]] std::vector<CacheCounters> counters() const { return counters_; }

 private:
  std::vector<LruCache> caches_;
  std::vector<std::int64_t> fill_target_;
  std::vector<std::int64_t> thresholds_;
  std::vector<std::int64_t> since_full_;
  std::vector<CacheCounters> counters_;
  std::int64_t pending_ = 0;
  bool measuring_ = false;
};

Estimate batch_estimate(const std::vector<std::int64_t>& hits,
                        const std::vector<std::int64_t>& sizes) {
  std::int64_t total_hits = 0;
  std::int64_t total = 0;
  for (std::size_t b = 0; b < hits.size(); ++b) {
    total_hits += hits[b];
    total += sizes[b];
  }
  Estimate e;
  e.value = static_cast<double>(total_hits) / static_cast<double>(total);
  const auto b = static_cast<int>(hits.size());
  if (b < 2) return e;
  double mean = 0.0;
  std::vector<double> fractions(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    fractions[i] = static_cast<double>(hits[i]) / static_cast<double>(sizes[i]);
    mean += fractions[i];
  }
  mean /= b;
  double ss = 0.0;
  for (double f : fractions) ss += (f - mean) * (f - mean);
  const double sd = std::sqrt(ss / (b - 1));
  e.half_width = student_t_975(b - 1) * sd / std::sqrt(static_cast<double>(b));
  return e;
}

// Drives one IRM stream through `step(rank, site)`; `sites` > 1 adds a
// uniform site draw per request.
template <class Step>
SimResult run_stream(const PopularityLaw& law, const SimConfig& cfg,
                     Network& net, int sites, const Step& step) {
  std::mt19937_64 rng(cfg.seed);
  const RankSampler sampler(law);
  auto next_request = [&]() {
    const Rank n = sampler(rng);
    const int site =
        sites > 1 ? static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(sites)))
                  : 0;
    return step(n, site);
  };

  SimResult result;
  while (result.warmup_requests < cfg.requests && !net.warmed_up()) {
    next_request();
    ++result.warmup_requests;
  }
  net.start_measuring();

  const auto batches = static_cast<std::size_t>(cfg.batches);
  std::vector<std::int64_t> sizes(batches), local(batches), level1(batches),
      overall(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::int64_t begin = cfg.requests * static_cast<std::int64_t>(b) /
                               static_cast<std::int64_t>(batches);
    const std::int64_t end = cfg.requests * static_cast<std::int64_t>(b + 1) /
                             static_cast<std::int64_t>(batches);
    sizes[b] = end - begin;
    for (std::int64_t i = begin; i < end; ++i) {
      const Outcome o = next_request();
      local[b] += o.local;
      level1[b] += o.level1;
      overall[b] += o.overall;
    }
  }
  result.requests_measured = cfg.requests;
  result.theta_local = batch_estimate(local, sizes);
  result.theta_level1 = batch_estimate(level1, sizes);
  result.theta_overall = batch_estimate(overall, sizes);
  result.caches = net.counters();
  return result;
}

}  // namespace

double student_t_975(int dof) {
  if (dof < 1) throw InvalidArgument("degrees of freedom must be >= 1");
  boost::math::students_t_distribution<double> dist(dof);
  return boost::math::quantile(dist, 0.975);
}

// ---------------------------------------------------------------------------
// LruCache

namespace {
std::size_t lru_index_size(Rank catalogue) {
  if (catalogue < 1 || catalogue > kSimulationRankLimit) {
    throw ScaleLimit("LRU index supports 1.." + std::to_string(kSimulationRankLimit) +
                     " ranks");
  }
  return static_cast<std::size_t>(catalogue) + 1;
}
}  // namespace

LruCache::LruCache(std::int64_t capacity, Rank catalogue)
    : capacity_(capacity),
      prev_(lru_index_size(catalogue), kNil),
      next_(prev_.size(), kNil),
      resident_(prev_.size(), 0) {
  if (capacity < 0) throw InvalidArgument("cache capacity must be >= 0");
}

void LruCache::unlink(std::uint32_t n) {
  const std::uint32_t p = prev_[n];
  const std::uint32_t q = next_[n];
  if (p != kNil) next_[p] = q; else head_ = q;
  if (q != kNil) prev_[q] = p; else tail_ = p;
  prev_[n] = next_[n] = kNil;
}

void LruCache::push_front(std::uint32_t n) {
  prev_[n] = kNil;
  next_[n] = head_;
  if (head_ != kNil) prev_[head_] = n; else tail_ = n;
  head_ = n;
}

bool LruCache::access(Rank rank) {
  const auto n = static_cast<std::uint32_t>(rank);
  if (resident_[n]) {
    if (head_ != n) {
      unlink(n);
      push_front(n);
    }
    return true;
  }
  if (capacity_ == 0) return false;
  if (size_ == capacity_) {
    const std::uint32_t victim = tail_;
    unlink(victim);
    resident_[victim] = 0;
    --size_;
  }
  push_front(n);
  resident_[n] = 1;
  ++size_;
  return false;
}

std::vector<Rank> LruCache::contents() const {
  std::vector<Rank> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (std::uint32_t n = head_; n != kNil; n = next_[n]) out.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------
// RankSampler

RankSampler::RankSampler(const PopularityLaw& law) {
  const auto& segs = law.segments();
  cumulative_.reserve(segs.size());
  segments_.reserve(segs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& seg = segs[i];
    acc += law.segment_weight(i);
    cumulative_.push_back(acc);

    SegmentSampler s;
    s.rank_lo = seg.rank_lo;
    s.rank_hi = seg.rank_hi;
    if (seg.exponent == 0.0 || seg.length() == 1) {
      s.kind = SegmentSampler::Kind::kUniform;
    } else if (seg.length() < kTableSegmentLimit) {
      s.kind = SegmentSampler::Kind::kTable;
      s.table.reserve(static_cast<std::size_t>(seg.length()));
      double c = 0.0;
      for (Rank n = seg.rank_lo; n <= seg.rank_hi; ++n) {
        c += std::pow(static_cast<double>(n), -seg.exponent);
        s.table.push_back(c);
      }
    } else {
      s.kind = SegmentSampler::Kind::kPower;
      PowerRange& p = s.power;
      p.exponent = seg.exponent;
      p.lo = static_cast<double>(seg.rank_lo);
      p.hi = static_cast<double>(seg.rank_hi);
      p.u_lo = h_integral(p.lo + 0.5, p.exponent) - h_density(p.lo, p.exponent);
      p.u_hi = h_integral(p.hi + 0.5, p.exponent);
    }
    segments_.push_back(std::move(s));
  }
}

Rank RankSampler::sample_power(const SegmentSampler& s, std::mt19937_64& rng) const {
  // Rejection-inversion: u is uniform over [H(lo+1/2) - h(lo), H(hi+1/2)];
  // rank k owns [H(k+1/2) - h(k), H(k+1/2)], an interval of length h(k).
  const PowerRange& p = s.power;
  for (;;) {
    const double u = p.u_hi + uniform01(rng) * (p.u_lo - p.u_hi);
    const double x = h_integral_inverse(u, p.exponent);
    double k = std::floor(x + 0.5);
    k = std::clamp(k, p.lo, p.hi);
    if (u >= h_integral(k + 0.5, p.exponent) - h_density(k, p.exponent)) {
      return static_cast<Rank>(k);
    }
  }
}

Rank RankSampler::operator()(std::mt19937_64& rng) const {
  const double target = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  const SegmentSampler& s = segments_[static_cast<std::size_t>(it - cumulative_.begin())];
  switch (s.kind) {
    case SegmentSampler::Kind::kUniform:
      return s.rank_lo + static_cast<Rank>(uniform_below(
                             rng, static_cast<std::uint64_t>(s.rank_hi - s.rank_lo + 1)));
    case SegmentSampler::Kind::kTable: {
      const double v = uniform01(rng) * s.table.back();
      auto jt = std::upper_bound(s.table.begin(), s.table.end(), v);
      if (jt == s.table.end()) --jt;
      return s.rank_lo + static_cast<Rank>(jt - s.table.begin());
    }
    case SegmentSampler::Kind::kPower:
      return sample_power(s, rng);
  }
  return s.rank_lo;
}

// ---------------------------------------------------------------------------
// Scenarios

SimResult simulate_lru(const PopularityLaw& law, std::int64_t c,
                       const SimConfig& cfg) {
  require_size(c, "cache size");
  require_config(law, cfg, 1);
  const Rank n = law.catalogue_size();
  std::vector<LruCache> caches;
  caches.emplace_back(c, n);
  Network net(std::move(caches), {std::min<std::int64_t>(c, n)}, cfg.warmup.factor);
  return run_stream(law, cfg, net, 1, [&](Rank rank, int) {
    const bool hit = net.access(0, rank);
    return Outcome{hit, hit, hit};
  });
}

SimResult simulate_load_sharing(const PopularityLaw& law,
                                std::int64_t c_per_cache, int p,
                                const SimConfig& cfg) {
  require_size(c_per_cache, "cache size");
  if (p < 1) throw InvalidArgument("partition count must be >= 1");
  require_config(law, cfg, p);
  const Rank n = law.catalogue_size();
  std::vector<LruCache> caches;
  std::vector<std::int64_t> targets;
  for (int k = 0; k < p; ++k) {
    caches.emplace_back(c_per_cache, n);
    // Ranks r in [1, n] with r mod p == k.
    const Rank owned = k == 0 ? n / p : (k <= n ? (n - k) / p + 1 : 0);
    targets.push_back(std::min<std::int64_t>(c_per_cache, owned));
  }
  Network net(std::move(caches), std::move(targets), cfg.warmup.factor);
  return run_stream(law, cfg, net, 1, [&](Rank rank, int) {
    const bool hit = net.access(static_cast<std::size_t>(rank % p), rank);
    return Outcome{hit, hit, hit};
  });
}

SimResult simulate_interaid(const PopularityLaw& law, std::int64_t c, int p,
                            int s, const SimConfig& cfg) {
  require_size(c, "cache size");
  if (p < 1) throw InvalidArgument("partition count must be >= 1");
  if (s < p || s % p != 0) {
    throw InvalidArgument("site count must be a positive multiple of P");
  }
  require_config(law, cfg, s);
  const Rank n = law.catalogue_size();
  std::vector<LruCache> caches;
  for (int k = 0; k < s; ++k) caches.emplace_back(c, n);
  std::vector<std::int64_t> targets(static_cast<std::size_t>(s),
                                    std::min<std::int64_t>(c, n));
  Network net(std::move(caches), std::move(targets), cfg.warmup.factor);
  return run_stream(law, cfg, net, s, [&](Rank rank, int site) {
    if (net.access(static_cast<std::size_t>(site), rank)) {
      return Outcome{true, true, true};
    }
    const int partition = static_cast<int>(rank % p);
    if (partition == site % p) return Outcome{};
    const int designated = (site / p) * p + partition;
    const bool peer = net.access(static_cast<std::size_t>(designated), rank);
    return Outcome{false, peer, peer};
  });
}

SimResult simulate_two_level(const PopularityLaw& law, std::int64_t c1,
                             std::int64_t c2, int s, const SimConfig& cfg) {
  require_size(c1, "level-1 cache size");
  require_size(c2, "level-2 cache size");
  if (s < 1) throw InvalidArgument("site count must be >= 1");
  require_config(law, cfg, s + 1);
  const Rank n = law.catalogue_size();
  std::vector<LruCache> caches;
  std::vector<std::int64_t> targets;
  for (int k = 0; k < s; ++k) {
    caches.emplace_back(c1, n);
    targets.push_back(std::min<std::int64_t>(c1, n));
  }
  caches.emplace_back(c2, n);
  targets.push_back(std::min<std::int64_t>(c2, n));
  const auto level2 = static_cast<std::size_t>(s);
  Network net(std::move(caches), std::move(targets), cfg.warmup.factor);
  return run_stream(law, cfg, net, s, [&](Rank rank, int site) {
    if (net.access(static_cast<std::size_t>(site), rank)) {
      return Outcome{true, true, true};
    }
    const bool hit2 = net.access(level2, rank);
    return Outcome{false, false, hit2};
  });
}

}  // namespace icn
