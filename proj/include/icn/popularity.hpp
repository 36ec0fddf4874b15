#pragma once

// Content popularity laws q(n) over ranks 1..N.
//
// A law is a list of power-law segments q(n) = amplitude * n^-exponent that
// tile [1, N]. Analytic laws (Zipf, the fitted empirical law) use a handful of
// long segments; laws derived from object records use exponent-0 segments,
// one per run of equal chunk weight. Both go through the same query surface.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icn/rank_sum.hpp"

namespace icn {

using Rank = std::int64_t;

inline constexpr std::int64_t kDefaultChunkBytes = 1'000'000;

struct Segment {
  Rank rank_lo = 1;
  Rank rank_hi = 1;
  double amplitude = 1.0;
  double exponent = 0.0;

  [[nodiscard]] Rank length() const noexcept { return rank_hi - rank_lo + 1; }

  /// Segment formula at a (possibly non-integer) rank.
  [[nodiscard]] double at(double x) const noexcept {
    return exponent == 0.0 ? amplitude : amplitude * std::pow(x, -exponent);
  }

  bool operator==(const Segment&) const = default;
};

/// Immutable after construction; concurrent reads are safe.
class PopularityLaw {
 public:
  /// Validates the tiling and monotonicity invariants; throws
  /// InvalidArgument when they do not hold.
  explicit PopularityLaw(std::vector<Segment> segments);

  [[nodiscard]] const std::vector<Segment>& segments() const noexcept {
    return segments_;
  }
  [[nodiscard]] Rank catalogue_size() const noexcept {
    return segments_.back().rank_hi;
  }
  [[nodiscard]] double total_weight() const noexcept {
    return cumulative_.back();
  }

  /// q(n); throws InvalidArgument outside [1, N].
  [[nodiscard]] double popularity(Rank n) const;

  [[nodiscard]] std::size_t segment_of(Rank n) const;

  /// Sum of q(n) over segment i.
  [[nodiscard]] double segment_weight(std::size_t i) const {
    return cumulative_[i + 1] - cumulative_[i];
  }

  /// Sum of q(n) for lo <= n <= hi.
  [[nodiscard]] double partial_weight(Rank lo, Rank hi) const;

  /// Same law with every amplitude multiplied by kappa > 0.
  [[nodiscard]] PopularityLaw scaled(double kappa) const;

  /// Sum over all ranks of f(q(n)).
  template <class F>
  double sum(const F& f) const {
    return sum(1, catalogue_size(), f);
  }

  /// Sum over lo <= n <= hi of f(q(n)). Short runs are summed exactly, long
  /// power-law runs by quadrature with an Euler-Maclaurin correction.
  template <class F>
  double sum(Rank lo, Rank hi, const F& f) const;

  bool operator==(const PopularityLaw& other) const {
    return segments_ == other.segments_;
  }

 private:
  template <class F>
  double sum_segment(std::size_t i, Rank lo, Rank hi, const F& f) const;

  std::vector<Segment> segments_;
  std::vector<double> cumulative_;
  // q(n) tables for the power-law segments that are summed term by term.
  std::vector<double> q_table_;
  std::vector<std::int64_t> q_table_offset_;
};

/// One downloadable object (e.g. a torrent) as seen by the ingestion path.
struct ObjectRecord {
  std::string object_id;
  double leechers = 0.0;
  std::int64_t size_bytes = 1;
  std::int64_t chunk_size_bytes = kDefaultChunkBytes;

  /// ceil(size_bytes / chunk_size_bytes).
  [[nodiscard]] std::int64_t chunk_count() const;

  /// Per-chunk request intensity l / s with s the exact size in chunks
  /// (fractional for objects that are not a whole number of chunks).
  [[nodiscard]] double chunk_intensity() const;
};

/// Fitted head/body/tail shape. Breakpoints scale with N: the head ends at
/// N/16000 and the body at N/16; the tail is split into kTailSegments
/// log-spaced pieces whose exponents rise from kTailExponentFirst to
/// kTailExponentLast as 1 + 14 (k/7)^kTailExponentShape.
namespace empirical {
inline constexpr double kHeadExponent = 0.6;
inline constexpr double kBodyExponent = 0.8;
inline constexpr Rank kHeadRankDivisor = 16'000;
inline constexpr Rank kBodyRankDivisor = 16;
inline constexpr int kTailSegments = 8;
inline constexpr double kTailExponentFirst = 1.0;
inline constexpr double kTailExponentLast = 15.0;
// Calibrated by tools/calibrate_empirical.py; see README for the targets.
inline constexpr double kTailExponentShape = 4.087;
inline constexpr double kHeadBodyJunction = 0.8977;
inline constexpr double kBodyTailJunction = 1.0;

inline constexpr Rank kMinCatalogue = kHeadRankDivisor;
}  // namespace empirical

struct EmpiricalBreakpoints {
  Rank head_end;
  Rank body_end;
  Rank catalogue;
};

[[nodiscard]] EmpiricalBreakpoints empirical_breakpoints(Rank n);

/// One piece of a chained power law: ranks up to `rank_hi` follow exponent
/// `exponent`; the amplitude is chosen so the piece meets its predecessor at
/// the shared boundary, multiplied by `junction` (<= 1 keeps q monotone).
struct ChainPiece {
  Rank rank_hi;
  double exponent;
  double junction = 1.0;
};

/// q(1) = 1 and amplitudes chained for continuity between pieces.
[[nodiscard]] PopularityLaw build_chained(std::span<const ChainPiece> pieces);

/// Zipf(alpha): q(n) = n^-alpha on [1, N].
[[nodiscard]] PopularityLaw build_zipf(double alpha, Rank n);

/// The fitted three-part law scaled to catalogue size N >= 16000.
[[nodiscard]] PopularityLaw build_empirical(Rank n);

/// Pieces of build_empirical, exposed for the figure variants that drop or
/// replace the head or the tail.
[[nodiscard]] std::vector<ChainPiece> empirical_pieces(Rank n);

/// Fraction of total weight in each band (cut[i-1], cut[i]]; the first band
/// starts at rank 1. Cuts must be strictly increasing and end at N.
[[nodiscard]] std::vector<double> traffic_shares(const PopularityLaw& law,
                                                 std::span<const Rank> cuts);

/// Chunk-level law: each record contributes chunk_count() chunks of weight
/// chunk_intensity(), sorted by decreasing weight. Records with no leechers
/// are dropped; throws InvalidArgument if none remain.
[[nodiscard]] PopularityLaw chunk_law_from_objects(
    std::span<const ObjectRecord> records);

/// Chunk-level law under user impatience: records outside
/// [size_min_bytes, size_max_bytes] are dropped and chunk k of an s-chunk
/// object gets weight (l/s)(1 - (1 - floor)(k - 1)/(s - 1)).
/// Throws EmptyCatalogue when nothing survives the filter.
[[nodiscard]] PopularityLaw apply_impatience(
    std::span<const ObjectRecord> records, double floor,
    std::int64_t size_min_bytes, std::int64_t size_max_bytes);

// ---------------------------------------------------------------------------

template <class F>
double PopularityLaw::sum(Rank lo, Rank hi, const F& f) const {
  if (lo > hi) return 0.0;
  double total = 0.0;
  for (std::size_t i = segment_of(lo); i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    if (seg.rank_lo > hi) break;
    total += sum_segment(i, std::max(lo, seg.rank_lo), std::min(hi, seg.rank_hi),
                         f);
  }
  return total;
}

template <class F>
double PopularityLaw::sum_segment(std::size_t i, Rank lo, Rank hi,
                                  const F& f) const {
  const Segment& seg = segments_[i];
  const Rank count = hi - lo + 1;
  if (seg.exponent == 0.0) return static_cast<double>(count) * f(seg.amplitude);

  auto exact = [&](Rank a, Rank b) {
    double acc = 0.0;
    if (const std::int64_t offset = q_table_offset_[i]; offset >= 0) {
      const double* q = q_table_.data() + offset + (a - seg.rank_lo);
      for (Rank n = a; n <= b; ++n) acc += f(*q++);
    } else {
      for (Rank n = a; n <= b; ++n) acc += f(seg.at(static_cast<double>(n)));
    }
    return acc;
  };

  if (count <= detail::kExactSumLimit) return exact(lo, hi);

  double total = 0.0;
  Rank start = lo;
  if (start < detail::kExactPrefixRanks) {
    total += exact(start, detail::kExactPrefixRanks - 1);
    start = detail::kExactPrefixRanks;
  }
  auto g = [&](double x) { return f(seg.at(x)); };
  return total + detail::euler_maclaurin_sum(g, start, hi);
}

}  // namespace icn
