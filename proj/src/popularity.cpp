#include "icn/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "icn/errors.hpp"

namespace icn {
namespace {

// Upper bound on cached q(n) entries per law (8 bytes each).
constexpr std::int64_t kQTableBudget = 16'000'000;

constexpr double kMonotoneSlack = 1e-12;

std::string describe(const Segment& s) {
  return "[" + std::to_string(s.rank_lo) + ", " + std::to_string(s.rank_hi) +
         "] amplitude=" + std::to_string(s.amplitude) +
         " exponent=" + std::to_string(s.exponent);
}

void validate(const std::vector<Segment>& segments) {
  if (segments.empty()) throw InvalidArgument("popularity law has no segments");
  Rank expected_lo = 1;
  double previous_tail = std::numeric_limits<double>::infinity();
  for (const Segment& s : segments) {
    if (s.rank_lo != expected_lo || s.rank_hi < s.rank_lo) {
      throw InvalidArgument("segments must tile [1, N] without gaps: " +
                            describe(s));
    }
    if (!(s.amplitude > 0.0) || !std::isfinite(s.amplitude) ||
        !(s.exponent >= 0.0) || !std::isfinite(s.exponent)) {
      throw InvalidArgument("segment needs amplitude > 0, exponent >= 0: " +
                            describe(s));
    }
    const double head = s.at(static_cast<double>(s.rank_lo));
    const double tail = s.at(static_cast<double>(s.rank_hi));
    if (!(tail > 0.0)) {
      throw InvalidArgument("popularity underflows to zero in " + describe(s));
    }
    if (head > previous_tail * (1.0 + kMonotoneSlack)) {
      throw InvalidArgument("popularity must be non-increasing in rank at " +
                            describe(s));
    }
    previous_tail = tail;
    expected_lo = s.rank_hi + 1;
  }
}

// Sorts (weight, count) runs by decreasing weight and merges equal weights.
PopularityLaw law_from_runs(std::vector<std::pair<double, std::int64_t>> runs) {
  std::sort(runs.begin(), runs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Segment> segments;
  Rank next = 1;
  for (const auto& [weight, count] : runs) {
    if (!segments.empty() && segments.back().amplitude == weight) {
      segments.back().rank_hi += count;
    } else {
      segments.push_back({next, next + count - 1, weight, 0.0});
    }
    next += count;
  }
  return PopularityLaw(std::move(segments));
}

}  // namespace

PopularityLaw::PopularityLaw(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  validate(segments_);

  q_table_offset_.assign(segments_.size(), -1);
  std::int64_t budget = kQTableBudget;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.exponent == 0.0 || s.length() > detail::kExactSumLimit ||
        s.length() > budget) {
      continue;
    }
    q_table_offset_[i] = static_cast<std::int64_t>(q_table_.size());
    for (Rank n = s.rank_lo; n <= s.rank_hi; ++n) {
      q_table_.push_back(s.at(static_cast<double>(n)));
    }
    budget -= s.length();
  }

  cumulative_.assign(segments_.size() + 1, 0.0);
  auto identity = [](double q) { return q; };
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + sum_segment(i, segments_[i].rank_lo,
                                                      segments_[i].rank_hi,
                                                      identity);
  }
}

std::size_t PopularityLaw::segment_of(Rank n) const {
  if (n < 1 || n > catalogue_size()) {
    throw InvalidArgument("rank " + std::to_string(n) + " outside [1, " +
                          std::to_string(catalogue_size()) + "]");
  }
  auto it = std::partition_point(
      segments_.begin(), segments_.end(),
      [n](const Segment& s) { return s.rank_hi < n; });
  return static_cast<std::size_t>(it - segments_.begin());
}

double PopularityLaw::popularity(Rank n) const {
  const std::size_t i = segment_of(n);
  if (const std::int64_t offset = q_table_offset_[i]; offset >= 0) {
    return q_table_[static_cast<std::size_t>(offset + (n - segments_[i].rank_lo))];
  }
  return segments_[i].at(static_cast<double>(n));
}

double PopularityLaw::partial_weight(Rank lo, Rank hi) const {
  if (lo > hi) return 0.0;
  const std::size_t first = segment_of(lo);
  const std::size_t last = segment_of(hi);
  auto identity = [](double q) { return q; };
  if (first == last) return sum_segment(first, lo, hi, identity);
  double total = sum_segment(first, lo, segments_[first].rank_hi, identity);
  total += cumulative_[last] - cumulative_[first + 1];
  total += sum_segment(last, segments_[last].rank_lo, hi, identity);
  return total;
}

PopularityLaw PopularityLaw::scaled(double kappa) const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("scale factor must be positive and finite");
  }
  std::vector<Segment> out = segments_;
  for (Segment& s : out) s.amplitude *= kappa;
  return PopularityLaw(std::move(out));
}

std::int64_t ObjectRecord::chunk_count() const {
  return (size_bytes + chunk_size_bytes - 1) / chunk_size_bytes;
}

double ObjectRecord::chunk_intensity() const {
  return leechers * static_cast<double>(chunk_size_bytes) /
         static_cast<double>(size_bytes);
}

// ---------------------------------------------------------------------------
// Analytic builders

PopularityLaw build_chained(std::span<const ChainPiece> pieces) {
  if (pieces.empty()) throw InvalidArgument("chained law needs pieces");
  std::vector<Segment> segments;
  segments.reserve(pieces.size());
  Rank lo = 1;
  double boundary_value = 1.0;  // q at the previous boundary rank
  double boundary_rank = 1.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const ChainPiece& p = pieces[k];
    if (p.rank_hi < lo) {
      throw InvalidArgument("chained pieces must have increasing rank_hi");
    }
    if (!(p.junction > 0.0)) throw InvalidArgument("junction must be > 0");
    const double start = k == 0 ? 1.0 : boundary_value * p.junction;
    const double amplitude = start * std::pow(boundary_rank, p.exponent);
    segments.push_back({lo, p.rank_hi, amplitude, p.exponent});
    boundary_rank = static_cast<double>(p.rank_hi);
    boundary_value = segments.back().at(boundary_rank);
    lo = p.rank_hi + 1;
  }
  return PopularityLaw(std::move(segments));
}

PopularityLaw build_zipf(double alpha, Rank n) {
  if (n < 1) throw InvalidArgument("catalogue size must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("Zipf exponent must be >= 0");
  }
  return PopularityLaw({Segment{1, n, 1.0, alpha}});
}

EmpiricalBreakpoints empirical_breakpoints(Rank n) {
  if (n < empirical::kMinCatalogue) {
    throw InvalidArgument("empirical law needs N >= " +
                          std::to_string(empirical::kMinCatalogue));
  }
  return {n / empirical::kHeadRankDivisor, n / empirical::kBodyRankDivisor, n};
}

std::vector<ChainPiece> empirical_pieces(Rank n) {
  using namespace empirical;
  const EmpiricalBreakpoints bp = empirical_breakpoints(n);
  std::vector<ChainPiece> pieces;
  pieces.push_back({bp.head_end, kHeadExponent, 1.0});
  pieces.push_back({bp.body_end, kBodyExponent, kHeadBodyJunction});

  const double ratio = static_cast<double>(n) / static_cast<double>(bp.body_end);
  Rank previous = bp.body_end;
  for (int k = 0; k < kTailSegments; ++k) {
    Rank hi = k + 1 == kTailSegments
                  ? n
                  : static_cast<Rank>(std::llround(
                        static_cast<double>(bp.body_end) *
                        std::pow(ratio, static_cast<double>(k + 1) / kTailSegments)));
    hi = std::clamp(hi, previous + 1, n);
    if (hi <= previous) break;  // catalogue too small for a full tail split
    const double position = static_cast<double>(k) / (kTailSegments - 1);
    const double exponent =
        kTailExponentFirst + (kTailExponentLast - kTailExponentFirst) *
                                 std::pow(position, kTailExponentShape);
    pieces.push_back({hi, exponent, k == 0 ? kBodyTailJunction : 1.0});
    previous = hi;
  }
  return pieces;
}

PopularityLaw build_empirical(Rank n) {
  const std::vector<ChainPiece> pieces = empirical_pieces(n);
  return build_chained(pieces);
}

std::vector<double> traffic_shares(const PopularityLaw& law,
                                   std::span<const Rank> cuts) {
  if (cuts.empty()) throw InvalidArgument("traffic_shares needs cut ranks");
  if (cuts.back() != law.catalogue_size()) {
    throw InvalidArgument("last cut must equal the catalogue size");
  }
  std::vector<double> shares;
  shares.reserve(cuts.size());
  Rank lo = 1;
  for (Rank cut : cuts) {
    if (cut < lo || cut > law.catalogue_size()) {
      throw InvalidArgument("cuts must be strictly increasing within [1, N]");
    }
    shares.push_back(law.partial_weight(lo, cut) / law.total_weight());
    lo = cut + 1;
  }
  return shares;
}

// ---------------------------------------------------------------------------
// Object-record ingestion

PopularityLaw chunk_law_from_objects(std::span<const ObjectRecord> records) {
  std::vector<std::pair<double, std::int64_t>> runs;
  runs.reserve(records.size());
  for (const ObjectRecord& r : records) {
    if (r.size_bytes < 1 || r.chunk_size_bytes < 1 || !(r.leechers >= 0.0)) {
      throw InvalidArgument("invalid object record '" + r.object_id + "'");
    }
    if (r.leechers == 0.0) continue;
    runs.emplace_back(r.chunk_intensity(), r.chunk_count());
  }
  if (runs.empty()) {
    throw InvalidArgument("no object record has a positive leecher count");
  }
  return law_from_runs(std::move(runs));
}

PopularityLaw apply_impatience(std::span<const ObjectRecord> records,
                               double floor, std::int64_t size_min_bytes,
                               std::int64_t size_max_bytes) {
  if (!(floor > 0.0 && floor <= 1.0)) {
    throw InvalidArgument("impatience floor must lie in (0, 1]");
  }
  if (size_min_bytes > size_max_bytes) {
    throw InvalidArgument("size_min_bytes exceeds size_max_bytes");
  }
  std::vector<std::pair<double, std::int64_t>> runs;
  for (const ObjectRecord& r : records) {
    if (r.size_bytes < 1 || r.chunk_size_bytes < 1 || !(r.leechers >= 0.0)) {
      throw InvalidArgument("invalid object record '" + r.object_id + "'");
    }
    if (r.size_bytes < size_min_bytes || r.size_bytes > size_max_bytes) continue;
    if (r.leechers == 0.0) continue;
    const double base = r.chunk_intensity();
    const std::int64_t s = r.chunk_count();
    if (s == 1 || floor == 1.0) {
      runs.emplace_back(base, s);
      continue;
    }
    const double step = (1.0 - floor) / static_cast<double>(s - 1);
    for (std::int64_t k = 0; k < s; ++k) {
      runs.emplace_back(base * (1.0 - step * static_cast<double>(k)), 1);
    }
  }
  if (runs.empty()) {
    throw EmptyCatalogue("no object record survives the size filter");
  }
  return law_from_runs(std::move(runs));
}

}  // namespace icn
