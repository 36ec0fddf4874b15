#pragma once

// Memory-bandwidth cost model of a two-level cache hierarchy and of its
// load-sharing and cooperative (interaid) variants.
//
// Units: costs in $/month, traffic in Mbps, memory in GB (1 GB = 1e9 bytes),
// cache sizes in chunks of CostParams::chunk_bytes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icn/popularity.hpp"

namespace icn {

struct CostParams {
  double k_b = 15.0;         ///< $ per Mbps per month, level 2 <-> level 1
  double k_m = 0.15;         ///< $ per GB per month
  double k_s = 0.0;          ///< $ per Mbps per month, serving cost
  double k_b_prime = 0.0;    ///< $ per Mbps per month, between level-1 caches
  double traffic_mbps = 1e6; ///< T, peak download traffic
  int sites = 100;           ///< S, number of level-1 sites
  double overall_target = 1.0;  ///< Theta
  double beta = 1.0;         ///< bandwidth cost ~ traffic^beta
  std::int64_t chunk_bytes = kDefaultChunkBytes;
  /// With Theta = 1 the level-2 size is N whatever C, a constant left out of
  /// cost_difference unless this is set.
  bool count_constant_level2 = false;

  /// T = 1 Tbps, S = 100, k_b = $15, k_m = $0.15, k_s neglected, Theta = 1.
  static CostParams nominal() { return {}; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  bool operator==(const CostParams&) const = default;
};

[[nodiscard]] double chunks_to_gb(double chunks, std::int64_t chunk_bytes);

struct TradeoffPoint {
  double size = 0.0;  ///< C in chunks, or c = C/N for normalized curves
  double cost = 0.0;  ///< $/month, or normalized delta
  double theta = 0.0; ///< level-1 hit rate
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;
  std::size_t argmin = 0;
  std::string units;  ///< "chunks" or "normalized"
};

/// Delta(C) = (T (1 - theta))^beta (k_b + k_s) + (S C + Cbar) k_m, where Cbar
/// is the level-2 size meeting the overall target. beta = 1 is the linear
/// cost model.
[[nodiscard]] double cost_difference(const PopularityLaw& law,
                                     const CostParams& params, double c);

/// Gamma = T^beta k_b / (S N k_m) with N converted to GB.
[[nodiscard]] double gamma(const CostParams& params, Rank n);

/// delta(c) = Gamma (1 - theta(c))^beta + c. Throws TruncatedDomain when
/// theta(c) exceeds the overall target, InvalidArgument for c outside [0,1].
[[nodiscard]] double normalized_delta(const PopularityLaw& law, double gamma,
                                      double c, double beta,
                                      double overall_target);

/// delta(c) + (1 - 1/P)(Gamma k'_b/k_b - c).
[[nodiscard]] double delta_load_sharing(const PopularityLaw& law, double gamma,
                                        double kb_ratio, double c, int p);

struct CooperativeDelta {
  double value = 0.0;
  /// Approximate lower bound delta(c) + (1-1/P)(Gamma k'_b/k_b (1 - theta(c/P)) - c).
  double bound = 0.0;
  /// Interaid cache size giving the same level-1 hit rate as size c N.
  double cache_size = 0.0;
  double theta = 0.0;
  double theta_foreign = 0.0;
};

/// Normalized cost of the interaid scheme sized to match the plain
/// hierarchy's level-1 hit rate at c.
[[nodiscard]] CooperativeDelta delta_cooperative(const PopularityLaw& law,
                                                 double gamma, double kb_ratio,
                                                 double c, int p);

/// Smallest interaid cache size whose level-1 hit rate reaches theta_target.
[[nodiscard]] double interaid_size_for_hit(const PopularityLaw& law,
                                           double theta_target, int p);

enum class OptimumKind { kNone, kNearlyNone, kInterior, kNearlyAll, kAll };

[[nodiscard]] std::string to_string(OptimumKind kind);

struct CacheOptimum {
  double cache_size = 0.0;  ///< C* in chunks
  double cost = 0.0;        ///< Delta* in $/month
  double theta = 0.0;       ///< level-1 hit rate at C*
  /// C* strictly between 0 and the largest feasible size.
  bool interior = false;
  /// Position of C* relative to the feasible range, with "nearly" meaning
  /// within 5% of the catalogue of an endpoint.
  OptimumKind kind = OptimumKind::kInterior;
  double max_feasible_size = 0.0;
  TradeoffCurve curve;
};

/// Log grid (64 points per decade from N 1e-6 up to the largest feasible
/// size, plus C = 0) refined by golden-section search around the best point.
[[nodiscard]] CacheOptimum optimize_cache_size(const PopularityLaw& law,
                                               const CostParams& params);

/// Absolute costs at the given sizes (chunks).
[[nodiscard]] TradeoffCurve cost_curve(const PopularityLaw& law,
                                       const CostParams& params,
                                       std::span<const double> sizes);

/// Normalized costs at the given c values; points in the truncated region
/// (theta(c) > overall_target) are skipped.
[[nodiscard]] TradeoffCurve normalized_curve(const PopularityLaw& law,
                                             double gamma, double beta,
                                             double overall_target,
                                             std::span<const double> cs);

}  // namespace icn
