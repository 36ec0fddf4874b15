#pragma once

// Che approximation for LRU caches under the independent reference model.
//
// An object of popularity q is in an LRU cache with characteristic time t
// with probability h = 1 - exp(-q t); t is fixed by requiring the expected
// occupancy sum_n h(n) s_n to equal the cache size. Hit rates only depend on
// the relative values of q(n).

#include <cmath>
#include <functional>
#include <limits>

#include "icn/popularity.hpp"

namespace icn {

struct CheSolution {
  /// Characteristic time, +inf when saturated.
  double t_c = 0.0;
  bool saturated = false;
  double cache_size = 0.0;
  double theta = 0.0;
  /// |sum_n h(n) s_n - C| / max(C, 1).
  double residual = 0.0;
};

struct InteraidSolution {
  double t_c = 0.0;
  /// Hit rate at the local cache.
  double theta_local = 0.0;
  /// Local plus interaid (designated peer) hits.
  double theta_level1 = 0.0;
  /// Local hit rate restricted to chunks outside the cache's own partition.
  double theta_foreign = 0.0;
  int iterations = 0;
};

/// Size of rank n in chunks for the variable-size balance equation.
using SizeFunction = std::function<double(Rank)>;

inline double hit_probability(double q, double t) noexcept {
  if (std::isinf(t)) return 1.0;
  return -std::expm1(-q * t);
}

/// Residual target of every returned non-saturated solution.
inline constexpr double kCheResidualTol = 1e-8;

/// Throws InvalidArgument for negative or non-finite C.
[[nodiscard]] CheSolution solve_characteristic_time(const PopularityLaw& law,
                                                    double cache_size);

/// Variable-size variant: sum_n h(n) sizes(n) = C. Sums rank by rank, so it
/// is meant for catalogues that fit in a loop (N up to ~1e8). Valid in the
/// regime sizes(n) << C, which is not checked.
[[nodiscard]] CheSolution solve_characteristic_time(const PopularityLaw& law,
                                                    double cache_size,
                                                    const SizeFunction& sizes);

/// h(n) = 1 - exp(-q(n) t_c).
[[nodiscard]] double hit_rate(const PopularityLaw& law, double t_c, Rank n);

/// theta = sum q h / sum q at characteristic time t.
[[nodiscard]] double hit_rate_at_time(const PopularityLaw& law, double t);

/// Expected occupancy sum_n h(n) at characteristic time t.
[[nodiscard]] double occupancy_at_time(const PopularityLaw& law, double t);

[[nodiscard]] double overall_hit_rate(const PopularityLaw& law,
                                      double cache_size);

/// Smallest cache size whose overall hit rate reaches theta_target.
[[nodiscard]] double cache_size_for_hit(const PopularityLaw& law,
                                        double theta_target);

/// Level-2 capacity needed so that a two-level hierarchy with level-1 size
/// c1 serves a fraction `overall_target` of requests, assuming independent
/// cache occupancies. Throws InfeasibleTarget when the target is below the
/// level-1 hit rate.
[[nodiscard]] double level2_size_for_target(const PopularityLaw& law,
                                            double c1, double overall_target);

/// Overall hit rate of the two-level hierarchy for given level sizes.
[[nodiscard]] double two_level_hit_rate(const PopularityLaw& law, double c1,
                                        double c2);

/// Interaid cooperative network of P level-1 caches of size C each.
/// Throws NumericFailure if the fixed point does not settle.
[[nodiscard]] InteraidSolution interaid_hit_rates(const PopularityLaw& law,
                                                  double cache_size, int p);

}  // namespace icn
