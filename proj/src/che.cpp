#include "icn/che.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "icn/errors.hpp"

namespace icn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;
constexpr int kInteraidMaxIterations = 200;
constexpr double kInteraidTolerance = 1e-8;

// Root of g(t) for g increasing in t with g(0+) < 0 < g(+inf). Works on
// u = ln t: the occupancy and hit-rate curves are sigmoids in u. Values with
// |g| <= abs_tol count as exact roots, which ends the search early.
template <class G>
double solve_increasing(const G& g, double guess, double abs_tol) {
  auto f = [&](double u) {
    const double v = g(std::exp(u));
    return std::abs(v) <= abs_tol ? 0.0 : v;
  };
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;
  double lo = std::log(guess);
  double f_lo = f(lo);
  if (f_lo == 0.0) return std::exp(lo);
  double hi = lo;
  double f_hi = f_lo;
  double step = kLn2;
  constexpr double kMaxLogTime = 700.0;
  if (f_lo < 0.0) {
    while (f_hi < 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi += step;
      step *= 2.0;
      if (hi > kMaxLogTime) throw NumericFailure("characteristic time diverges");
      f_hi = f(hi);
    }
  } else {
    while (f_lo > 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo -= step;
      step *= 2.0;
      if (lo < -kMaxLogTime) throw NumericFailure("characteristic time underflows");
      f_lo = f(lo);
    }
  }
  if (f_lo == 0.0) return std::exp(lo);
  if (f_hi == 0.0) return std::exp(hi);

  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52),
      max_iter);
  const double ga = std::abs(g(std::exp(a)));
  const double gb = std::abs(g(std::exp(b)));
  return std::exp(ga <= gb ? a : b);
}

void require_cache_size(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("cache size must be finite and >= 0, got " +
                          std::to_string(c));
  }
}

double occupancy_guess(const PopularityLaw& law, double c) {
  // Exact for a uniform law.
  const double n = static_cast<double>(law.catalogue_size());
  const double fill = std::min(c / n, 1.0 - 1e-12);
  return -std::log1p(-fill) * n / law.total_weight();
}

// Calls fn(q, n) for every rank, walking the segments directly.
template <class Fn>
void for_each_rank(const PopularityLaw& law, const Fn& fn) {
  for (const Segment& s : law.segments()) {
    for (Rank n = s.rank_lo; n <= s.rank_hi; ++n) {
      fn(s.at(static_cast<double>(n)), n);
    }
  }
}

}  // namespace

double hit_rate(const PopularityLaw& law, double t_c, Rank n) {
  if (!(t_c >= 0.0)) throw InvalidArgument("characteristic time must be >= 0");
  return hit_probability(law.popularity(n), t_c);
}

double hit_rate_at_time(const PopularityLaw& law, double t) {
  if (std::isinf(t)) return 1.0;
  return law.sum([t](double q) { return q * -std::expm1(-q * t); }) /
         law.total_weight();
}

double occupancy_at_time(const PopularityLaw& law, double t) {
  if (std::isinf(t)) return static_cast<double>(law.catalogue_size());
  return law.sum([t](double q) { return -std::expm1(-q * t); });
}

CheSolution solve_characteristic_time(const PopularityLaw& law,
                                      double cache_size) {
  require_cache_size(cache_size);
  CheSolution out;
  out.cache_size = cache_size;
  if (cache_size == 0.0) return out;
  if (cache_size >= static_cast<double>(law.catalogue_size())) {
    out.t_c = kInf;
    out.saturated = true;
    out.theta = 1.0;
    return out;
  }
  const double scale = std::max(cache_size, 1.0);
  auto g = [&](double t) { return occupancy_at_time(law, t) - cache_size; };
  out.t_c = solve_increasing(g, occupancy_guess(law, cache_size), 1e-10 * scale);
  out.residual = std::abs(g(out.t_c)) / scale;
  out.theta = hit_rate_at_time(law, out.t_c);
  return out;
}

CheSolution solve_characteristic_time(const PopularityLaw& law,
                                      double cache_size,
                                      const SizeFunction& sizes) {
  require_cache_size(cache_size);
  if (!sizes) return solve_characteristic_time(law, cache_size);
  double capacity = 0.0;
  for_each_rank(law, [&](double, Rank n) {
    const double s = sizes(n);
    if (!(s > 0.0)) throw InvalidArgument("object sizes must be positive");
    capacity += s;
  });
  CheSolution out;
  out.cache_size = cache_size;
  if (cache_size == 0.0) return out;
  if (cache_size >= capacity) {
    out.t_c = kInf;
    out.saturated = true;
    out.theta = 1.0;
    return out;
  }
  auto occupancy = [&](double t) {
    double acc = 0.0;
    for_each_rank(law, [&](double q, Rank n) { acc += -std::expm1(-q * t) * sizes(n); });
    return acc;
  };
  const double scale = std::max(cache_size, 1.0);
  auto g = [&](double t) { return occupancy(t) - cache_size; };
  const double guess = -std::log1p(-cache_size / capacity) *
                       static_cast<double>(law.catalogue_size()) /
                       law.total_weight();
  out.t_c = solve_increasing(g, guess, 1e-10 * scale);
  out.residual = std::abs(g(out.t_c)) / scale;
  out.theta = hit_rate_at_time(law, out.t_c);
  return out;
}

double overall_hit_rate(const PopularityLaw& law, double cache_size) {
  return solve_characteristic_time(law, cache_size).theta;
}

double cache_size_for_hit(const PopularityLaw& law, double theta_target) {
  if (!(theta_target >= 0.0 && theta_target <= 1.0)) {
    throw InvalidArgument("hit-rate target must lie in [0, 1]");
  }
  if (theta_target == 0.0) return 0.0;
  if (theta_target == 1.0) return static_cast<double>(law.catalogue_size());
  auto g = [&](double t) { return hit_rate_at_time(law, t) - theta_target; };
  const double guess =
      static_cast<double>(law.catalogue_size()) / law.total_weight();
  const double t = solve_increasing(g, guess, 1e-13);
  return std::min(occupancy_at_time(law, t),
                  static_cast<double>(law.catalogue_size()));
}

double level2_size_for_target(const PopularityLaw& law, double c1,
                              double overall_target) {
  require_cache_size(c1);
  if (!(overall_target >= 0.0 && overall_target <= 1.0)) {
    throw InvalidArgument("overall hit-rate target must lie in [0, 1]");
  }
  const double n = static_cast<double>(law.catalogue_size());
  if (overall_target == 1.0) return n;

  const CheSolution level1 = solve_characteristic_time(law, c1);
  if (overall_target < level1.theta - 1e-12) {
    throw InfeasibleTarget("overall target " + std::to_string(overall_target) +
                           " is below the level-1 hit rate " +
                           std::to_string(level1.theta));
  }
  if (overall_target <= level1.theta) return 0.0;

  const double t1 = level1.t_c;
  const double w = law.total_weight();
  auto overall = [&](double t2) {
    return level1.theta + law.sum([t1, t2](double q) {
                            const double m = q * std::exp(-q * t1);
                            return m * -std::expm1(-m * t2);
                          }) / w;
  };
  auto g = [&](double t2) { return overall(t2) - overall_target; };
  const double t2 = solve_increasing(g, std::max(t1, 1.0), 1e-13);
  return law.sum([t1, t2](double q) {
    const double m = q * std::exp(-q * t1);
    return -std::expm1(-m * t2);
  });
}

double two_level_hit_rate(const PopularityLaw& law, double c1, double c2) {
  require_cache_size(c1);
  require_cache_size(c2);
  const double n = static_cast<double>(law.catalogue_size());
  const CheSolution level1 = solve_characteristic_time(law, c1);
  if (level1.saturated || c2 >= n) return 1.0;
  if (c2 == 0.0) return level1.theta;
  const double t1 = level1.t_c;
  auto miss_rate = [t1](double q) { return q * std::exp(-q * t1); };
  auto g = [&](double t2) {
    return law.sum([&](double q) { return -std::expm1(-miss_rate(q) * t2); }) - c2;
  };
  const double t2 = solve_increasing(g, std::max(t1, 1.0), 1e-10 * std::max(c2, 1.0));
  return level1.theta + law.sum([&](double q) {
                          const double m = miss_rate(q);
                          return m * -std::expm1(-m * t2);
                        }) / law.total_weight();
}

InteraidSolution interaid_hit_rates(const PopularityLaw& law, double cache_size,
                                    int p) {
  require_cache_size(cache_size);
  if (p < 1) throw InvalidArgument("partition count must be >= 1");
  InteraidSolution out;
  if (cache_size == 0.0) return out;

  const CheSolution plain = solve_characteristic_time(law, cache_size);
  if (plain.saturated || p == 1) {
    out.t_c = plain.t_c;
    out.theta_local = out.theta_level1 = out.theta_foreign = plain.theta;
    return out;
  }

  const double share_own = 1.0 / p;
  const double share_foreign = 1.0 - share_own;
  const double boost = static_cast<double>(p - 1);
  const double scale = std::max(cache_size, 1.0);

  // Damped iteration: q' is frozen at the current t, the balance equation is
  // solved for a new t, and the two are averaged.
  double t = plain.t_c;
  bool converged = false;
  double last_change = kInf;
  for (int it = 1; it <= kInteraidMaxIterations; ++it) {
    const double t_frozen = t;
    auto g = [&](double t_new) {
      return law.sum([&](double q) {
               const double q_own = q * (1.0 + boost * std::exp(-q * t_frozen));
               return share_own * -std::expm1(-q_own * t_new) +
                      share_foreign * -std::expm1(-q * t_new);
             }) -
             cache_size;
    };
    const double solved = solve_increasing(g, t, 1e-10 * scale);
    const double next = 0.5 * t + 0.5 * solved;
    last_change = std::abs(next - t) / t;
    t = next;
    out.iterations = it;
    if (last_change < kInteraidTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericFailure("interaid fixed point did not converge after " +
                         std::to_string(kInteraidMaxIterations) +
                         " iterations (t_c=" + std::to_string(t) +
                         ", last relative change=" + std::to_string(last_change) +
                         ", C=" + std::to_string(cache_size) +
                         ", P=" + std::to_string(p) + ")");
  }

  const double w = law.total_weight();
  out.t_c = t;
  out.theta_local = law.sum([&](double q) {
                      const double q_own = q * (1.0 + boost * std::exp(-q * t));
                      return q * (share_own * -std::expm1(-q_own * t) +
                                  share_foreign * -std::expm1(-q * t));
                    }) / w;
  out.theta_level1 =
      out.theta_local + law.sum([&](double q) {
                          const double q_own = q * (1.0 + boost * std::exp(-q * t));
                          return q * share_foreign * std::exp(-q * t) *
                                 -std::expm1(-q_own * t);
                        }) / w;
  out.theta_foreign = hit_rate_at_time(law, t);
  return out;
}

}  // namespace icn
