#include "icn/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "icn/che.hpp"
#include "icn/errors.hpp"

namespace icn {
namespace {

constexpr double kBytesPerGb = 1e9;
constexpr int kGridPointsPerDecade = 64;
constexpr double kGridLowestFraction = 1e-6;
constexpr double kNearlyFraction = 0.05;
constexpr double kThetaSlack = 1e-12;

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  }
}

void require_fraction(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw InvalidArgument("normalized cache size must lie in [0, 1], got " +
                          std::to_string(c));
  }
}

void require_partitions(int p) {
  if (p < 1) throw InvalidArgument("partition count must be >= 1");
}

std::size_t argmin_of(const std::vector<TradeoffPoint>& pts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].cost < pts[best].cost) best = i;
  }
  return best;
}

double delta_from_theta(double gamma, double theta, double c, double beta) {
  return gamma * std::pow(std::max(0.0, 1.0 - theta), beta) + c;
}

}  // namespace

void CostParams::validate() const {
  require_nonnegative(k_b, "k_b");
  require_nonnegative(k_m, "k_m");
  require_nonnegative(k_s, "k_s");
  require_nonnegative(k_b_prime, "k_b_prime");
  if (!(traffic_mbps > 0.0) || !std::isfinite(traffic_mbps)) {
    throw InvalidArgument("traffic T must be > 0");
  }
  if (sites < 1) throw InvalidArgument("site count S must be >= 1");
  if (!(overall_target > 0.0 && overall_target <= 1.0)) {
    throw InvalidArgument("overall target Theta must lie in (0, 1]");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidArgument("beta must lie in (0, 1]");
  }
  if (chunk_bytes < 1) throw InvalidArgument("chunk_bytes must be >= 1");
}

double chunks_to_gb(double chunks, std::int64_t chunk_bytes) {
  return chunks * static_cast<double>(chunk_bytes) / kBytesPerGb;
}

double cost_difference(const PopularityLaw& law, const CostParams& params,
                       double c) {
  params.validate();
  const double n = static_cast<double>(law.catalogue_size());
  if (!(c >= 0.0 && c <= n)) {
    throw InvalidArgument("cache size must lie in [0, N], got " +
                          std::to_string(c));
  }
  const double theta = overall_hit_rate(law, c);
  double level2 = 0.0;
  if (params.overall_target < 1.0) {
    level2 = level2_size_for_target(law, c, params.overall_target);
  } else if (params.count_constant_level2) {
    level2 = n;
  }
  const double bandwidth =
      std::pow(params.traffic_mbps * std::max(0.0, 1.0 - theta), params.beta) *
      (params.k_b + params.k_s);
  const double memory =
      chunks_to_gb(params.sites * c + level2, params.chunk_bytes) * params.k_m;
  return bandwidth + memory;
}

double gamma(const CostParams& params, Rank n) {
  params.validate();
  if (n < 1) throw InvalidArgument("catalogue size must be >= 1");
  const double memory = params.sites *
                        chunks_to_gb(static_cast<double>(n), params.chunk_bytes) *
                        params.k_m;
  if (!(memory > 0.0)) throw InvalidArgument("memory cost k_m must be > 0");
  return std::pow(params.traffic_mbps, params.beta) * params.k_b / memory;
}

double normalized_delta(const PopularityLaw& law, double gamma, double c,
                        double beta, double overall_target) {
  require_fraction(c);
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
  const double theta =
      overall_hit_rate(law, c * static_cast<double>(law.catalogue_size()));
  if (theta > overall_target + kThetaSlack) {
    throw TruncatedDomain("theta(c)=" + std::to_string(theta) +
                          " exceeds the overall target " +
                          std::to_string(overall_target));
  }
  return delta_from_theta(gamma, theta, c, beta);
}

double delta_load_sharing(const PopularityLaw& law, double gamma,
                          double kb_ratio, double c, int p) {
  require_partitions(p);
  const double share = 1.0 - 1.0 / p;
  return normalized_delta(law, gamma, c, 1.0, 1.0) + share * (gamma * kb_ratio - c);
}

double interaid_size_for_hit(const PopularityLaw& law, double theta_target,
                             int p) {
  require_partitions(p);
  if (!(theta_target >= 0.0 && theta_target <= 1.0)) {
    throw InvalidArgument("hit-rate target must lie in [0, 1]");
  }
  const double n = static_cast<double>(law.catalogue_size());
  if (theta_target == 0.0) return 0.0;
  if (theta_target >= 1.0) return n;
  if (p == 1) return cache_size_for_hit(law, theta_target);

  const double log_n = std::log(n);
  auto f = [&](double u) {
    const double v =
        interaid_hit_rates(law, std::exp(u), p).theta_level1 - theta_target;
    return std::abs(v) <= 1e-12 ? 0.0 : v;
  };
  // Plain sizes C/P and C for the same rate usually bracket the answer.
  const double plain = cache_size_for_hit(law, theta_target);
  double lo = std::log(std::max(plain / p, n * 1e-300));
  double hi = std::min(std::log(plain), log_n);
  double f_lo = f(lo);
  if (f_lo == 0.0) return std::exp(lo);
  double step = std::log(2.0);
  while (f_lo > 0.0) {
    hi = lo;
    lo -= step;
    step *= 2.0;
    if (lo < -700.0) throw NumericFailure("interaid size search underflows");
    f_lo = f(lo);
  }
  double f_hi = f(hi);
  step = std::log(2.0);
  while (f_hi < 0.0) {
    if (hi >= log_n) return n;
    lo = hi;
    f_lo = f_hi;
    hi = std::min(hi + step, log_n);
    step *= 2.0;
    f_hi = f(hi);
  }
  if (f_lo == 0.0) return std::exp(lo);
  if (f_hi == 0.0) return std::exp(hi);
  std::uintmax_t max_iter = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40),
      max_iter);
  if (max_iter >= 100) {
    throw NumericFailure("interaid size search did not converge (target " +
                         std::to_string(theta_target) + ", P=" +
                         std::to_string(p) + ")");
  }
  return std::exp(0.5 * (a + b));
}

CooperativeDelta delta_cooperative(const PopularityLaw& law, double gamma,
                                   double kb_ratio, double c, int p) {
  require_fraction(c);
  require_partitions(p);
  const double n = static_cast<double>(law.catalogue_size());
  const double share = 1.0 - 1.0 / p;
  const double theta = overall_hit_rate(law, c * n);

  CooperativeDelta out;
  out.theta = theta;
  if (p == 1) {
    out.cache_size = c * n;
    out.theta_foreign = theta;
    out.value = delta_from_theta(gamma, theta, c, 1.0);
    out.bound = out.value;
    return out;
  }
  out.cache_size = interaid_size_for_hit(law, theta, p);
  out.theta_foreign =
      out.cache_size > 0.0 ? interaid_hit_rates(law, out.cache_size, p).theta_foreign
                           : 0.0;
  out.value = out.cache_size / n + gamma * (1.0 - theta) +
              gamma * kb_ratio * share * (1.0 - out.theta_foreign);
  const double theta_part = overall_hit_rate(law, c * n / p);
  out.bound = delta_from_theta(gamma, theta, c, 1.0) +
              share * (gamma * kb_ratio * (1.0 - theta_part) - c);
  return out;
}

std::string to_string(OptimumKind kind) {
  switch (kind) {
    case OptimumKind::kNone: return "none";
    case OptimumKind::kNearlyNone: return "nearly-none";
    case OptimumKind::kInterior: return "interior";
    case OptimumKind::kNearlyAll: return "nearly-all";
    case OptimumKind::kAll: return "all";
  }
  return "interior";
}

CacheOptimum optimize_cache_size(const PopularityLaw& law,
                                 const CostParams& params) {
  params.validate();
  const double n = static_cast<double>(law.catalogue_size());
  const double c_max = params.overall_target < 1.0
                           ? cache_size_for_hit(law, params.overall_target)
                           : n;

  CacheOptimum out;
  out.max_feasible_size = c_max;
  out.curve.units = "chunks";
  auto point = [&](double size) {
    const double clamped = std::min(size, c_max);
    return TradeoffPoint{clamped, cost_difference(law, params, clamped),
                         overall_hit_rate(law, clamped)};
  };

  auto& pts = out.curve.points;
  pts.push_back(point(0.0));
  const double c_min = n * kGridLowestFraction;
  if (c_max > c_min) {
    const double l0 = std::log10(c_min);
    const double l1 = std::log10(c_max);
    const auto steps = static_cast<int>(std::ceil((l1 - l0) * kGridPointsPerDecade));
    for (int i = 0; i < steps; ++i) {
      pts.push_back(point(std::pow(10.0, l0 + static_cast<double>(i) / kGridPointsPerDecade)));
    }
  }
  if (c_max > 0.0) pts.push_back(point(c_max));
  out.curve.argmin = argmin_of(pts);

  std::size_t best = out.curve.argmin;
  TradeoffPoint opt = pts[best];
  if (best > 0 && best + 1 < pts.size()) {
    // Refine on log C within the neighbouring grid points.
    const double lo = std::log(pts[best - 1].size > 0.0 ? pts[best - 1].size
                                                        : pts[best].size / 2.0);
    const double hi = std::log(pts[best + 1].size);
    auto f = [&](double u) {
      return cost_difference(law, params, std::min(std::exp(u), c_max));
    };
    std::uintmax_t max_iter = 200;
    // 20 bits on log C is far below 0.1% in cost.
    const auto [u, cost] = boost::math::tools::brent_find_minima(f, lo, hi, 20, max_iter);
    if (cost < opt.cost) {
      const double size = std::min(std::exp(u), c_max);
      opt = TradeoffPoint{size, cost, overall_hit_rate(law, size)};
    }
  }
  out.cache_size = opt.size;
  out.cost = opt.cost;
  out.theta = opt.theta;
  out.interior = opt.size > 0.0 && opt.size < c_max;

  const double rel = opt.size / n;
  if (opt.size <= 0.0) {
    out.kind = OptimumKind::kNone;
  } else if (opt.size >= c_max) {
    out.kind = OptimumKind::kAll;
  } else if (rel <= kNearlyFraction) {
    out.kind = OptimumKind::kNearlyNone;
  } else if (rel >= c_max / n - kNearlyFraction) {
    out.kind = OptimumKind::kNearlyAll;
  } else {
    out.kind = OptimumKind::kInterior;
  }
  return out;
}

TradeoffCurve cost_curve(const PopularityLaw& law, const CostParams& params,
                         std::span<const double> sizes) {
  TradeoffCurve out;
  out.units = "chunks";
  std::vector<double> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  for (double s : sorted) {
    out.points.push_back({s, cost_difference(law, params, s), overall_hit_rate(law, s)});
  }
  if (out.points.empty()) throw InvalidArgument("cost curve needs at least one size");
  out.argmin = argmin_of(out.points);
  return out;
}

TradeoffCurve normalized_curve(const PopularityLaw& law, double gamma,
                               double beta, double overall_target,
                               std::span<const double> cs) {
  TradeoffCurve out;
  out.units = "normalized";
  std::vector<double> sorted(cs.begin(), cs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(law.catalogue_size());
  for (double c : sorted) {
    require_fraction(c);
    const double theta = overall_hit_rate(law, c * n);
    if (theta > overall_target + kThetaSlack) continue;
    out.points.push_back({c, delta_from_theta(gamma, theta, c, beta), theta});
  }
  if (out.points.empty()) {
    throw TruncatedDomain("every grid point lies beyond the overall target");
  }
  out.argmin = argmin_of(out.points);
  return out;
}

}  // namespace icn
