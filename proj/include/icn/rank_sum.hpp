#pragma once

// Summation of smooth functions over long runs of integer ranks.
//
// Sum_{n=a}^{b} g(n) is evaluated as the integral over [a-1/2, b+1/2] minus
// the first midpoint Euler-Maclaurin correction (g'(b+1/2) - g'(a-1/2))/24.
// The next correction is O(g'''), i.e. relative O(a^-3), so callers only use
// this path once ranks are large; small ranks are summed exactly.

#include <cmath>
#include <cstdint>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace icn::detail {

/// Segments with at most this many ranks are summed term by term.
inline constexpr std::int64_t kExactSumLimit = 1'000'000;

/// Long segments starting below this rank have their leading ranks summed
/// exactly; the Euler-Maclaurin remainder is then only used for n >= this.
inline constexpr std::int64_t kExactPrefixRanks = 10'000;

inline constexpr double kQuadratureRelTol = 1e-11;

/// Integral of g over [lo, hi] (0 < lo < hi) after the substitution x = e^u,
/// which turns power-law integrands into gently varying ones.
template <class G>
double integrate_log_scale(const G& g, double lo, double hi) {
  auto integrand = [&g](double u) {
    const double x = std::exp(u);
    return g(x) * x;
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 21>;
  return Quadrature::integrate(integrand, std::log(lo), std::log(hi), 20,
                               kQuadratureRelTol);
}

template <class G>
double central_derivative(const G& g, double x) {
  const double h = 1e-3 * x;
  return (g(x + h) - g(x - h)) / (2.0 * h);
}

/// Sum_{n=a}^{b} g(n) for a >= 2 and a smooth g (see file comment).
template <class G>
double euler_maclaurin_sum(const G& g, std::int64_t a, std::int64_t b) {
  const double lo = static_cast<double>(a) - 0.5;
  const double hi = static_cast<double>(b) + 0.5;
  const double integral = integrate_log_scale(g, lo, hi);
  const double correction =
      (central_derivative(g, hi) - central_derivative(g, lo)) / 24.0;
  return integral - correction;
}

}  // namespace icn::detail
