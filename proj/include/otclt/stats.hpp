#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "otclt/error.hpp"

namespace otclt {

/// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Standard normal quantile (Wichura's PPND16 rational approximations,
/// absolute error below 1e-15 over the full open interval).
double normal_quantile(double u);

/// Two-sided z quantile for a (1-alpha) confidence interval.
inline double z_for_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  return normal_quantile(1.0 - alpha / 2.0);
}

/// Weighted mean. Weights are assumed normalized to sum 1.
double weighted_mean(std::span<const double> values, std::span<const double> weights);

/// Weighted variance, two-pass so that constant shifts cancel exactly.
double weighted_variance(std::span<const double> values, std::span<const double> weights);

/// Unbiased sample variance (divisor n-1), two-pass.
double sample_variance(std::span<const double> values);

double sample_mean(std::span<const double> values);

/// Kolmogorov-Smirnov distance between the empirical law of `values`
/// and the standard normal.
double ks_distance_normal(std::span<const double> values);

/// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1].
/// Results are cached per order; safe for concurrent use once warmed.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

/// One composite pass of the k-point rule over `pieces` equal subintervals.
/// When `abs_total` is supplied it accumulates the integral of |f|, which
/// the doubling driver uses as the convergence scale.
template <typename F>
double composite_gl(F&& f, double a, double b, int order, int pieces,
                    double* abs_total = nullptr) {
  const auto& [nodes, weights] = gauss_legendre(order);
  const double h = (b - a) / pieces;
  double total = 0.0;
  double abs_acc = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * h;
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    double abs_piece = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double v = f(mid + 0.5 * h * nodes[q]);
      acc += weights[q] * v;
      abs_piece += weights[q] * std::abs(v);
    }
    total += 0.5 * h * acc;
    abs_acc += 0.5 * h * abs_piece;
  }
  if (abs_total != nullptr) *abs_total = abs_acc;
  return total;
}

/// Composite Gauss-Legendre with interval doubling. Convergence is
/// declared when the change between refinements is below rel_tol times
/// the integral's scale (the larger of |integral| and the L1 mass), so
/// integrands with cancelling sign still settle.
template <typename F>
double integrate_doubling(F&& f, double a, double b, int order, double rel_tol,
                          int max_doublings = 18) {
  if (a == b) return 0.0;
  double abs_mass = 0.0;
  double prev = composite_gl(f, a, b, order, 1, &abs_mass);
  for (int level = 1; level <= max_doublings; ++level) {
    const double cur = composite_gl(f, a, b, order, 1 << level, &abs_mass);
    if (!std::isfinite(cur)) {
      throw NumericalError("quadrature produced a non-finite value");
    }
    const double scale = std::max({std::abs(cur), abs_mass, 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) {
      return cur;
    }
    prev = cur;
  }
  throw NumericalError("quadrature failed to converge after interval doubling");
}

}  // namespace otclt
