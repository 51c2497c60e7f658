#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/duality.hpp"
#include "otclt/measure.hpp"

namespace otclt {

/// Everything a confidence-interval computation reports. The interval is
/// Wald-type and symmetric about the statistic; `center_note` records the
/// centering caveat (the limit theorems center at an expectation, not at
/// the population cost).
struct CltReport {
  double statistic = 0.0;
  double sigma_sq_hat = 0.0;  // variance entering the rate (v-hat or beta^2)
  double stderr_value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
  int n = 0;
  int m = 0;  // 0 in one-sample mode
  double lambda = 0.0;  // n/(n+m) in two-sample mode, else 0
  std::optional<double> es_bound;
  std::string center_note;
  bool degenerate_variance = false;  // sigma-hat == 0 with n > 1
};

/// Weighted variance of an (anchored) potential under its side's weights;
/// invariant under constant shifts of the potential.
double sigma_sq_plugin(const PotentialVector& potential, std::span<const double> weights);

/// One-sample interval for T_c(P_n, Q) against a fixed discrete Q.
/// sigma-hat^2 is the plug-in variance of the canonical P-side potential
/// and the rate is sqrt(n).
CltReport one_sample_ci(const CostSpec& spec, const DiscreteMeasure& X_sample,
                        const DiscreteMeasure& Q, double alpha);

/// Two-sample interval: variance mixture (1-lambda) sigma^2_P + lambda
/// sigma^2_Q with lambda = n/(n+m) and rate sqrt(nm/(n+m)).
CltReport two_sample_ci(const CostSpec& spec, const DiscreteMeasure& X_sample,
                        const DiscreteMeasure& Y_sample, double alpha);

/// A Hoelder-conjugate exponent pair (1/q1 + 1/q2 = 1); infinity selects
/// the empirical-max form of the corresponding factor.
struct HoelderPair {
  double q1 = 2.0;
  double q2 = 2.0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Plug-in resampling variance bound: the infimum over the supplied
/// exponent pairs of
///   (E|X-X'|^{2 q1})^{1/q1} * (E|grad h(X-Y)|^{2 q2})^{1/q2},
/// estimated by a U-statistic over X pairs and the product empirical
/// measure over (X, Y) pairs. When `pairs` is empty a default set is
/// used: (1, inf), (p, p/(p-1)) for power costs, (2, 2) and (inf, 1).
/// Returns +inf when a moment estimate is non-finite.
double efron_stein_bound(const CostSpec& spec, const DiscreteMeasure& X_sample,
                         const DiscreteMeasure& Y_sample,
                         std::span<const HoelderPair> pairs = {});

/// Delta-method interval for W_p = T^(1/p). Requires the statistic to
/// clear the separation floor eps_sep; identical samples are rejected
/// because the delta method degenerates at W_p = 0.
CltReport wasserstein_ci(const CostSpec& spec, const DiscreteMeasure& X_sample,
                         const DiscreteMeasure& Y_sample, double alpha,
                         double eps_sep = 1e-6);

}  // namespace otclt
