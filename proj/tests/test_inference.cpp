#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "otclt/duality.hpp"
#include "otclt/inference.hpp"
#include "otclt/measure.hpp"
#include "otclt/oracle1d.hpp"
#include "otclt/rng.hpp"
#include "otclt/solver.hpp"
#include "otclt/stats.hpp"

using namespace otclt;

namespace {

const CostSpec kP2d1 = CostSpec::power(2.0, 1);

DiscreteMeasure sample_uniform(double a, double b, int n, std::uint64_t seed,
                               const char* label = "P") {
  return empirical_from_sample(SampleSource::uniform({a}, {b}, label), n, seed);
}

}  // namespace

TEST_CASE("plug-in variance basics") {
  PotentialVector constant{PotentialVector::Side::P, {3.0, 3.0, 3.0}, std::nullopt};
  const std::vector<double> w3{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(sigma_sq_plugin(constant, w3) == doctest::Approx(0.0).epsilon(1e-15));

  PotentialVector bernoulli{PotentialVector::Side::P, {0.0, 1.0}, std::nullopt};
  const std::vector<double> w2{0.5, 0.5};
  CHECK(sigma_sq_plugin(bernoulli, w2) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("plug-in variance approaches the oracle value on the shift benchmark") {
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 2000, 42, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, 2000, 42, "Q");
  const auto duals = solve_discrete_ot(kP2d1, X, Y).second;
  const auto [u_cc, v_c] = canonical_potentials(kP2d1, duals, X, Y);
  const double sigma_p = sigma_sq_plugin(u_cc, X.weights());
  CHECK(std::abs(sigma_p - 1.0 / 12) <= 0.1 / 12);
}

TEST_CASE("one-sample interval against a point mass reduces to the moment statistic") {
  const int n = 300;
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, n, 7, "P");
  const DiscreteMeasure delta({0.0}, {1.0}, 1);
  const CltReport report = one_sample_ci(kP2d1, X, delta, 0.05);

  double mean_sq = 0.0;
  std::vector<double> squares(n);
  for (int i = 0; i < n; ++i) {
    squares[i] = X.point(i)[0] * X.point(i)[0];
    mean_sq += squares[i] / n;
  }
  CHECK(report.statistic == doctest::Approx(mean_sq).epsilon(1e-12));
  CHECK(report.sigma_sq_hat ==
        doctest::Approx(weighted_variance(squares, X.weights())).epsilon(1e-10));
  CHECK(report.n == n);
  CHECK(report.m == 0);
  CHECK(report.stderr_value ==
        doctest::Approx(std::sqrt(report.sigma_sq_hat / n)).epsilon(1e-12));
  CHECK(report.ci_lo < report.statistic);
  CHECK(report.ci_hi > report.statistic);
  CHECK(report.center_note == "CI targets E T_c(P_n,Q), not T_c(P,Q)");
}

TEST_CASE("one-sample interval on identical measures degenerates cleanly") {
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 50, 9, "P");
  const CltReport report = one_sample_ci(kP2d1, X, X, 0.05);
  CHECK(report.statistic == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(report.sigma_sq_hat == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(report.degenerate_variance);
  CHECK(report.ci_lo == doctest::Approx(report.ci_hi).epsilon(1e-14));
}

TEST_CASE("two-sample interval: lambda and the variance mixture") {
  const int n = 120, m = 80;
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, n, 3, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, m, 3, "Q");
  const CltReport report = two_sample_ci(kP2d1, X, Y, 0.05);
  CHECK(report.lambda == doctest::Approx(static_cast<double>(n) / (n + m)).epsilon(1e-15));

  const auto duals = solve_discrete_ot(kP2d1, X, Y).second;
  const auto [u_cc, v_c] = canonical_potentials(kP2d1, duals, X, Y);
  const double sp = sigma_sq_plugin(u_cc, X.weights());
  const double sq = sigma_sq_plugin(v_c, Y.weights());
  const double lambda = static_cast<double>(n) / (n + m);
  CHECK(report.sigma_sq_hat ==
        doctest::Approx((1.0 - lambda) * sp + lambda * sq).epsilon(1e-12));
  CHECK(report.stderr_value ==
        doctest::Approx(std::sqrt(report.sigma_sq_hat * (n + m) / (static_cast<double>(n) * m)))
            .epsilon(1e-12));

  // Equal sizes: lambda = 1/2 and the mixture is the average.
  const DiscreteMeasure Y2 = sample_uniform(0.5, 1.5, n, 4, "Q");
  const CltReport equal = two_sample_ci(kP2d1, X, Y2, 0.05);
  CHECK(equal.lambda == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("two-sample interval is exactly degenerate on identical samples") {
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 64, 5, "same");
  const DiscreteMeasure Y = sample_uniform(0.0, 1.0, 64, 5, "same");
  const CltReport report = two_sample_ci(kP2d1, X, Y, 0.05);
  CHECK(report.statistic == 0.0);
  CHECK(report.sigma_sq_hat == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(report.degenerate_variance);
}

TEST_CASE("interval width shrinks as alpha grows") {
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 100, 11, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, 100, 11, "Q");
  const CltReport narrow = two_sample_ci(kP2d1, X, Y, 0.10);
  const CltReport wide = two_sample_ci(kP2d1, X, Y, 0.01);
  CHECK(wide.ci_hi - wide.ci_lo >= narrow.ci_hi - narrow.ci_lo);
}

TEST_CASE("scale equivariance for the quadratic cost") {
  const int n = 60;
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, n, 13, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, n, 13, "Q");
  const double s = 2.5;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = s * X.point(i)[0];
    ys[i] = s * Y.point(i)[0];
  }
  const DiscreteMeasure Xs = DiscreteMeasure::with_uniform_weights(std::move(xs), 1);
  const DiscreteMeasure Ys = DiscreteMeasure::with_uniform_weights(std::move(ys), 1);

  const CltReport base = two_sample_ci(kP2d1, X, Y, 0.05);
  const CltReport scaled = two_sample_ci(kP2d1, Xs, Ys, 0.05);
  CHECK(scaled.statistic == doctest::Approx(s * s * base.statistic).epsilon(1e-9));
  CHECK(scaled.sigma_sq_hat ==
        doctest::Approx(s * s * s * s * base.sigma_sq_hat).epsilon(1e-9));

  const CltReport wp_base = wasserstein_ci(kP2d1, X, Y, 0.05);
  const CltReport wp_scaled = wasserstein_ci(kP2d1, Xs, Ys, 0.05);
  CHECK(wp_scaled.statistic == doctest::Approx(s * wp_base.statistic).epsilon(1e-9));
}

TEST_CASE("reports are invariant under opposite constant dual shifts") {
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 40, 21, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, 40, 21, "Q");
  const auto duals = solve_discrete_ot(kP2d1, X, Y).second;
  DualPair shifted = duals;
  for (double& u : shifted.u) u += 1.7;
  for (double& v : shifted.v) v -= 1.7;
  const auto [u1, v1] = canonical_potentials(kP2d1, duals, X, Y);
  const auto [u2, v2] = canonical_potentials(kP2d1, shifted, X, Y);
  CHECK(sigma_sq_plugin(u1, X.weights()) ==
        doctest::Approx(sigma_sq_plugin(u2, X.weights())).epsilon(1e-12));
  CHECK(sigma_sq_plugin(v1, Y.weights()) ==
        doctest::Approx(sigma_sq_plugin(v2, Y.weights())).epsilon(1e-12));
}

TEST_CASE("efron-stein bound: degenerate and closed-form cases") {
  // A single repeated X point makes every |X - X'| vanish.
  const DiscreteMeasure X_rep({0.4, 0.4, 0.4}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1);
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, 16, 2, "Q");
  CHECK(efron_stein_bound(kP2d1, X_rep, Y) == doctest::Approx(0.0).epsilon(1e-15));

  // p = 2 with (q1, q2) = (1, inf): E|X-X'|^2 * (max 2|X-Y|)^2.
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, 24, 3, "P");
  const std::vector<HoelderPair> pair_one_inf{{1.0, kInf}};
  const double bound = efron_stein_bound(kP2d1, X, Y, pair_one_inf);
  double mean_sq = 0.0, weight_total = 0.0, max_dist = 0.0;
  for (int i = 0; i < X.size(); ++i) {
    for (int j = i + 1; j < X.size(); ++j) {
      const double d = X.point(i)[0] - X.point(j)[0];
      mean_sq += d * d;
      weight_total += 1.0;
    }
  }
  mean_sq /= weight_total;
  for (int i = 0; i < X.size(); ++i) {
    for (int j = 0; j < Y.size(); ++j) {
      max_dist = std::max(max_dist, std::abs(X.point(i)[0] - Y.point(j)[0]));
    }
  }
  CHECK(bound == doctest::Approx(mean_sq * 4.0 * max_dist * max_dist).epsilon(1e-12));

  // The default pair set can only improve on any single pair.
  CHECK(efron_stein_bound(kP2d1, X, Y) <= bound + 1e-15);

  CHECK_THROWS_AS(efron_stein_bound(kP2d1, X, Y, std::vector<HoelderPair>{{2.0, 3.0}}),
                  std::invalid_argument);
}

TEST_CASE("efron-stein bound dominates the simulated variance on the shift benchmark") {
  // Smoke-scale version of the acceptance criterion: n = 200, 20 reps.
  const int n = 200, reps = 20;
  std::vector<double> stats(reps);
  std::vector<double> bounds(reps);
  for (int r = 0; r < reps; ++r) {
    const DiscreteMeasure X = empirical_from_sample(
        SampleSource::uniform({0.0}, {1.0}, "P"), n, 1000, r);
    const DiscreteMeasure Y = empirical_from_sample(
        SampleSource::uniform({0.5}, {1.5}, "Q"), n, 1000, r);
    stats[r] = solve_discrete_ot(kP2d1, X, Y).first.objective;
    bounds[r] = efron_stein_bound(kP2d1, X, Y);
  }
  const double n_var = n * sample_variance(stats);
  int covered = 0;
  for (double b : bounds) covered += (n_var <= b);
  CHECK(covered >= reps - 2);
}

TEST_CASE("wasserstein interval on the shift benchmark") {
  const int n = 500;
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, n, 31, "P");
  const DiscreteMeasure Y = sample_uniform(0.5, 1.5, n, 31, "Q");
  const CltReport base = two_sample_ci(kP2d1, X, Y, 0.05);
  const CltReport wp = wasserstein_ci(kP2d1, X, Y, 0.05);
  CHECK(wp.statistic == doctest::Approx(std::sqrt(base.statistic)).epsilon(1e-12));
  CHECK(wp.statistic == doctest::Approx(0.5).epsilon(0.1));
  // beta^2 = v / (p W^{p-1})^2 with p = 2.
  CHECK(wp.sigma_sq_hat ==
        doctest::Approx(base.sigma_sq_hat / (4.0 * base.statistic)).epsilon(1e-10));
  CHECK(wp.center_note == "CI targets (E T_c(P_n,Q_m))^{1/p}, not W_p(P,Q)");

  // The delta method refuses indistinguishable samples.
  const DiscreteMeasure Z1 = sample_uniform(0.0, 1.0, 32, 8, "same");
  const DiscreteMeasure Z2 = sample_uniform(0.0, 1.0, 32, 8, "same");
  CHECK_THROWS_WITH_AS(wasserstein_ci(kP2d1, Z1, Z2, 0.05),
                       doctest::Contains("indistinguishable"), std::invalid_argument);
}

TEST_CASE("one-sample sigma matches the oracle against a fine fixed grid") {
  // n = 400 draws of Unif(0,1) against a 400-point discretization of
  // Unif(0.5, 1.5); plug-in sigma^2 should sit near the oracle 1/12.
  const int n = 400;
  const DiscreteMeasure X = sample_uniform(0.0, 1.0, n, 17, "P");
  std::vector<double> grid_pts(n);
  for (int k = 0; k < n; ++k) grid_pts[k] = 0.5 + (k + 0.5) / n;
  const DiscreteMeasure Q = DiscreteMeasure::with_uniform_weights(std::move(grid_pts), 1);
  const CltReport report = one_sample_ci(kP2d1, X, Q, 0.05);
  CHECK(report.sigma_sq_hat > 0.06);
  CHECK(report.sigma_sq_hat < 0.11);
}
