#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "otclt/duality.hpp"
#include "otclt/measure.hpp"
#include "otclt/montecarlo.hpp"
#include "otclt/oracle1d.hpp"
#include "otclt/solver.hpp"

using namespace otclt;

namespace {

ExperimentConfig shift_benchmark(int n, int reps, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.cost = CostSpec::power(2.0, 1);
  cfg.p_law = SampleSource::uniform({0.0}, {1.0}, "P");
  cfg.q_law = SampleSource::uniform({0.5}, {1.5}, "Q");
  cfg.n = n;
  cfg.m = n;
  cfg.reps = reps;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("degenerate control: identical laws with paired streams give zero statistics") {
  ExperimentConfig cfg;
  cfg.cost = CostSpec::power(2.0, 1);
  cfg.p_law = SampleSource::uniform({0.0}, {1.0}, "shared");
  cfg.q_law = SampleSource::uniform({0.0}, {1.0}, "shared");
  cfg.n = cfg.m = 40;
  cfg.reps = 8;
  cfg.seed = 3;
  const CltSimResult result = simulate_clt(cfg, 0.0);
  for (double t : result.statistics) CHECK(t == 0.0);
}

TEST_CASE("simulation results are bit-identical across runs and thread counts") {
  ExperimentConfig cfg = shift_benchmark(60, 10, 11);
  cfg.threads = 1;
  const CltSimResult a = simulate_clt(cfg, 1.0 / 12);
  cfg.threads = 2;
  const CltSimResult b = simulate_clt(cfg, 1.0 / 12);
  REQUIRE(a.statistics.size() == b.statistics.size());
  for (std::size_t r = 0; r < a.statistics.size(); ++r) {
    CHECK(a.statistics[r] == b.statistics[r]);
    CHECK(a.standardized[r] == b.standardized[r]);
  }
  CHECK(a.empirical_variance_scaled == b.empirical_variance_scaled);
  CHECK(a.ks_distance == b.ks_distance);
}

TEST_CASE("per-rep streams are independent of the replication loop") {
  const ExperimentConfig cfg = shift_benchmark(30, 5, 99);
  const CltSimResult all = simulate_clt(cfg, 1.0 / 12);
  // Rep r recomputed in isolation matches the batch value.
  for (int r = 0; r < cfg.reps; ++r) {
    const DiscreteMeasure X = empirical_from_sample(cfg.p_law, cfg.n, cfg.seed, r);
    const DiscreteMeasure Y = empirical_from_sample(cfg.q_law, cfg.m, cfg.seed, r);
    const double t = solve_discrete_ot(cfg.cost, X, Y).first.objective;
    CHECK(t == all.statistics[r]);
  }
}

TEST_CASE("two-sample rate is nm/(n+m)") {
  ExperimentConfig cfg = shift_benchmark(30, 4, 5);
  cfg.m = 60;
  const CltSimResult result = simulate_clt(cfg, 1.0 / 12);
  CHECK(result.rate == doctest::Approx(30.0 * 60.0 / 90.0).epsilon(1e-15));

  const DiscreteMeasure q_fixed = DiscreteMeasure::with_uniform_weights(
      std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5}, 1);
  const CltSimResult one = simulate_clt(cfg, q_fixed, 1.0 / 12);
  CHECK(one.rate == doctest::Approx(30.0).epsilon(1e-15));
  CHECK(one.m == 0);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = shift_benchmark(30, 1, 5);
  CHECK_THROWS_AS(simulate_clt(cfg, 1.0), std::invalid_argument);  // reps >= 2
  cfg.reps = 4;
  cfg.n = 1;
  CHECK_THROWS_AS(simulate_clt(cfg, 1.0), std::invalid_argument);  // n >= 2
  cfg.n = 30;
  CHECK_THROWS_AS(simulate_clt(cfg, -0.5), std::invalid_argument);  // sigma^2 >= 0
}

TEST_CASE("remainder trajectory ignores constant shifts of the potentials") {
  const ExperimentConfig cfg = shift_benchmark(40, 6, 21);
  const Distribution1D P = Distribution1D::uniform(0.0, 1.0);
  const Distribution1D Q = Distribution1D::uniform(0.5, 1.5);
  const std::vector<int> schedule{40, 80};

  const Potential1D phi_a(cfg.cost, P, Q, 0.5);
  const Potential1D psi_a(cfg.cost, Q, P, 1.0, true);
  const DecayTable a = remainder_variance(cfg, phi_a, psi_a, schedule);

  // Moving the anchors shifts both potentials by constants.
  const Potential1D phi_b(cfg.cost, P, Q, 0.125);
  const Potential1D psi_b(cfg.cost, Q, P, 1.375, true);
  const DecayTable b = remainder_variance(cfg, phi_b, psi_b, schedule);

  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].n_var_rn ==
          doctest::Approx(b.rows[k].n_var_rn).epsilon(1e-9));
  }
}

TEST_CASE("extension self-consistency: grid measures on both sides") {
  // Deterministic discretizations of the shift benchmark on both sides;
  // the c-transform extension must match the oracle potential up to the
  // discretization error only.
  const CostSpec cost = CostSpec::power(2.0, 1);
  const int grid_n = 400;
  std::vector<double> xs(grid_n), ys(grid_n);
  for (int k = 0; k < grid_n; ++k) {
    xs[k] = (k + 0.5) / grid_n;
    ys[k] = 0.5 + (k + 0.5) / grid_n;
  }
  const DiscreteMeasure X = DiscreteMeasure::with_uniform_weights(std::vector<double>(xs), 1);
  const DiscreteMeasure Y = DiscreteMeasure::with_uniform_weights(std::vector<double>(ys), 1);
  const auto duals = solve_discrete_ot(cost, X, Y).second;
  const PotentialVector v_c = canonical_potentials(cost, duals, X, Y).second;

  const Distribution1D Pd = Distribution1D::uniform(0.0, 1.0);
  const Distribution1D Qd = Distribution1D::uniform(0.5, 1.5);
  const Potential1D phi(cost, Pd, Qd, 0.05);

  std::vector<double> grid(101);
  for (int g = 0; g < 101; ++g) grid[g] = 0.05 + 0.9 * g / 100.0;
  auto extension = [&](double x) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < Y.size(); ++j) {
      best = std::min(best, cost.h1(x - Y.point(j)[0]) - v_c.values[j]);
    }
    return best;
  };
  const double shift = extension(grid[0]) - phi(grid[0]);
  double sup = 0.0;
  for (double g : grid) {
    sup = std::max(sup, std::abs(extension(g) - phi(g) - shift));
  }
  CHECK(sup <= 0.01);
}

TEST_CASE("map error vanishes on identical grid measures") {
  const CostSpec cost = CostSpec::power(2.0, 1);
  const int grid_n = 50;
  std::vector<double> xs(grid_n);
  for (int k = 0; k < grid_n; ++k) xs[k] = (k + 0.5) / grid_n;
  const DiscreteMeasure X = DiscreteMeasure::with_uniform_weights(std::vector<double>(xs), 1);
  const auto duals = solve_discrete_ot(cost, X, X).second;
  const PotentialVector v_c = canonical_potentials(cost, duals, X, X).second;
  for (double g : xs) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int j = 0; j < X.size(); ++j) {
      const double value = cost.h1(g - X.point(j)[0]) - v_c.values[j];
      if (value < best) {
        best = value;
        arg = j;
      }
    }
    CHECK(X.point(arg)[0] == doctest::Approx(g).epsilon(1e-14));
  }
}

TEST_CASE("stability diagnostic runs and reports decreasing errors") {
  ExperimentConfig cfg = shift_benchmark(50, 3, 8);
  cfg.grid.resize(41);
  for (int g = 0; g < 41; ++g) cfg.grid[g] = 0.05 + 0.9 * g / 40.0;
  const Distribution1D P = Distribution1D::uniform(0.0, 1.0);
  const Distribution1D Q = Distribution1D::uniform(0.5, 1.5);
  const Potential1D phi(cfg.cost, P, Q, cfg.grid.front());
  const std::vector<int> schedule{50, 400};
  const StabilityCurve curve = stability_diagnostic(cfg, phi, schedule);
  REQUIRE(curve.rows.size() == 2);
  CHECK(curve.rows[1].sup_error < curve.rows[0].sup_error);
  CHECK(curve.rows[1].map_sup_error < 0.5);
  // The centered error never exceeds the anchored one.
  for (const auto& row : curve.rows) {
    CHECK(row.centered_sup_error <= row.sup_error + 1e-12);
  }

  // Anchor moves do not change the centered error.
  const StabilityCurve other = stability_diagnostic(cfg, phi, schedule, 20);
  for (std::size_t k = 0; k < curve.rows.size(); ++k) {
    CHECK(other.rows[k].centered_sup_error ==
          doctest::Approx(curve.rows[k].centered_sup_error).epsilon(1e-12));
  }
}

TEST_CASE("stability rejects grids outside the sampled support") {
  ExperimentConfig cfg = shift_benchmark(30, 2, 8);
  cfg.grid = {-0.5, 0.5};
  const Distribution1D P = Distribution1D::uniform(0.0, 1.0);
  const Distribution1D Q = Distribution1D::uniform(0.5, 1.5);
  const Potential1D phi(cfg.cost, P, Q, 0.5);
  const std::vector<int> schedule{30};
  CHECK_THROWS_WITH_AS(stability_diagnostic(cfg, phi, schedule),
                       doctest::Contains("support"), std::invalid_argument);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_thread_count(4) == 4);
  CHECK(resolve_thread_count(0) >= 1);
}
