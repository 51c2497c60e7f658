#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/measure.hpp"
#include "otclt/oracle1d.hpp"

namespace otclt {

/// Configuration of a replicated experiment. Replication r draws its
/// samples on the substream (seed, law label, r); nothing is shared
/// between replications, so they may run concurrently and the reduction
/// by rep index is deterministic regardless of scheduling.
struct ExperimentConfig {
  CostSpec cost = CostSpec::power(2.0, 1);
  SampleSource p_law = SampleSource::uniform({0.0}, {1.0}, "P");
  SampleSource q_law = SampleSource::uniform({0.0}, {1.0}, "Q");
  int n = 100;
  int m = 100;  // 0 selects one-sample mode against a fixed Q
  int reps = 2;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::vector<double> grid;  // evaluation grid for stability runs
  int threads = 0;           // 0: use OTCLT_THREADS or hardware default
};

/// Distribution of the scaled empirical cost across replications.
struct CltSimResult {
  std::vector<double> statistics;    // per-rep T_c
  std::vector<double> standardized;  // (T_r - mean) / sqrt(theory / rate)
  double mean_statistic = 0.0;
  double empirical_variance_scaled = 0.0;  // variance of sqrt(rate) * (T - mean)
  double ks_distance = 0.0;                // standardized sample vs N(0,1)
  double theory_sigma_sq = 0.0;
  double rate = 0.0;  // n (one-sample) or nm/(n+m)
  int n = 0, m = 0, reps = 0;
  std::uint64_t seed = 0;
};

/// Two-sample replication study: per rep draws P_n and Q_m, solves the
/// exact OT problem, and standardizes against the supplied limiting
/// variance. Centering uses the across-rep mean as the proxy for the
/// expectation.
CltSimResult simulate_clt(const ExperimentConfig& cfg, double theory_sigma_sq);

/// One-sample variant against a fixed discrete target.
CltSimResult simulate_clt(const ExperimentConfig& cfg, const DiscreteMeasure& q_fixed,
                          double theory_sigma_sq);

/// n * Var(R_n) along a doubling schedule, with
/// R_n = T_c(P_n, Q_m) - mean_{P_n}(phi) - mean_{Q_m}(psi) and (phi, psi)
/// the oracle potential pair. The Y-side size scales proportionally.
struct DecayRow {
  int n = 0, m = 0;
  double var_rn = 0.0;
  double n_var_rn = 0.0;
};
struct DecayTable {
  std::vector<DecayRow> rows;
  int reps = 0;
  std::uint64_t seed = 0;
};
DecayTable remainder_variance(const ExperimentConfig& cfg, const Potential1D& phi,
                              const Potential1D& psi, std::span<const int> schedule);

/// Empirical-potential stability along a doubling schedule. Per rep the
/// canonical Q-side dual is extended off-sample by the c-transform
/// x -> min_j [c(x, y_j) - v(y_j)], both the extension and the oracle
/// potential are anchored at the same grid point, and errors over the
/// grid are averaged across reps. centered_sup_error is the
/// shift-optimal (Chebyshev-centered) sup error and is exactly
/// independent of the anchor choice.
struct StabilityRow {
  int n = 0, m = 0;
  double sup_error = 0.0;
  double l2_error = 0.0;  // uniform grid weights
  double centered_sup_error = 0.0;
  double map_sup_error = 0.0;
};
struct StabilityCurve {
  std::vector<StabilityRow> rows;
  int reps = 0;
  std::uint64_t seed = 0;
  int anchor_index = 0;
};
StabilityCurve stability_diagnostic(const ExperimentConfig& cfg, const Potential1D& phi,
                                    std::span<const int> schedule, int anchor_index = 0);

/// Map stability only: discrete superdifferential argmins against the
/// oracle monotone map, sup over the grid, averaged across reps.
struct MapStabilityRow {
  int n = 0, m = 0;
  double sup_error = 0.0;
};
struct MapStabilityCurve {
  std::vector<MapStabilityRow> rows;
  int reps = 0;
  std::uint64_t seed = 0;
};
MapStabilityCurve map_stability_diagnostic(const ExperimentConfig& cfg,
                                           std::span<const int> schedule);

/// Thread budget: cfg value if positive, else the OTCLT_THREADS
/// environment variable, else the hardware concurrency.
int resolve_thread_count(int configured);

}  // namespace otclt
