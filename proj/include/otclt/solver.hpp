#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/measure.hpp"

namespace otclt {

/// Sparse optimal coupling between two discrete measures. Entries carry
/// strictly positive mass; there are at most n+m-1 of them (a basic
/// feasible solution of the transportation LP), sorted by (i, j).
struct TransportPlan {
  struct Entry {
    int i;        // P-side index
    int j;        // Q-side index
    double mass;  // > 0
  };
  std::vector<Entry> entries;
  double objective = 0.0;  // sum of mass * c(x_i, y_j)
  int n = 0;
  int m = 0;
};

/// Optimal dual variables: u on P-points, v on Q-points. Feasible
/// (u_i + v_j <= C_ij) and complementary-slack on the plan support.
struct DualPair {
  std::vector<double> u;
  std::vector<double> v;
  bool anchored = false;
  int anchor_index = -1;
};

struct SolverOptions {
  /// Refuse instances with more than this many (i, j) pairs.
  std::int64_t max_pairs = 50'000'000;
};

/// Dense cost matrix C_ij = h(x_i - y_j), row-major n x m.
/// Throws when an entry is non-finite, naming the offending pair.
std::vector<double> build_cost_matrix(const CostSpec& spec, const DiscreteMeasure& P,
                                      const DiscreteMeasure& Q);

/// Exact solution of the discrete Kantorovich problem by network simplex
/// on the bipartite transportation graph. Deterministic: north-west
/// corner start, block pricing with a fixed scan order, Bland fallback
/// after degenerate pivot streaks. Costs are rescaled internally so the
/// largest entry is 1; duals are rescaled back on output.
std::pair<TransportPlan, DualPair> solve_discrete_ot(const CostSpec& spec,
                                                     const DiscreteMeasure& P,
                                                     const DiscreteMeasure& Q,
                                                     const SolverOptions& options = {});

/// Primal/dual certificate thresholds are applied after rescaling costs
/// to max entry 1; pass means every violation is at most 1e-9.
struct OptimalityCertificate {
  double max_marginal_violation = 0.0;
  double max_dual_infeasibility = 0.0;
  double max_slackness_violation = 0.0;
  double duality_gap = 0.0;
  bool pass = false;
};

OptimalityCertificate verify_optimality(const TransportPlan& plan, const DualPair& duals,
                                        std::span<const double> cost_matrix,
                                        std::span<const double> p_weights,
                                        std::span<const double> q_weights);

}  // namespace otclt
