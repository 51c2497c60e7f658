#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/measure.hpp"
#include "otclt/solver.hpp"

namespace otclt {

/// Potential values on one side's points, optionally anchored so the
/// value at anchored_at is exactly 0.
struct PotentialVector {
  enum class Side { P, Q };
  Side side = Side::P;
  std::vector<double> values;
  std::optional<int> anchored_at;
};

/// Pairs (i, j) on which f(x_i) + f^c(y_j) matches c(x_i, y_j) within a
/// tolerance; the discrete restriction of the c-superdifferential.
struct SuperdifferentialGraph {
  std::vector<std::pair<int, int>> pairs;
  double tolerance = 0.0;
};

/// c-transform over a finite source set: g(y) = min_x [c(x,y) - f(x)].
/// f lives on `source`; the result lives on `target` with the opposite
/// side tag.
PotentialVector c_transform(const CostSpec& spec, const PotentialVector& f,
                            const DiscreteMeasure& source, const DiscreteMeasure& target);

/// Maps a dual-feasible pair through a double c-transform:
/// v_c = (u)^c, u_cc = (v_c)^c. Output is exactly feasible, never has a
/// smaller dual objective, and u_cc is the restriction of a c-concave
/// function. On optimal inputs the objective is unchanged.
/// Throws std::invalid_argument when the input pair is infeasible.
std::pair<PotentialVector, PotentialVector> canonicalize(const CostSpec& spec,
                                                         const PotentialVector& u,
                                                         const PotentialVector& v,
                                                         const DiscreteMeasure& P,
                                                         const DiscreteMeasure& Q);

/// Subtracts f(p0) from every value and records the anchor. Idempotent.
PotentialVector anchor(PotentialVector f, int p0_index);

/// The canonical anchored P-side/Q-side pair used everywhere downstream:
/// canonicalized LP duals anchored at the lexicographically smallest
/// P-point.
std::pair<PotentialVector, PotentialVector> canonical_potentials(const CostSpec& spec,
                                                                 const DualPair& duals,
                                                                 const DiscreteMeasure& P,
                                                                 const DiscreteMeasure& Q);

/// Membership with tolerance tau; tau < 0 is honored literally (and
/// yields an empty graph). Pass tau = default_superdifferential_tolerance
/// for the scaled default 1e-8 * (1 + max C).
SuperdifferentialGraph superdifferential(const CostSpec& spec, const PotentialVector& f,
                                         const PotentialVector& f_c, const DiscreteMeasure& P,
                                         const DiscreteMeasure& Q, double tau);

double default_superdifferential_tolerance(const CostSpec& spec, const DiscreteMeasure& P,
                                           const DiscreteMeasure& Q);

/// Result of the c-cyclical-monotonicity diagnostic. worst_margin is the
/// smallest permuted-minus-identity cost difference seen; nonnegative (up
/// to 1e-9) certifies monotonicity of the checked subsets.
struct MonotonicityReport {
  double worst_margin = 0.0;
  int worst_k = 0;
  bool pass = false;
  std::int64_t checked_subsets = 0;
};

/// Exhaustive over all subsets of size <= 3 with all permutations, then
/// `trials` seeded random subsets for each 4 <= k <= k_max with all
/// cyclic shifts. xs/ys hold the matched pairs row-major, one point each.
MonotonicityReport check_cyclical_monotonicity(const CostSpec& spec,
                                               std::span<const double> xs,
                                               std::span<const double> ys, int dim,
                                               int k_max, int trials, std::uint64_t seed);

/// Convenience: monotonicity check on a plan's support pairs.
MonotonicityReport check_plan_monotonicity(const CostSpec& spec, const TransportPlan& plan,
                                           const DiscreteMeasure& P, const DiscreteMeasure& Q,
                                           int k_max, int trials, std::uint64_t seed);

}  // namespace otclt
