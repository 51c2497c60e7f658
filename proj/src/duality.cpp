#include "otclt/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "otclt/rng.hpp"

namespace otclt {

namespace {

void check_side_size(const PotentialVector& f, const DiscreteMeasure& mu, const char* what) {
  if (f.values.size() != static_cast<std::size_t>(mu.size())) {
    throw std::invalid_argument(std::string(what) + ": potential size does not match measure");
  }
}

}  // namespace

PotentialVector c_transform(const CostSpec& spec, const PotentialVector& f,
                            const DiscreteMeasure& source, const DiscreteMeasure& target) {
  check_side_size(f, source, "c_transform");
  if (source.size() < 1) throw std::invalid_argument("c_transform: empty source set");
  PotentialVector g;
  g.side = f.side == PotentialVector::Side::P ? PotentialVector::Side::Q : PotentialVector::Side::P;
  g.values.resize(target.size());
  for (int t = 0; t < target.size(); ++t) {
    const auto y = target.point(t);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < source.size(); ++s) {
      const double candidate = spec.evaluate(source.point(s), y) - f.values[s];
      best = std::min(best, candidate);
    }
    g.values[t] = best;
  }
  return g;
}

std::pair<PotentialVector, PotentialVector> canonicalize(const CostSpec& spec,
                                                         const PotentialVector& u,
                                                         const PotentialVector& v,
                                                         const DiscreteMeasure& P,
                                                         const DiscreteMeasure& Q) {
  check_side_size(u, P, "canonicalize (u)");
  check_side_size(v, Q, "canonicalize (v)");
  // Feasibility gate, scaled to the cost magnitude.
  double max_cost = 0.0;
  for (int i = 0; i < P.size(); ++i) {
    for (int j = 0; j < Q.size(); ++j) {
      max_cost = std::max(max_cost, spec.evaluate(P.point(i), Q.point(j)));
    }
  }
  const double slack_tol = 1e-9 * (1.0 + max_cost);
  for (int i = 0; i < P.size(); ++i) {
    for (int j = 0; j < Q.size(); ++j) {
      const double slack = u.values[i] + v.values[j] - spec.evaluate(P.point(i), Q.point(j));
      if (slack > slack_tol) {
        throw std::invalid_argument("canonicalize: input duals are infeasible at pair (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  PotentialVector v_c = c_transform(spec, u, P, Q);
  v_c.side = PotentialVector::Side::Q;
  PotentialVector u_cc = c_transform(spec, v_c, Q, P);
  u_cc.side = PotentialVector::Side::P;
  return {std::move(u_cc), std::move(v_c)};
}

PotentialVector anchor(PotentialVector f, int p0_index) {
  if (p0_index < 0 || p0_index >= static_cast<int>(f.values.size())) {
    throw std::invalid_argument("anchor: index out of range");
  }
  const double shift = f.values[p0_index];
  for (double& x : f.values) x -= shift;
  f.values[p0_index] = 0.0;  // exact, regardless of roundoff in the subtraction
  f.anchored_at = p0_index;
  return f;
}

std::pair<PotentialVector, PotentialVector> canonical_potentials(const CostSpec& spec,
                                                                 const DualPair& duals,
                                                                 const DiscreteMeasure& P,
                                                                 const DiscreteMeasure& Q) {
  PotentialVector u{PotentialVector::Side::P, duals.u, std::nullopt};
  PotentialVector v{PotentialVector::Side::Q, duals.v, std::nullopt};
  auto [u_cc, v_c] = canonicalize(spec, u, v, P, Q);

  // Zero-cost instances (the measures coincide) admit the zero pair as an
  // optimal c-concave dual; basis duals from the simplex carry arbitrary
  // staircase slack there, so pick the zero pair as the canonical one.
  double max_cost = 0.0;
  for (int i = 0; i < P.size(); ++i) {
    for (int j = 0; j < Q.size(); ++j) {
      max_cost = std::max(max_cost, spec.evaluate(P.point(i), Q.point(j)));
    }
  }
  double dual_objective = 0.0;
  for (int i = 0; i < P.size(); ++i) dual_objective += P.weight(i) * u_cc.values[i];
  for (int j = 0; j < Q.size(); ++j) dual_objective += Q.weight(j) * v_c.values[j];
  if (std::abs(dual_objective) <= 1e-12 * (1.0 + max_cost)) {
    for (double& value : u_cc.values) value = 0.0;
    for (double& value : v_c.values) value = 0.0;
  }

  // One shared free constant: anchoring the P side at p0 shifts the Q side
  // the opposite way so the pair keeps u(x) + v(y) <= c(x,y) with equality
  // on the optimal support.
  const int p0 = P.lexicographic_min_index();
  const double shift = u_cc.values[p0];
  for (double& value : v_c.values) value += shift;
  return {anchor(std::move(u_cc), p0), std::move(v_c)};
}

double default_superdifferential_tolerance(const CostSpec& spec, const DiscreteMeasure& P,
                                           const DiscreteMeasure& Q) {
  double max_cost = 0.0;
  for (int i = 0; i < P.size(); ++i) {
    for (int j = 0; j < Q.size(); ++j) {
      max_cost = std::max(max_cost, spec.evaluate(P.point(i), Q.point(j)));
    }
  }
  return 1e-8 * (1.0 + max_cost);
}

SuperdifferentialGraph superdifferential(const CostSpec& spec, const PotentialVector& f,
                                         const PotentialVector& f_c, const DiscreteMeasure& P,
                                         const DiscreteMeasure& Q, double tau) {
  check_side_size(f, P, "superdifferential (f)");
  check_side_size(f_c, Q, "superdifferential (f_c)");
  SuperdifferentialGraph graph;
  graph.tolerance = tau;
  for (int i = 0; i < P.size(); ++i) {
    for (int j = 0; j < Q.size(); ++j) {
      const double cost = spec.evaluate(P.point(i), Q.point(j));
      if (f.values[i] + f_c.values[j] >= cost - tau) {
        graph.pairs.emplace_back(i, j);
      }
    }
  }
  return graph;
}

namespace {

struct PairSet {
  std::span<const double> xs, ys;
  int dim;
  int count;
  std::span<const double> point_x(int k) const { return xs.subspan(static_cast<std::size_t>(k) * dim, dim); }
  std::span<const double> point_y(int k) const { return ys.subspan(static_cast<std::size_t>(k) * dim, dim); }
};

}  // namespace

MonotonicityReport check_cyclical_monotonicity(const CostSpec& spec, std::span<const double> xs,
                                               std::span<const double> ys, int dim, int k_max,
                                               int trials, std::uint64_t seed) {
  if (xs.size() != ys.size() || xs.empty() || xs.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("check_cyclical_monotonicity: malformed pair buffers");
  }
  if (k_max < 2) throw std::invalid_argument("check_cyclical_monotonicity: k_max must be >= 2");
  const PairSet pairs{xs, ys, dim, static_cast<int>(xs.size() / static_cast<std::size_t>(dim))};
  const int s = pairs.count;

  MonotonicityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.worst_k = 1;

  // Cache pairwise costs c(x_a, y_b) once; every margin below is a sum of
  // cached entries minus the diagonal.
  std::vector<double> cost(static_cast<std::size_t>(s) * s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      cost[static_cast<std::size_t>(a) * s + b] = spec.evaluate(pairs.point_x(a), pairs.point_y(b));
    }
  }
  auto at = [&](int a, int b) { return cost[static_cast<std::size_t>(a) * s + b]; };

  // Size 2: the swap is the only nontrivial permutation.
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) {
      const double margin = at(a, b) + at(b, a) - at(a, a) - at(b, b);
      if (margin < report.worst_margin) {
        report.worst_margin = margin;
        report.worst_k = 2;
      }
      ++report.checked_subsets;
    }
  }
  // Size 3: transpositions reduce to the pair case, so only the two
  // 3-cycles are new.
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) {
      const double dab = at(a, a) + at(b, b);
      for (int c = b + 1; c < s; ++c) {
        const double diag = dab + at(c, c);
        const double cyc1 = at(b, a) + at(c, b) + at(a, c) - diag;
        const double cyc2 = at(c, a) + at(a, b) + at(b, c) - diag;
        const double margin = std::min(cyc1, cyc2);
        if (margin < report.worst_margin) {
          report.worst_margin = margin;
          report.worst_k = 3;
        }
        ++report.checked_subsets;
      }
    }
  }

  // Larger k: seeded random subsets, all cyclic shifts.
  RngStream rng(seed, "cyclical-monotonicity");
  std::vector<int> subset;
  for (int k = 4; k <= std::min(k_max, s); ++k) {
    for (int t = 0; t < trials; ++t) {
      subset.resize(s);
      std::iota(subset.begin(), subset.end(), 0);
      for (int pos = 0; pos < k; ++pos) {  // partial Fisher-Yates
        const int swap_with = pos + static_cast<int>(rng.below(static_cast<std::uint64_t>(s - pos)));
        std::swap(subset[pos], subset[swap_with]);
      }
      subset.resize(k);
      double diag = 0.0;
      for (int idx : subset) diag += at(idx, idx);
      for (int shift = 1; shift < k; ++shift) {
        double permuted = 0.0;
        for (int pos = 0; pos < k; ++pos) {
          permuted += at(subset[(pos + shift) % k], subset[pos]);
        }
        const double margin = permuted - diag;
        if (margin < report.worst_margin) {
          report.worst_margin = margin;
          report.worst_k = k;
        }
      }
      ++report.checked_subsets;
    }
  }

  if (s == 1) {
    report.worst_margin = 0.0;  // a single pair is trivially monotone
    report.worst_k = 1;
  }
  report.pass = report.worst_margin >= -1e-9;
  return report;
}

MonotonicityReport check_plan_monotonicity(const CostSpec& spec, const TransportPlan& plan,
                                           const DiscreteMeasure& P, const DiscreteMeasure& Q,
                                           int k_max, int trials, std::uint64_t seed) {
  const int d = P.dim();
  std::vector<double> xs, ys;
  xs.reserve(plan.entries.size() * d);
  ys.reserve(plan.entries.size() * d);
  for (const auto& e : plan.entries) {
    const auto x = P.point(e.i);
    const auto y = Q.point(e.j);
    xs.insert(xs.end(), x.begin(), x.end());
    ys.insert(ys.end(), y.begin(), y.end());
  }
  return check_cyclical_monotonicity(spec, xs, ys, d, k_max, trials, seed);
}

}  // namespace otclt
