#include "otclt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "otclt/error.hpp"

namespace otclt {

std::vector<double> build_cost_matrix(const CostSpec& spec, const DiscreteMeasure& P,
                                      const DiscreteMeasure& Q) {
  if (P.dim() != Q.dim() || P.dim() != spec.dim()) {
    throw std::invalid_argument("cost/measure dimension mismatch");
  }
  const int n = P.size(), m = Q.size();
  std::vector<double> C(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    const auto x = P.point(i);
    double* row = C.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const double v = spec.evaluate(x, Q.point(j));
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("cost matrix entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is not a finite nonnegative value");
      }
      row[j] = v;
    }
  }
  return C;
}

namespace {

/// Spanning-tree simplex for the dense transportation problem.
/// Nodes 0..n-1 are P (supplies), n..n+m-1 are Q (demands); every basic
/// arc joins the two sides. Flows live on the child end of each tree arc.
class NetworkSimplex {
 public:
  NetworkSimplex(int n, int m, const double* cost)
      : n_(n), m_(m), N_(n + m), C_(cost) {
    parent_.assign(N_, -1);
    depth_.assign(N_, 0);
    dual_.assign(N_, 0.0);
    flow_.assign(N_, 0.0);
    adjacency_.assign(N_, {});
    block_ = std::max<std::int64_t>(64, static_cast<std::int64_t>(
                                            2.0 * std::sqrt(static_cast<double>(n) * m)));
  }

  void run(std::span<const double> supplies, std::span<const double> demands) {
    build_initial_basis(supplies, demands);
    const std::int64_t max_pivots = std::max<std::int64_t>(200000, 120ll * N_);
    std::int64_t pivots = 0;
    int degenerate_streak = 0;
    bool bland = false;
    while (true) {
      const std::int64_t entering = bland ? price_bland() : price_block();
      if (entering < 0) break;
      const double theta = pivot(entering);
      if (++pivots > max_pivots) {
        throw NumericalError("network simplex exceeded the pivot limit (" +
                             std::to_string(max_pivots) + ")");
      }
      if (theta == 0.0) {
        if (++degenerate_streak >= 64) bland = true;  // anti-cycling fallback
      } else {
        degenerate_streak = 0;
        bland = false;
      }
    }
    refresh_duals_from_root();
  }

  /// Recomputes basic masses from unperturbed weights on the final tree.
  /// Children push their residual balance onto the arc to the parent, so
  /// the marginal equations hold exactly up to summation roundoff.
  std::vector<TransportPlan::Entry> extract_entries(std::span<const double> p,
                                                    std::span<const double> q,
                                                    double zero_clamp) const {
    std::vector<double> residual(N_);
    for (int i = 0; i < n_; ++i) residual[i] = p[i];
    for (int j = 0; j < m_; ++j) residual[n_ + j] = q[j];
    std::vector<int> order = preorder();
    std::vector<TransportPlan::Entry> entries;
    entries.reserve(N_ - 1);
    for (std::size_t k = order.size(); k-- > 1;) {
      const int v = order[k];
      const int pnode = parent_[v];
      const double mass = residual[v];
      residual[pnode] -= mass;
      if (mass > 0.0) {
        entries.push_back(cell_entry(v, pnode, mass));
      } else if (mass < -zero_clamp) {
        throw NumericalError("negative basic mass " + std::to_string(mass) +
                             " while removing the degeneracy perturbation");
      }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return entries;
  }

  std::span<const double> duals() const { return dual_; }

 private:
  TransportPlan::Entry cell_entry(int v, int pnode, double mass) const {
    TransportPlan::Entry e;
    e.i = std::min(v, pnode);       // ids below n are P nodes
    e.j = std::max(v, pnode) - n_;  // ids from n up are Q nodes
    e.mass = mass;
    return e;
  }

  std::int64_t cell_of(int v, int pnode) const {
    const int i = std::min(v, pnode);
    const int j = std::max(v, pnode) - n_;
    return static_cast<std::int64_t>(i) * m_ + j;
  }

  void build_initial_basis(std::span<const double> supplies, std::span<const double> demands) {
    // North-west corner rule on the perturbed weights: a staircase of
    // exactly n+m-1 basic cells forming a spanning path.
    int i = 0, j = 0;
    double a = supplies[0], b = demands[0];
    struct Cell {
      int i, j;
      double mass;
    };
    std::vector<Cell> cells;
    cells.reserve(N_ - 1);
    for (int step = 0; step < N_ - 1; ++step) {
      const double t = std::min(a, b);
      cells.push_back({i, j, t});
      if (step == N_ - 2) break;
      const bool can_i = i < n_ - 1;
      const bool can_j = j < m_ - 1;
      bool advance_i;
      if (!can_i) {
        advance_i = false;
      } else if (!can_j) {
        advance_i = true;
      } else {
        advance_i = a <= b;
      }
      if (advance_i) {
        b = std::max(b - a, 0.0);
        a = supplies[++i];
      } else {
        a = std::max(a - b, 0.0);
        b = demands[++j];
      }
    }
    for (auto& adj : adjacency_) adj.clear();
    std::vector<double> cell_mass(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const int pv = cells[k].i;
      const int qv = n_ + cells[k].j;
      adjacency_[pv].push_back(qv);
      adjacency_[qv].push_back(pv);
      cell_mass[k] = cells[k].mass;
    }
    // Root the tree at node 0 and assign parents, depths, duals, flows.
    parent_.assign(N_, -1);
    std::vector<int> stack{0};
    std::vector<char> seen(N_, 0);
    seen[0] = 1;
    dual_[0] = 0.0;
    depth_[0] = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adjacency_[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = v;
        depth_[w] = depth_[v] + 1;
        dual_[w] = C_[cell_of(v, w)] - dual_[v];
        stack.push_back(w);
      }
    }
    // Flow lookup for the staircase cells by (child, parent) pair.
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const int pv = cells[k].i;
      const int qv = n_ + cells[k].j;
      const int child = parent_[pv] == qv ? pv : qv;
      flow_[child] = cell_mass[k];
    }
  }

  std::int64_t price_block() {
    const std::int64_t total = static_cast<std::int64_t>(n_) * m_;
    std::int64_t scanned = 0;
    std::int64_t a = scan_start_;
    int i = static_cast<int>(a / m_);
    int j = static_cast<int>(a % m_);
    double row_dual = dual_[i];
    const double* q_dual = dual_.data() + n_;
    std::int64_t best = -1;
    double best_red = -kPriceTol;
    while (scanned < total) {
      const std::int64_t chunk = std::min(block_, total - scanned);
      for (std::int64_t t = 0; t < chunk; ++t) {
        const double red = C_[a] - row_dual - q_dual[j];
        if (red < best_red) {
          best_red = red;
          best = a;
        }
        ++a;
        if (++j == m_) {
          j = 0;
          if (++i == n_) {
            i = 0;
            a = 0;
          }
          row_dual = dual_[i];
        }
      }
      scanned += chunk;
      if (best >= 0) break;
    }
    scan_start_ = a;
    return best;
  }

  std::int64_t price_bland() {
    const std::int64_t total = static_cast<std::int64_t>(n_) * m_;
    for (std::int64_t a = 0; a < total; ++a) {
      const int i = static_cast<int>(a / m_);
      const int j = static_cast<int>(a % m_);
      if (C_[a] - dual_[i] - dual_[n_ + j] < -kPriceTol) return a;
    }
    return -1;
  }

  /// Executes one pivot with the given entering cell; returns theta.
  double pivot(std::int64_t entering) {
    const int ie = static_cast<int>(entering / m_);
    const int je = n_ + static_cast<int>(entering % m_);

    // Node path ie -> ... -> lca -> ... -> je.
    path_up_i_.clear();
    path_up_j_.clear();
    int x = ie, y = je;
    while (depth_[x] > depth_[y]) {
      path_up_i_.push_back(x);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      path_up_j_.push_back(y);
      y = parent_[y];
    }
    while (x != y) {
      path_up_i_.push_back(x);
      path_up_j_.push_back(y);
      x = parent_[x];
      y = parent_[y];
    }
    const int lca = x;
    cycle_nodes_.clear();
    for (int v : path_up_i_) cycle_nodes_.push_back(v);
    cycle_nodes_.push_back(lca);
    for (std::size_t k = path_up_j_.size(); k-- > 0;) cycle_nodes_.push_back(path_up_j_[k]);

    // Arcs along the path alternate -theta, +theta starting next to ie.
    // Each arc is owned by the deeper endpoint.
    double theta = std::numeric_limits<double>::infinity();
    int leave_child = -1;
    std::size_t leave_pos = 0;
    for (std::size_t k = 0; k + 1 < cycle_nodes_.size(); ++k) {
      if (k % 2 == 0) {  // arcs losing flow
        const int a_node = cycle_nodes_[k];
        const int b_node = cycle_nodes_[k + 1];
        const int child = parent_[a_node] == b_node ? a_node : b_node;
        if (flow_[child] < theta) {
          theta = flow_[child];
          leave_child = child;
          leave_pos = k;
        }
      }
    }
    if (leave_child < 0) throw NumericalError("pivot found no leaving arc");

    // Apply the flow change along the cycle.
    for (std::size_t k = 0; k + 1 < cycle_nodes_.size(); ++k) {
      const int a_node = cycle_nodes_[k];
      const int b_node = cycle_nodes_[k + 1];
      const int child = parent_[a_node] == b_node ? a_node : b_node;
      flow_[child] += (k % 2 == 0) ? -theta : theta;
    }

    const int leave_parent = parent_[leave_child];

    // The detached subtree contains exactly one endpoint of the entering
    // arc: ie when the leaving arc sits on the ie-side path, else je.
    const bool detached_has_ie = leave_pos < path_up_i_.size();
    const int attach_in = detached_has_ie ? ie : je;   // endpoint inside the subtree
    const int attach_out = detached_has_ie ? je : ie;  // endpoint in the main tree

    // Reverse the parent chain from attach_in up to the leaving arc,
    // handing each arc's flow to its new child.
    int v = attach_in;
    int new_parent = attach_out;
    double carried = theta;
    while (true) {
      const int old_parent = parent_[v];
      const double old_flow = flow_[v];
      parent_[v] = new_parent;
      flow_[v] = carried;
      if (v == leave_child) break;
      new_parent = v;
      carried = old_flow;
      v = old_parent;
    }

    auto& adj_lc = adjacency_[leave_child];
    adj_lc.erase(std::find(adj_lc.begin(), adj_lc.end(), leave_parent));
    auto& adj_lp = adjacency_[leave_parent];
    adj_lp.erase(std::find(adj_lp.begin(), adj_lp.end(), leave_child));
    adjacency_[ie].push_back(je);
    adjacency_[je].push_back(ie);

    // Refresh depth and duals inside the re-hung subtree.
    dfs_stack_.clear();
    dfs_stack_.push_back(attach_in);
    depth_[attach_in] = depth_[attach_out] + 1;
    dual_[attach_in] = C_[cell_of(attach_in, attach_out)] - dual_[attach_out];
    while (!dfs_stack_.empty()) {
      const int u = dfs_stack_.back();
      dfs_stack_.pop_back();
      for (int w : adjacency_[u]) {
        if (w == parent_[u]) continue;
        parent_[w] = u;
        depth_[w] = depth_[u] + 1;
        dual_[w] = C_[cell_of(u, w)] - dual_[u];
        dfs_stack_.push_back(w);
      }
    }
    return theta;
  }

  void refresh_duals_from_root() {
    std::vector<int> order = preorder();
    dual_[0] = 0.0;
    for (std::size_t k = 1; k < order.size(); ++k) {
      const int v = order[k];
      dual_[v] = C_[cell_of(v, parent_[v])] - dual_[parent_[v]];
    }
  }

  std::vector<int> preorder() const {
    std::vector<int> order;
    order.reserve(N_);
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (int w : adjacency_[v]) {
        if (w != parent_[v]) stack.push_back(w);
      }
    }
    if (static_cast<int>(order.size()) != N_) {
      throw NumericalError("basis lost connectivity");
    }
    return order;
  }

  static constexpr double kPriceTol = 1e-11;

  int n_, m_, N_;
  const double* C_;
  std::int64_t block_ = 64;
  std::int64_t scan_start_ = 0;
  std::vector<int> parent_;
  std::vector<int> depth_;
  std::vector<double> dual_;
  std::vector<double> flow_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> path_up_i_, path_up_j_, cycle_nodes_, dfs_stack_;
};

}  // namespace

std::pair<TransportPlan, DualPair> solve_discrete_ot(const CostSpec& spec,
                                                     const DiscreteMeasure& P,
                                                     const DiscreteMeasure& Q,
                                                     const SolverOptions& options) {
  const int n = P.size(), m = Q.size();
  if (static_cast<std::int64_t>(n) * m > options.max_pairs) {
    throw std::invalid_argument("instance has " + std::to_string(static_cast<std::int64_t>(n) * m) +
                                " pairs, above the memory budget of " +
                                std::to_string(options.max_pairs));
  }
  std::vector<double> C = build_cost_matrix(spec, P, Q);
  double max_cost = 0.0;
  for (double c : C) max_cost = std::max(max_cost, c);
  const double scale = max_cost > 0.0 ? max_cost : 1.0;
  for (double& c : C) c /= scale;

  double min_weight = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) min_weight = std::min(min_weight, P.weight(i));
  for (int j = 0; j < m; ++j) min_weight = std::min(min_weight, Q.weight(j));
  const double eps = 1e-12 * min_weight;

  std::vector<double> supplies(n), demands(m);
  double total_supply = 0.0;
  for (int i = 0; i < n; ++i) {
    supplies[i] = P.weight(i) + eps;
    total_supply += supplies[i];
  }
  double q_head = 0.0;
  for (int j = 0; j < m; ++j) {
    demands[j] = Q.weight(j);
    if (j + 1 < m) q_head += demands[j];
  }
  demands[m - 1] = total_supply - q_head;  // absorbs the perturbation mass exactly

  NetworkSimplex simplex(n, m, C.data());
  simplex.run(supplies, demands);

  TransportPlan plan;
  plan.n = n;
  plan.m = m;
  plan.entries = simplex.extract_entries(P.weights(), Q.weights(), 1e-6 * min_weight);
  double objective = 0.0;
  for (const auto& e : plan.entries) {
    objective += e.mass * C[static_cast<std::size_t>(e.i) * m + e.j] * scale;
  }
  plan.objective = objective;

  DualPair duals;
  duals.u.resize(n);
  duals.v.resize(m);
  const auto d = simplex.duals();
  for (int i = 0; i < n; ++i) duals.u[i] = d[i] * scale;
  for (int j = 0; j < m; ++j) duals.v[j] = d[n + j] * scale;
  return {std::move(plan), std::move(duals)};
}

OptimalityCertificate verify_optimality(const TransportPlan& plan, const DualPair& duals,
                                        std::span<const double> cost_matrix,
                                        std::span<const double> p_weights,
                                        std::span<const double> q_weights) {
  const int n = plan.n, m = plan.m;
  if (static_cast<int>(duals.u.size()) != n || static_cast<int>(duals.v.size()) != m ||
      static_cast<std::int64_t>(cost_matrix.size()) != static_cast<std::int64_t>(n) * m ||
      static_cast<int>(p_weights.size()) != n || static_cast<int>(q_weights.size()) != m) {
    throw std::invalid_argument("verify_optimality: shape mismatch");
  }
  double max_cost = 0.0;
  for (double c : cost_matrix) max_cost = std::max(max_cost, c);
  const double scale = max_cost > 0.0 ? max_cost : 1.0;

  OptimalityCertificate cert;
  std::vector<double> row_sum(n, 0.0), col_sum(m, 0.0);
  for (const auto& e : plan.entries) {
    row_sum[e.i] += e.mass;
    col_sum[e.j] += e.mass;
    const double slack = duals.u[e.i] + duals.v[e.j] - cost_matrix[static_cast<std::size_t>(e.i) * m + e.j];
    cert.max_slackness_violation = std::max(cert.max_slackness_violation, std::abs(slack) / scale);
  }
  for (int i = 0; i < n; ++i) {
    cert.max_marginal_violation = std::max(cert.max_marginal_violation,
                                           std::abs(row_sum[i] - p_weights[i]));
  }
  for (int j = 0; j < m; ++j) {
    cert.max_marginal_violation = std::max(cert.max_marginal_violation,
                                           std::abs(col_sum[j] - q_weights[j]));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double infeas = duals.u[i] + duals.v[j] - cost_matrix[static_cast<std::size_t>(i) * m + j];
      if (infeas > 0.0) {
        cert.max_dual_infeasibility = std::max(cert.max_dual_infeasibility, infeas / scale);
      }
    }
  }
  double dual_objective = 0.0;
  for (int i = 0; i < n; ++i) dual_objective += p_weights[i] * duals.u[i];
  for (int j = 0; j < m; ++j) dual_objective += q_weights[j] * duals.v[j];
  cert.duality_gap = std::abs(plan.objective - dual_objective) / scale;
  cert.pass = cert.max_marginal_violation <= 1e-9 && cert.max_dual_infeasibility <= 1e-9 &&
              cert.max_slackness_violation <= 1e-9 && cert.duality_gap <= 1e-9;
  return cert;
}

}  // namespace otclt
