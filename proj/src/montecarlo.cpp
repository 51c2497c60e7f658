#include "otclt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "otclt/duality.hpp"
#include "otclt/error.hpp"
#include "otclt/solver.hpp"
#include "otclt/stats.hpp"

namespace otclt {

int resolve_thread_count(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("OTCLT_THREADS")) {
    int value = 0;
    const std::string_view sv(env);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc() || ptr != sv.data() + sv.size() || value < 1) {
      throw std::invalid_argument("OTCLT_THREADS must be a positive integer, got '" +
                                  std::string(sv) + "'");
    }
    return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

/// Runs fn(rep) for rep in [0, count) on up to `threads` workers. The
/// first failing rep (lowest index) wins error reporting; results must be
/// written into per-rep slots by the callee.
void parallel_reps(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  int error_rep = -1;
  std::string error_message;
  bool error_is_input = false;
  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= count) return;
      try {
        fn(r);
      } catch (const std::invalid_argument& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error_rep < 0 || r < error_rep) {
          error_rep = r;
          error_message = e.what();
          error_is_input = true;
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error_rep < 0 || r < error_rep) {
          error_rep = r;
          error_message = e.what();
          error_is_input = false;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error_rep >= 0) {
    const std::string msg = "rep " + std::to_string(error_rep) + ": " + error_message;
    if (error_is_input) throw std::invalid_argument(msg);
    throw NumericalError(msg);
  }
}

void validate_config(const ExperimentConfig& cfg, bool need_m) {
  if (cfg.reps < 2) throw std::invalid_argument("experiment requires reps >= 2");
  if (cfg.n < 2) throw std::invalid_argument("experiment requires n >= 2");
  if (need_m && cfg.m < 2) throw std::invalid_argument("experiment requires m >= 2");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
}

CltSimResult summarize(std::vector<double> stats, double rate, double theory_sigma_sq,
                       const ExperimentConfig& cfg, int m_used) {
  CltSimResult result;
  result.statistics = std::move(stats);
  result.mean_statistic = sample_mean(result.statistics);
  const double var = sample_variance(result.statistics);
  result.empirical_variance_scaled = rate * var;
  result.theory_sigma_sq = theory_sigma_sq;
  result.rate = rate;
  result.n = cfg.n;
  result.m = m_used;
  result.reps = cfg.reps;
  result.seed = cfg.seed;
  result.standardized.resize(result.statistics.size());
  if (theory_sigma_sq > 0.0) {
    const double denom = std::sqrt(theory_sigma_sq / rate);
    for (std::size_t r = 0; r < result.statistics.size(); ++r) {
      result.standardized[r] = (result.statistics[r] - result.mean_statistic) / denom;
    }
  }
  result.ks_distance = ks_distance_normal(result.standardized);
  return result;
}

}  // namespace

CltSimResult simulate_clt(const ExperimentConfig& cfg, double theory_sigma_sq) {
  validate_config(cfg, true);
  if (theory_sigma_sq < 0.0) throw std::invalid_argument("theory sigma^2 must be >= 0");
  const int threads = resolve_thread_count(cfg.threads);
  std::vector<double> stats(cfg.reps);
  parallel_reps(cfg.reps, threads, [&](int r) {
    const DiscreteMeasure X = empirical_from_sample(cfg.p_law, cfg.n, cfg.seed, r);
    const DiscreteMeasure Y = empirical_from_sample(cfg.q_law, cfg.m, cfg.seed, r);
    stats[r] = solve_discrete_ot(cfg.cost, X, Y).first.objective;
  });
  const double rate = static_cast<double>(cfg.n) * cfg.m / static_cast<double>(cfg.n + cfg.m);
  return summarize(std::move(stats), rate, theory_sigma_sq, cfg, cfg.m);
}

CltSimResult simulate_clt(const ExperimentConfig& cfg, const DiscreteMeasure& q_fixed,
                          double theory_sigma_sq) {
  validate_config(cfg, false);
  if (theory_sigma_sq < 0.0) throw std::invalid_argument("theory sigma^2 must be >= 0");
  const int threads = resolve_thread_count(cfg.threads);
  std::vector<double> stats(cfg.reps);
  parallel_reps(cfg.reps, threads, [&](int r) {
    const DiscreteMeasure X = empirical_from_sample(cfg.p_law, cfg.n, cfg.seed, r);
    stats[r] = solve_discrete_ot(cfg.cost, X, q_fixed).first.objective;
  });
  return summarize(std::move(stats), static_cast<double>(cfg.n), theory_sigma_sq, cfg, 0);
}

namespace {

int scaled_m(const ExperimentConfig& cfg, int n_sched) {
  const double ratio = static_cast<double>(cfg.m) / static_cast<double>(cfg.n);
  return std::max(2, static_cast<int>(std::lround(ratio * n_sched)));
}

double mean_under(const Potential1D& phi, const DiscreteMeasure& sample) {
  double acc = 0.0;
  for (int i = 0; i < sample.size(); ++i) {
    acc += sample.weight(i) * phi(sample.point(i)[0]);
  }
  return acc;
}

}  // namespace

DecayTable remainder_variance(const ExperimentConfig& cfg, const Potential1D& phi,
                              const Potential1D& psi, std::span<const int> schedule) {
  validate_config(cfg, true);
  if (cfg.cost.dim() != 1) throw std::invalid_argument("remainder_variance requires d = 1");
  if (schedule.empty()) throw std::invalid_argument("remainder_variance: empty schedule");
  const int threads = resolve_thread_count(cfg.threads);

  DecayTable table;
  table.reps = cfg.reps;
  table.seed = cfg.seed;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const int n = schedule[k];
    const int m = scaled_m(cfg, n);
    if (n < 2) throw std::invalid_argument("remainder_variance: schedule entries must be >= 2");
    std::vector<double> remainders(cfg.reps);
    parallel_reps(cfg.reps, threads, [&](int r) {
      const std::uint64_t sub = k * static_cast<std::uint64_t>(cfg.reps) + r;
      const DiscreteMeasure X = empirical_from_sample(cfg.p_law, n, cfg.seed, sub);
      const DiscreteMeasure Y = empirical_from_sample(cfg.q_law, m, cfg.seed, sub);
      const double objective = solve_discrete_ot(cfg.cost, X, Y).first.objective;
      remainders[r] = objective - mean_under(phi, X) - mean_under(psi, Y);
    });
    DecayRow row;
    row.n = n;
    row.m = m;
    row.var_rn = sample_variance(remainders);
    row.n_var_rn = n * row.var_rn;
    table.rows.push_back(row);
  }
  return table;
}

namespace {

struct GridErrors {
  double sup = 0.0;
  double l2 = 0.0;
  double centered_sup = 0.0;
  double map_sup = 0.0;
};

/// One stability replication: solve, canonicalize, extend by c-transform,
/// compare against the oracle on the grid.
GridErrors stability_rep(const ExperimentConfig& cfg, const Potential1D* phi, bool want_map,
                         int n, int m, std::uint64_t substream, int anchor_index,
                         const Distribution1D& p_dist, const Distribution1D& q_dist) {
  const DiscreteMeasure X = empirical_from_sample(cfg.p_law, n, cfg.seed, substream);
  const DiscreteMeasure Y = empirical_from_sample(cfg.q_law, m, cfg.seed, substream);
  const DualPair duals = solve_discrete_ot(cfg.cost, X, Y).second;
  const PotentialVector v_c = canonical_potentials(cfg.cost, duals, X, Y).second;

  const auto& grid = cfg.grid;
  std::vector<double> extension(grid.size());
  double max_cost = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double best = std::numeric_limits<double>::infinity();
    const double gx = grid[g];
    for (int j = 0; j < Y.size(); ++j) {
      const double c = cfg.cost.h1(gx - Y.point(j)[0]);
      max_cost = std::max(max_cost, c);
      best = std::min(best, c - v_c.values[j]);
    }
    extension[g] = best;
  }

  GridErrors err;
  if (phi != nullptr) {
    const double anchor_ext = extension[anchor_index];
    const double anchor_phi = (*phi)(grid[anchor_index]);
    double min_e = std::numeric_limits<double>::infinity();
    double max_e = -min_e;
    double sq_sum = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double raw_diff = extension[g] - (*phi)(grid[g]);
      const double anchored = raw_diff - (anchor_ext - anchor_phi);
      err.sup = std::max(err.sup, std::abs(anchored));
      sq_sum += anchored * anchored;
      min_e = std::min(min_e, raw_diff);
      max_e = std::max(max_e, raw_diff);
    }
    err.l2 = std::sqrt(sq_sum / static_cast<double>(grid.size()));
    err.centered_sup = 0.5 * (max_e - min_e);
  }
  if (want_map) {
    const double tie_tol = 1e-12 * (1.0 + max_cost);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double gx = grid[g];
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < Y.size(); ++j) {
        best = std::min(best, cfg.cost.h1(gx - Y.point(j)[0]) - v_c.values[j]);
      }
      const double oracle_t = monotone_map(p_dist, q_dist, gx);
      double worst = 0.0;
      for (int j = 0; j < Y.size(); ++j) {
        const double value = cfg.cost.h1(gx - Y.point(j)[0]) - v_c.values[j];
        if (value <= best + tie_tol) {
          worst = std::max(worst, std::abs(Y.point(j)[0] - oracle_t));
        }
      }
      err.map_sup = std::max(err.map_sup, worst);
    }
  }
  return err;
}

void validate_grid(const ExperimentConfig& cfg, const Distribution1D& p_dist) {
  if (cfg.grid.empty()) throw std::invalid_argument("stability runs require a nonempty grid");
  for (double g : cfg.grid) {
    if (g < p_dist.support_lo() || g > p_dist.support_hi()) {
      throw std::invalid_argument("grid point " + std::to_string(g) +
                                  " lies outside the sampled law's support");
    }
  }
}

}  // namespace

StabilityCurve stability_diagnostic(const ExperimentConfig& cfg, const Potential1D& phi,
                                    std::span<const int> schedule, int anchor_index) {
  validate_config(cfg, true);
  if (cfg.cost.dim() != 1) throw std::invalid_argument("stability_diagnostic requires d = 1");
  if (schedule.empty()) throw std::invalid_argument("stability_diagnostic: empty schedule");
  const Distribution1D p_dist = Distribution1D::from_source(cfg.p_law);
  const Distribution1D q_dist = Distribution1D::from_source(cfg.q_law);
  validate_grid(cfg, p_dist);
  if (anchor_index < 0 || anchor_index >= static_cast<int>(cfg.grid.size())) {
    throw std::invalid_argument("stability_diagnostic: anchor index out of range");
  }
  const int threads = resolve_thread_count(cfg.threads);

  StabilityCurve curve;
  curve.reps = cfg.reps;
  curve.seed = cfg.seed;
  curve.anchor_index = anchor_index;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const int n = schedule[k];
    const int m = scaled_m(cfg, n);
    std::vector<GridErrors> errors(cfg.reps);
    parallel_reps(cfg.reps, threads, [&](int r) {
      const std::uint64_t sub = k * static_cast<std::uint64_t>(cfg.reps) + r;
      errors[r] = stability_rep(cfg, &phi, true, n, m, sub, anchor_index, p_dist, q_dist);
    });
    StabilityRow row;
    row.n = n;
    row.m = m;
    for (const auto& e : errors) {
      row.sup_error += e.sup;
      row.l2_error += e.l2;
      row.centered_sup_error += e.centered_sup;
      row.map_sup_error += e.map_sup;
    }
    const double inv = 1.0 / cfg.reps;
    row.sup_error *= inv;
    row.l2_error *= inv;
    row.centered_sup_error *= inv;
    row.map_sup_error *= inv;
    curve.rows.push_back(row);
  }
  return curve;
}

MapStabilityCurve map_stability_diagnostic(const ExperimentConfig& cfg,
                                           std::span<const int> schedule) {
  validate_config(cfg, true);
  if (cfg.cost.dim() != 1) throw std::invalid_argument("map_stability_diagnostic requires d = 1");
  if (schedule.empty()) throw std::invalid_argument("map_stability_diagnostic: empty schedule");
  const Distribution1D p_dist = Distribution1D::from_source(cfg.p_law);
  const Distribution1D q_dist = Distribution1D::from_source(cfg.q_law);
  validate_grid(cfg, p_dist);
  const int threads = resolve_thread_count(cfg.threads);

  MapStabilityCurve curve;
  curve.reps = cfg.reps;
  curve.seed = cfg.seed;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const int n = schedule[k];
    const int m = scaled_m(cfg, n);
    std::vector<GridErrors> errors(cfg.reps);
    parallel_reps(cfg.reps, threads, [&](int r) {
      const std::uint64_t sub = k * static_cast<std::uint64_t>(cfg.reps) + r;
      errors[r] = stability_rep(cfg, nullptr, true, n, m, sub, 0, p_dist, q_dist);
    });
    MapStabilityRow row;
    row.n = n;
    row.m = m;
    for (const auto& e : errors) row.sup_error += e.map_sup;
    row.sup_error /= cfg.reps;
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace otclt
