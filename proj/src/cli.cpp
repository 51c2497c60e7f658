#include "otclt/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string_view>

#include <CLI11.hpp>

#include "otclt/duality.hpp"
#include "otclt/error.hpp"
#include "otclt/inference.hpp"
#include "otclt/measure.hpp"
#include "otclt/montecarlo.hpp"
#include "otclt/oracle1d.hpp"
#include "otclt/report.hpp"
#include "otclt/solver.hpp"
#include "otclt/stats.hpp"

namespace otclt {

namespace {

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fputc('\n', stdout);
  } else {
    write_atomic(out_path, content);
  }
}

std::vector<int> parse_schedule(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string tok =
        text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 2) {
      throw std::invalid_argument("--schedule: malformed entry '" + tok + "'");
    }
    out.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (out.empty()) throw std::invalid_argument("--schedule must not be empty");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  // lo:hi:count
  double lo = 0.0, hi = 0.0;
  int count = 0;
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw std::invalid_argument("--grid expects lo:hi:count, got '" + text + "'");
  }
  auto parse_part = [&](std::size_t from, std::size_t to, auto& value) {
    const char* begin = text.data() + from;
    const char* end = text.data() + (to == std::string::npos ? text.size() : to);
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw std::invalid_argument("--grid expects lo:hi:count, got '" + text + "'");
    }
  };
  parse_part(0, c1, lo);
  parse_part(c1 + 1, c2, hi);
  parse_part(c2 + 1, std::string::npos, count);
  if (!(lo < hi) || count < 2) {
    throw std::invalid_argument("--grid needs lo < hi and count >= 2");
  }
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / (count - 1);
  }
  return grid;
}

/// Fine fixed discretization of a d=1 law at midpoint quantile levels.
DiscreteMeasure discretize_law(const SampleSource& src, int count) {
  const Distribution1D dist = Distribution1D::from_source(src);
  std::vector<double> pts(count);
  for (int k = 0; k < count; ++k) {
    pts[k] = dist.quantile((k + 0.5) / count);
  }
  return DiscreteMeasure::with_uniform_weights(std::move(pts), 1);
}

double oracle_theory_mixture(const CostSpec& cost, const SampleSource& p_law,
                             const SampleSource& q_law, int n, int m) {
  const Distribution1D P = Distribution1D::from_source(p_law);
  const Distribution1D Q = Distribution1D::from_source(q_law);
  const double sp = sigma_sq_1d(cost, P, Q);
  const double sq = sigma_sq_1d(cost, Q, P);
  const double lambda = static_cast<double>(n) / static_cast<double>(n + m);
  return (1.0 - lambda) * sp + lambda * sq;
}

struct CommonFlags {
  std::string cost = "power:2";
  int dim = 1;
  std::string p_path, q_path;
  std::string out_path;
};

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Exact discrete optimal transport with CLT-based inference"};
  app.require_subcommand(1);

  // solve
  auto flags = std::make_shared<CommonFlags>();
  CLI::App* solve = app.add_subcommand("solve", "solve the discrete OT problem exactly");
  solve->add_option("--cost", flags->cost, "cost configuration, power:<p>");
  solve->add_option("--d", flags->dim, "coordinate dimension of the CSV inputs");
  solve->add_option("--p", flags->p_path, "P-side CSV file")->required();
  solve->add_option("--q", flags->q_path, "Q-side CSV file")->required();
  solve->add_option("--out", flags->out_path, "output JSON path");

  // transform
  auto tr_potential = std::make_shared<std::string>();
  CLI::App* transform = app.add_subcommand("transform", "c-transform of a potential file");
  transform->add_option("--cost", flags->cost, "cost configuration, power:<p>");
  transform->add_option("--d", flags->dim, "coordinate dimension of the CSV inputs");
  transform->add_option("--p", flags->p_path, "P-side CSV file")->required();
  transform->add_option("--q", flags->q_path, "Q-side CSV file")->required();
  transform->add_option("--potential", *tr_potential, "potential JSON file")->required();
  transform->add_option("--out", flags->out_path, "output JSON path");

  // inference commands share flags
  auto alpha = std::make_shared<double>(0.05);
  auto with_bound = std::make_shared<bool>(false);
  CLI::App* infer_one = app.add_subcommand("infer-one", "one-sample CLT confidence interval");
  CLI::App* infer_two = app.add_subcommand("infer-two", "two-sample CLT confidence interval");
  CLI::App* wp_ci = app.add_subcommand("wp-ci", "delta-method interval for W_p");
  CLI::App* bound = app.add_subcommand("bound", "Efron-Stein plug-in variance bound");
  for (CLI::App* sub : {infer_one, infer_two, wp_ci, bound}) {
    sub->add_option("--cost", flags->cost, "cost configuration, power:<p>");
    sub->add_option("--d", flags->dim, "coordinate dimension of the CSV inputs");
    sub->add_option("--p", flags->p_path, "P-side CSV file")->required();
    sub->add_option("--q", flags->q_path, "Q-side CSV file")->required();
    sub->add_option("--out", flags->out_path, "output JSON path");
  }
  for (CLI::App* sub : {infer_one, infer_two, wp_ci}) {
    sub->add_option("--alpha", *alpha, "interval level is 1 - alpha");
  }
  for (CLI::App* sub : {infer_two, wp_ci}) {
    sub->add_flag("--es-bound", *with_bound, "attach the Efron-Stein bound to the report");
  }

  // simulation-style commands
  auto p_law = std::make_shared<std::string>();
  auto q_law = std::make_shared<std::string>();
  auto n = std::make_shared<int>(100);
  auto m = std::make_shared<int>(100);
  auto reps = std::make_shared<int>(400);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto theory = std::make_shared<double>(-1.0);
  auto q_grid = std::make_shared<int>(400);
  auto csv_path = std::make_shared<std::string>();
  auto grid_spec = std::make_shared<std::string>("0.05:0.95:101");
  auto schedule_spec = std::make_shared<std::string>("100,200,400,800");
  auto threads = std::make_shared<int>(0);

  CLI::App* simulate = app.add_subcommand("simulate", "replicated CLT experiment");
  CLI::App* stability = app.add_subcommand("stability", "potential and map stability curves");
  CLI::App* remainder = app.add_subcommand("remainder", "linearization remainder decay");
  for (CLI::App* sub : {simulate, stability, remainder}) {
    sub->add_option("--cost", flags->cost, "cost configuration, power:<p>");
    sub->add_option("--p-law", *p_law, "P generator, unif:a:b / gauss:mu:sd / file:<path>")
        ->required();
    sub->add_option("--q-law", *q_law, "Q generator")->required();
    sub->add_option("--n", *n, "P-side sample size");
    sub->add_option("--m", *m, "Q-side sample size (simulate: 0 = one-sample mode)");
    sub->add_option("--reps", *reps, "replications");
    sub->add_option("--seed", *seed, "stream seed");
    sub->add_option("--threads", *threads, "parallel replication cap (0 = auto)");
    sub->add_option("--out", flags->out_path, "output JSON path");
    sub->add_option("--csv", *csv_path, "also write a per-row CSV here");
  }
  simulate->add_option("--theory-sigma-sq", *theory,
                       "limiting variance; defaults to the d=1 oracle value");
  simulate->add_option("--q-grid", *q_grid, "target discretization size in one-sample mode");
  stability->add_option("--grid", *grid_spec, "evaluation grid lo:hi:count");
  stability->add_option("--schedule", *schedule_spec, "comma-separated sample sizes");
  remainder->add_option("--schedule", *schedule_spec, "comma-separated sample sizes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return 0;
    }
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }

  auto make_cost = [&](int d) { return CostSpec::parse(flags->cost, d); };

  if (solve->parsed()) {
    const CostSpec cost = make_cost(flags->dim);
    const DiscreteMeasure P = load_csv(flags->p_path, flags->dim);
    const DiscreteMeasure Q = load_csv(flags->q_path, flags->dim);
    const auto [plan, duals] = solve_discrete_ot(cost, P, Q);
    emit(to_json(plan, duals), flags->out_path);
    return 0;
  }
  if (transform->parsed()) {
    const CostSpec cost = make_cost(flags->dim);
    const DiscreteMeasure P = load_csv(flags->p_path, flags->dim);
    const DiscreteMeasure Q = load_csv(flags->q_path, flags->dim);
    const PotentialVector f = potential_from_json_file(*tr_potential);
    const bool on_p = f.side == PotentialVector::Side::P;
    const DiscreteMeasure& source = on_p ? P : Q;
    const DiscreteMeasure& target = on_p ? Q : P;
    emit(to_json(c_transform(cost, f, source, target)), flags->out_path);
    return 0;
  }
  if (infer_one->parsed()) {
    const CostSpec cost = make_cost(flags->dim);
    const DiscreteMeasure X = load_csv(flags->p_path, flags->dim);
    const DiscreteMeasure Q = load_csv(flags->q_path, flags->dim);
    emit(to_json(one_sample_ci(cost, X, Q, *alpha)), flags->out_path);
    return 0;
  }
  if (infer_two->parsed() || wp_ci->parsed()) {
    const CostSpec cost = make_cost(flags->dim);
    const DiscreteMeasure X = load_csv(flags->p_path, flags->dim);
    const DiscreteMeasure Y = load_csv(flags->q_path, flags->dim);
    CltReport report = infer_two->parsed() ? two_sample_ci(cost, X, Y, *alpha)
                                           : wasserstein_ci(cost, X, Y, *alpha);
    if (*with_bound) report.es_bound = efron_stein_bound(cost, X, Y);
    emit(to_json(report), flags->out_path);
    return 0;
  }
  if (bound->parsed()) {
    const CostSpec cost = make_cost(flags->dim);
    const DiscreteMeasure X = load_csv(flags->p_path, flags->dim);
    const DiscreteMeasure Y = load_csv(flags->q_path, flags->dim);
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(1);
    w.key("es_bound").value(efron_stein_bound(cost, X, Y));
    w.key("n").value(X.size());
    w.key("m").value(Y.size());
    w.end_object();
    emit(w.take(), flags->out_path);
    return 0;
  }

  // Simulation-style commands below share the ExperimentConfig.
  ExperimentConfig cfg;
  auto law_dim = [&](const std::string& text) {
    // Generators encode dimension; file sources use --d.
    SampleSource probe = SampleSource::parse(text, "probe", flags->dim);
    return probe.dim();
  };
  if (simulate->parsed() || stability->parsed() || remainder->parsed()) {
    const int d = law_dim(*p_law);
    cfg.cost = make_cost(d);
    cfg.p_law = SampleSource::parse(*p_law, "P", flags->dim);
    cfg.q_law = SampleSource::parse(*q_law, "Q", flags->dim);
    if (cfg.q_law.dim() != d) {
      throw std::invalid_argument("--p-law and --q-law dimensions disagree");
    }
    cfg.n = *n;
    cfg.m = *m;
    cfg.reps = *reps;
    cfg.seed = *seed;
    cfg.alpha = *alpha;
    cfg.threads = *threads;
  }

  if (simulate->parsed()) {
    CltSimResult result;
    if (cfg.m == 0) {
      const DiscreteMeasure q_fixed = discretize_law(cfg.q_law, *q_grid);
      double sigma = *theory;
      if (sigma < 0.0) {
        if (cfg.cost.dim() != 1) {
          throw std::invalid_argument("--theory-sigma-sq is required when d > 1");
        }
        sigma = sigma_sq_1d(cfg.cost, Distribution1D::from_source(cfg.p_law),
                            Distribution1D::from_source(cfg.q_law));
      }
      result = simulate_clt(cfg, q_fixed, sigma);
    } else {
      double sigma = *theory;
      if (sigma < 0.0) {
        if (cfg.cost.dim() != 1) {
          throw std::invalid_argument("--theory-sigma-sq is required when d > 1");
        }
        sigma = oracle_theory_mixture(cfg.cost, cfg.p_law, cfg.q_law, cfg.n, cfg.m);
      }
      result = simulate_clt(cfg, sigma);
    }
    emit(to_json(result), flags->out_path);
    if (!csv_path->empty()) write_atomic(*csv_path, to_csv(result));
    return 0;
  }
  if (stability->parsed()) {
    if (cfg.cost.dim() != 1) throw std::invalid_argument("stability requires d = 1 laws");
    cfg.grid = parse_grid(*grid_spec);
    const std::vector<int> schedule = parse_schedule(*schedule_spec);
    const Distribution1D P = Distribution1D::from_source(cfg.p_law);
    const Distribution1D Q = Distribution1D::from_source(cfg.q_law);
    const Potential1D phi(cfg.cost, P, Q, cfg.grid.front());
    const StabilityCurve curve = stability_diagnostic(cfg, phi, schedule);
    emit(to_json(curve), flags->out_path);
    if (!csv_path->empty()) write_atomic(*csv_path, to_csv(curve));
    return 0;
  }
  if (remainder->parsed()) {
    if (cfg.cost.dim() != 1) throw std::invalid_argument("remainder requires d = 1 laws");
    const std::vector<int> schedule = parse_schedule(*schedule_spec);
    const Distribution1D P = Distribution1D::from_source(cfg.p_law);
    const Distribution1D Q = Distribution1D::from_source(cfg.q_law);
    const double x0 = P.quantile(0.5);
    const double y0 = Q.quantile(0.5);
    const Potential1D phi(cfg.cost, P, Q, x0, false);
    const Potential1D psi(cfg.cost, Q, P, y0, true);
    const DecayTable table = remainder_variance(cfg, phi, psi, schedule);
    emit(to_json(table), flags->out_path);
    if (!csv_path->empty()) write_atomic(*csv_path, to_csv(table));
    return 0;
  }
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return 2;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace otclt
