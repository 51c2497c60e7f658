#include "otclt/cost.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "otclt/rng.hpp"

namespace otclt {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_dim(std::span<const double> v, int d, const char* what) {
  if (static_cast<int>(v.size()) != d) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

CostSpec CostSpec::power(double p, int dim) {
  if (!(p > 1.0)) throw std::invalid_argument("power cost requires p > 1");
  if (dim < 1) throw std::invalid_argument("cost dimension must be positive");
  CostSpec s;
  s.kind_ = Kind::Power;
  s.p_ = p;
  s.dim_ = dim;
  s.name_ = "power:" + std::to_string(p);
  return s;
}

CostSpec CostSpec::custom(int dim, ScalarFn h, VectorFn grad, VectorFn grad_conjugate,
                          std::string name) {
  if (dim < 1) throw std::invalid_argument("cost dimension must be positive");
  if (!h) throw std::invalid_argument("custom cost requires an h evaluator");
  CostSpec s;
  s.kind_ = Kind::Custom;
  s.dim_ = dim;
  s.name_ = std::move(name);
  s.h_fn_ = std::move(h);
  s.grad_fn_ = std::move(grad);
  s.grad_conj_fn_ = std::move(grad_conjugate);
  return s;
}

CostSpec CostSpec::parse(std::string_view config, int dim) {
  constexpr std::string_view prefix = "power:";
  if (config.substr(0, prefix.size()) != prefix) {
    throw std::invalid_argument("unknown cost configuration '" + std::string(config) +
                                "'; expected power:<p>");
  }
  const std::string_view num = config.substr(prefix.size());
  double p = 0.0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
  if (ec != std::errc() || ptr != num.data() + num.size()) {
    throw std::invalid_argument("malformed exponent in cost configuration '" +
                                std::string(config) + "'");
  }
  return power(p, dim);
}

double CostSpec::h(std::span<const double> v) const {
  check_dim(v, dim_, "cost h");
  if (kind_ == Kind::Power) {
    const double r = norm(v);
    return p_ == 2.0 ? r * r : std::pow(r, p_);
  }
  return h_fn_(v);
}

double CostSpec::evaluate(std::span<const double> x, std::span<const double> y) const {
  check_dim(x, dim_, "cost evaluate (x)");
  check_dim(y, dim_, "cost evaluate (y)");
  if (kind_ == Kind::Power) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double d = x[k] - y[k];
      s += d * d;
    }
    return p_ == 2.0 ? s : std::pow(s, 0.5 * p_);
  }
  std::vector<double> diff(dim_);
  for (int k = 0; k < dim_; ++k) diff[k] = x[k] - y[k];
  return h_fn_(diff);
}

void CostSpec::gradient(std::span<const double> v, std::span<double> out) const {
  check_dim(v, dim_, "cost gradient");
  check_dim(out, dim_, "cost gradient (out)");
  if (kind_ == Kind::Power) {
    const double r = norm(v);
    if (r == 0.0) {
      for (auto& o : out) o = 0.0;
      return;
    }
    const double scale = p_ * std::pow(r, p_ - 2.0);
    for (int k = 0; k < dim_; ++k) out[k] = scale * v[k];
    return;
  }
  if (!grad_fn_) throw std::invalid_argument("custom cost lacks a gradient evaluator");
  grad_fn_(v, out);
}

double CostSpec::gradient_norm(std::span<const double> v) const {
  if (kind_ == Kind::Power) {
    const double r = norm(v);
    return r == 0.0 ? 0.0 : p_ * std::pow(r, p_ - 1.0);
  }
  std::vector<double> g(dim_);
  gradient(v, g);
  return norm(g);
}

void CostSpec::grad_conjugate(std::span<const double> z, std::span<double> out) const {
  check_dim(z, dim_, "cost grad_conjugate");
  check_dim(out, dim_, "cost grad_conjugate (out)");
  if (kind_ == Kind::Power) {
    const double r = norm(z);
    if (r == 0.0) {
      for (auto& o : out) o = 0.0;
      return;
    }
    const double len = std::pow(r / p_, 1.0 / (p_ - 1.0));
    for (int k = 0; k < dim_; ++k) out[k] = len * z[k] / r;
    return;
  }
  if (!grad_conj_fn_) {
    throw std::invalid_argument("custom cost lacks an inverse-gradient evaluator");
  }
  grad_conj_fn_(z, out);
}

double CostSpec::h1(double v) const {
  if (dim_ != 1) throw std::invalid_argument("h1 requires dimension 1");
  return h(std::span<const double>(&v, 1));
}

double CostSpec::grad1(double v) const {
  if (dim_ != 1) throw std::invalid_argument("grad1 requires dimension 1");
  double g = 0.0;
  gradient(std::span<const double>(&v, 1), std::span<double>(&g, 1));
  return g;
}

AssumptionReport validate_assumptions(const CostSpec& spec, int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("validate_assumptions requires probes >= 1");
  const int d = spec.dim();
  RngStream rng(seed, "cost-validation");
  AssumptionReport report;
  report.probes = probes;
  report.a2_note =
      "(A2) cone condition not numerically checkable; guaranteed for power costs "
      "by the regularity of |v|^p with p > 1";

  std::vector<double> u(d), v(d), mid(d), dir(d), ray(d);
  double a1_worst = std::numeric_limits<double>::infinity();
  double a3_worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < probes; ++t) {
    // (A1): strict midpoint inequality on pairs at least 0.1 apart.
    double dist = 0.0;
    do {
      for (int k = 0; k < d; ++k) {
        u[k] = rng.uniform(-2.0, 2.0);
        v[k] = rng.uniform(-2.0, 2.0);
      }
      dist = 0.0;
      for (int k = 0; k < d; ++k) dist += (u[k] - v[k]) * (u[k] - v[k]);
    } while (dist < 0.01);
    for (int k = 0; k < d; ++k) mid[k] = 0.5 * (u[k] + v[k]);
    const double hu = spec.h(u);
    const double hv = spec.h(v);
    const double hm = spec.h(mid);
    if (!(hu >= 0.0 && hv >= 0.0 && hm >= 0.0) || !std::isfinite(hu + hv + hm)) {
      throw std::invalid_argument("cost rejected: h must be finite and nonnegative");
    }
    const double margin = 0.5 * (hu + hv) - hm;
    a1_worst = std::min(a1_worst, margin);

    // (A3): h(Rw)/R strictly increasing over R in {10, 10^2, 10^3, 10^4}.
    double dn = 0.0;
    for (int k = 0; k < d; ++k) {
      dir[k] = rng.uniform(-1.0, 1.0);
      dn += dir[k] * dir[k];
    }
    dn = std::sqrt(dn);
    if (dn == 0.0) {
      dir[0] = 1.0;
      dn = 1.0;
    }
    double prev_ratio = -std::numeric_limits<double>::infinity();
    for (double radius : {10.0, 100.0, 1000.0, 10000.0}) {
      for (int k = 0; k < d; ++k) ray[k] = radius * dir[k] / dn;
      const double ratio = spec.h(ray) / radius;
      if (prev_ratio > -std::numeric_limits<double>::infinity()) {
        a3_worst = std::min(a3_worst, ratio - prev_ratio);
      }
      prev_ratio = ratio;
    }
  }
  report.a1_worst_margin = a1_worst;
  report.a1_pass = a1_worst > 1e-12;  // strictness: equality within tolerance fails
  report.a3_worst_ratio_gap = a3_worst;
  report.a3_pass = a3_worst > 0.0;
  if (a1_worst < -1e-12) {
    throw std::invalid_argument("cost rejected: midpoint convexity violated by " +
                                std::to_string(-a1_worst));
  }
  return report;
}

}  // namespace otclt
