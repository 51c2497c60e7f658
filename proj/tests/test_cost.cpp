#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/rng.hpp"

using namespace otclt;

namespace {

double eval1(const CostSpec& spec, double x, double y) {
  return spec.evaluate(std::span<const double>(&x, 1), std::span<const double>(&y, 1));
}

/// Independent inverse of the 1-d power gradient by bisection on
/// p |v|^{p-1} sign(v) = z.
double invert_gradient_bisect(double p, double z) {
  if (z == 0.0) return 0.0;
  const double sign = z > 0 ? 1.0 : -1.0;
  double lo = 0.0, hi = 1.0;
  const auto g = [&](double v) { return p * std::pow(v, p - 1.0); };
  while (g(hi) < std::abs(z)) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < std::abs(z) ? lo : hi) = mid;
  }
  return sign * 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("power cost evaluation") {
  const CostSpec p2 = CostSpec::power(2.0, 2);
  const std::vector<double> x{1.0, 0.0}, y{0.0, 0.0};
  CHECK(p2.evaluate(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p2.evaluate(x, x) == 0.0);

  const CostSpec p3 = CostSpec::power(3.0, 1);
  CHECK(eval1(p3, 2.0, 0.0) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("power gradient closed forms") {
  const CostSpec p2 = CostSpec::power(2.0, 2);
  std::vector<double> v{3.0, 4.0}, out(2);
  p2.gradient(v, out);
  CHECK(out[0] == doctest::Approx(6.0));
  CHECK(out[1] == doctest::Approx(8.0));
  v = {0.0, 0.0};
  p2.gradient(v, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);

  // p = 1.5 at v = 1 against a central finite difference with eps = 1e-6.
  const CostSpec p15 = CostSpec::power(1.5, 1);
  double g = 0.0, one = 1.0;
  p15.gradient(std::span<const double>(&one, 1), std::span<double>(&g, 1));
  CHECK(g == doctest::Approx(1.5).epsilon(1e-12));
  const double eps = 1e-6;
  const double fd = (p15.h1(1.0 + eps) - p15.h1(1.0 - eps)) / (2.0 * eps);
  CHECK(g == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("inverse gradient closed forms and bisection oracle") {
  const CostSpec p2 = CostSpec::power(2.0, 2);
  std::vector<double> z{6.0, 8.0}, out(2);
  p2.grad_conjugate(z, out);
  CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(4.0).epsilon(1e-14));
  z = {0.0, 0.0};
  p2.grad_conjugate(z, out);
  CHECK(out[0] == 0.0);

  const CostSpec p3 = CostSpec::power(3.0, 1);
  double zz = 3.0, vv = 0.0;
  p3.grad_conjugate(std::span<const double>(&zz, 1), std::span<double>(&vv, 1));
  CHECK(vv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vv == doctest::Approx(invert_gradient_bisect(3.0, 3.0)).epsilon(1e-10));
}

TEST_CASE("gradient and inverse are consistent on seeded probes") {
  RngStream rng(42, "cost-probes");
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    for (int d : {1, 2, 3}) {
      const CostSpec spec = CostSpec::power(p, d);
      std::vector<double> v(d), g(d), back(d);
      for (int t = 0; t < 1000; ++t) {
        // |v| log-uniform in [1e-3, 1e3]
        const double target_norm = std::pow(10.0, rng.uniform(-3.0, 3.0));
        double norm = 0.0;
        for (int k = 0; k < d; ++k) {
          v[k] = rng.uniform(-1.0, 1.0);
          norm += v[k] * v[k];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (int k = 0; k < d; ++k) v[k] *= target_norm / norm;
        spec.gradient(v, g);
        spec.grad_conjugate(g, back);
        double err = 0.0, vn = 0.0;
        for (int k = 0; k < d; ++k) {
          err += (back[k] - v[k]) * (back[k] - v[k]);
          vn += v[k] * v[k];
        }
        CHECK(std::sqrt(err) <= 1e-8 * (1.0 + std::sqrt(vn)));
      }
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  RngStream rng(43, "cost-fd");
  for (double p : {1.5, 2.0, 3.0}) {
    for (int d : {1, 2}) {
      const CostSpec spec = CostSpec::power(p, d);
      std::vector<double> v(d), g(d), lo(d), hi(d);
      for (int t = 0; t < 1000; ++t) {
        for (int k = 0; k < d; ++k) v[k] = rng.uniform(-2.0, 2.0);
        double norm = 0.0;
        for (double c : v) norm += c * c;
        if (std::sqrt(norm) < 0.05) continue;  // FD is ill-posed near the kink at 0
        spec.gradient(v, g);
        for (int k = 0; k < d; ++k) {
          lo = v;
          hi = v;
          const double eps = 1e-6;
          lo[k] -= eps;
          hi[k] += eps;
          const double fd = (spec.h(hi) - spec.h(lo)) / (2.0 * eps);
          CHECK(std::abs(fd - g[k]) <= 1e-4);
        }
      }
    }
  }
}

TEST_CASE("convexity subgradient inequality on probe pairs") {
  RngStream rng(44, "cost-convexity");
  for (double p : {1.5, 2.0, 3.0}) {
    const CostSpec spec = CostSpec::power(p, 2);
    std::vector<double> u(2), v(2), g(2);
    for (int t = 0; t < 1000; ++t) {
      for (int k = 0; k < 2; ++k) {
        u[k] = rng.uniform(-2.0, 2.0);
        v[k] = rng.uniform(-2.0, 2.0);
      }
      spec.gradient(v, g);
      double lhs = spec.h(u);
      double rhs = spec.h(v);
      for (int k = 0; k < 2; ++k) rhs += g[k] * (u[k] - v[k]);
      CHECK(lhs >= rhs - 1e-10);
    }
  }
}

TEST_CASE("assumption validation accepts power costs and rejects h(v)=|v|") {
  CHECK(validate_assumptions(CostSpec::power(2.0, 2), 64, 1).passed());
  CHECK(validate_assumptions(CostSpec::power(1.5, 1), 64, 1).passed());

  const CostSpec abs_cost = CostSpec::custom(
      1,
      [](std::span<const double> v) { return std::abs(v[0]); },
      [](std::span<const double> v, std::span<double> out) {
        out[0] = v[0] > 0 ? 1.0 : (v[0] < 0 ? -1.0 : 0.0);
      },
      nullptr, "abs");
  const AssumptionReport report = validate_assumptions(abs_cost, 64, 1);
  CHECK_FALSE(report.a1_pass);  // midpoint equality on collinear points
  CHECK_FALSE(report.passed());
}

TEST_CASE("configuration string parsing") {
  const CostSpec spec = CostSpec::parse("power:2.5", 3);
  CHECK(spec.exponent() == doctest::Approx(2.5));
  CHECK(spec.dim() == 3);
  CHECK_THROWS_AS(CostSpec::parse("power:1", 1), std::invalid_argument);   // needs p > 1
  CHECK_THROWS_AS(CostSpec::parse("power:x", 1), std::invalid_argument);
  CHECK_THROWS_AS(CostSpec::parse("manhattan", 1), std::invalid_argument);
}

TEST_CASE("custom cost without inverse gradient is rejected at use") {
  const CostSpec cost = CostSpec::custom(
      1, [](std::span<const double> v) { return v[0] * v[0]; }, nullptr, nullptr);
  double z = 1.0, out = 0.0;
  CHECK_THROWS_AS(cost.gradient(std::span<const double>(&z, 1), std::span<double>(&out, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(cost.grad_conjugate(std::span<const double>(&z, 1), std::span<double>(&out, 1)),
                  std::invalid_argument);
}
