#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace otclt {

/// Translation-invariant cost c(x,y) = h(x-y) with strictly convex h.
///
/// Built-in family: h(v) = |v|^p with p > 1 ("power:<p>" in configuration
/// strings). Custom costs must supply h, its gradient, and the inverse of
/// the gradient; no numerical inversion happens on the solve path.
class CostSpec {
 public:
  using ScalarFn = std::function<double(std::span<const double>)>;
  using VectorFn = std::function<void(std::span<const double>, std::span<double>)>;

  enum class Kind { Power, Custom };

  static CostSpec power(double p, int dim);
  static CostSpec custom(int dim, ScalarFn h, VectorFn grad, VectorFn grad_conjugate,
                         std::string name = "custom");

  /// Parses "power:<p>".
  static CostSpec parse(std::string_view config, int dim);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double exponent() const { return p_; }
  const std::string& name() const { return name_; }

  /// h(x - y).
  double evaluate(std::span<const double> x, std::span<const double> y) const;

  /// h(v).
  double h(std::span<const double> v) const;

  /// grad h(v); for power costs p|v|^{p-2} v with value 0 at v = 0.
  void gradient(std::span<const double> v, std::span<double> out) const;

  /// The unique v with grad h(v) = z.
  void grad_conjugate(std::span<const double> z, std::span<double> out) const;

  /// |grad h(v)| without materializing the vector.
  double gradient_norm(std::span<const double> v) const;

  // Scalar forms for dimension 1.
  double h1(double v) const;
  double grad1(double v) const;

 private:
  CostSpec() = default;

  Kind kind_ = Kind::Power;
  double p_ = 2.0;
  int dim_ = 1;
  std::string name_;
  ScalarFn h_fn_;
  VectorFn grad_fn_;
  VectorFn grad_conj_fn_;
};

/// Numerical check of the structural assumptions on h: strict midpoint
/// convexity (A1) and superlinear growth (A3). The cone condition (A2)
/// is geometric and recorded as a note only; it holds for all power costs.
struct AssumptionReport {
  bool a1_pass = false;
  double a1_worst_margin = 0.0;  // min over probes of (h(u)+h(v))/2 - h((u+v)/2)
  bool a3_pass = false;
  double a3_worst_ratio_gap = 0.0;  // min over probes of h(R'w)/R' - h(Rw)/R
  std::string a2_note;
  int probes = 0;
  bool passed() const { return a1_pass && a3_pass; }
};

/// Probes (A1) on random distinct pairs and (A3) along random rays with
/// radii 10, 10^2, 10^3, 10^4. Throws std::invalid_argument when a probe
/// violates strict convexity beyond tolerance 1e-12.
AssumptionReport validate_assumptions(const CostSpec& spec, int probes, std::uint64_t seed);

}  // namespace otclt
