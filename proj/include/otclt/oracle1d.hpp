#pragma once

#include <memory>
#include <vector>

#include "otclt/cost.hpp"
#include "otclt/measure.hpp"

namespace otclt {

/// One-dimensional law with exact CDF and quantile function: uniform,
/// gaussian, or a finite empirical/atomic measure.
class Distribution1D {
 public:
  enum class Kind { Uniform, Gaussian, Empirical };

  static Distribution1D uniform(double a, double b);
  static Distribution1D gaussian(double mu, double sigma);
  /// Atoms are sorted internally; uniform weights when omitted.
  static Distribution1D empirical(std::vector<double> points, std::vector<double> weights = {});
  static Distribution1D point_mass(double atom) { return empirical({atom}); }

  /// Maps a d=1 sample source onto its law (file sources become empirical).
  static Distribution1D from_source(const SampleSource& src);

  Kind kind() const { return kind_; }
  double cdf(double x) const;
  /// Left-continuous generalized inverse; u is clamped to [0,1] for laws
  /// with bounded support, and must be interior for gaussian laws.
  double quantile(double u) const;
  bool is_point_mass() const;
  double support_lo() const;  // -inf for gaussian
  double support_hi() const;

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }

 private:
  Distribution1D() = default;
  Kind kind_ = Kind::Uniform;
  double a_ = 0.0, b_ = 1.0;  // bounds or (mu, sigma)
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Exact transport cost in dimension 1 via the quantile coupling:
/// integral over (0,1) of h(F^{-1}(u) - G^{-1}(u)) du. Pairs of atomic
/// laws are summed exactly over the merged quantile partition; smooth
/// segments use composite Gauss-Legendre with interval doubling at
/// relative tolerance 1e-10.
double quantile_cost(const CostSpec& spec, const Distribution1D& X, const Distribution1D& Y,
                     int quad_points = 32);

/// The monotone rearrangement T(x) = G^{-1}(F(x)). At atoms of X the
/// quantile interval is evaluated at its midpoint. Throws when x lies
/// outside the support of X.
double monotone_map(const Distribution1D& X, const Distribution1D& Y, double x);

/// Kantorovich potential on the X side, reconstructed from the map:
/// phi(x) = integral from x0 to x of h'(s - T(s)) ds, so phi(x0) = 0.
/// With `conjugate` set, builds the opposite-side potential psi for the
/// pair (phi, psi), i.e. integrates the reflected gradient -h'(T(s)-s).
/// Piecewise-atomic structure integrates in closed form; fully smooth
/// pairs are tabulated by adaptive composite quadrature at relative
/// tolerance 1e-9.
class Potential1D {
 public:
  Potential1D(const CostSpec& spec, Distribution1D X, Distribution1D Y, double x0,
              bool conjugate = false, int quad_points = 32);

  double operator()(double x) const;
  double anchor_point() const { return x0_; }

 private:
  double raw(double x) const;  // unanchored antiderivative
  double piece_target(int piece) const;

  CostSpec spec_;
  Distribution1D x_law_, y_law_;
  double x0_ = 0.0;
  bool conjugate_ = false;
  int order_ = 32;
  double raw_at_x0_ = 0.0;
  // Piecewise-exact representation (Y atomic): target per piece between
  // breakpoints in x-space.
  bool piecewise_ = false;
  std::vector<double> breaks_;
  std::vector<double> targets_;
  // Tabulated representation (both laws smooth).
  double table_lo_ = 0.0, table_hi_ = 0.0;
  std::vector<double> table_;  // prefix integrals at uniform cell edges
};

/// Limiting variance integral: Var_X(phi) with phi the potential above.
/// Anchor-invariant by construction.
double sigma_sq_1d(const CostSpec& spec, const Distribution1D& X, const Distribution1D& Y,
                   int quad_points = 32);

}  // namespace otclt
