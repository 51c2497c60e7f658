#include "otclt/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "otclt/error.hpp"
#include "otclt/stats.hpp"

namespace otclt {

Distribution1D Distribution1D::uniform(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("uniform law requires a < b");
  Distribution1D d;
  d.kind_ = Kind::Uniform;
  d.a_ = a;
  d.b_ = b;
  return d;
}

Distribution1D Distribution1D::gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian law requires sigma > 0");
  Distribution1D d;
  d.kind_ = Kind::Gaussian;
  d.a_ = mu;
  d.b_ = sigma;
  return d;
}

Distribution1D Distribution1D::empirical(std::vector<double> points, std::vector<double> weights) {
  if (points.empty()) throw std::invalid_argument("empirical law needs at least one atom");
  if (weights.empty()) {
    weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  }
  if (weights.size() != points.size()) {
    throw std::invalid_argument("empirical law: weight count mismatch");
  }
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return points[a] < points[b];
  });
  Distribution1D d;
  d.kind_ = Kind::Empirical;
  d.atoms_.reserve(points.size());
  d.weights_.reserve(points.size());
  for (std::size_t k : idx) {
    if (!std::isfinite(points[k])) throw std::invalid_argument("empirical atom must be finite");
    if (!(weights[k] > 0.0)) throw std::invalid_argument("empirical weights must be positive");
    d.atoms_.push_back(points[k]);
    d.weights_.push_back(weights[k]);
  }
  d.cumulative_.resize(d.weights_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < d.weights_.size(); ++k) {
    acc += d.weights_[k];
    d.cumulative_[k] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9) {
    throw std::invalid_argument("empirical weights must sum to 1");
  }
  d.cumulative_.back() = 1.0;
  return d;
}

Distribution1D Distribution1D::from_source(const SampleSource& src) {
  if (src.dim() != 1) throw std::invalid_argument("from_source requires a d=1 source");
  switch (src.kind()) {
    case SampleSource::Kind::Uniform:
      return uniform(src.param_a()[0], src.param_b()[0]);
    case SampleSource::Kind::Gaussian:
      return gaussian(src.param_a()[0], src.param_b()[0]);
    case SampleSource::Kind::Shift: {
      Distribution1D base = from_source(*src.base());
      const double off = src.offset()[0];
      switch (base.kind_) {
        case Kind::Uniform:
          return uniform(base.a_ + off, base.b_ + off);
        case Kind::Gaussian:
          return gaussian(base.a_ + off, base.b_);
        case Kind::Empirical: {
          std::vector<double> atoms = base.atoms_;
          for (double& a : atoms) a += off;
          return empirical(std::move(atoms), base.weights_);
        }
      }
      break;
    }
    case SampleSource::Kind::File: {
      const DiscreteMeasure& m = *src.file_measure();
      std::vector<double> atoms(m.size()), w(m.size());
      for (int i = 0; i < m.size(); ++i) {
        atoms[i] = m.point(i)[0];
        w[i] = m.weight(i);
      }
      return empirical(std::move(atoms), std::move(w));
    }
  }
  throw std::invalid_argument("unsupported source kind");
}

double Distribution1D::cdf(double x) const {
  switch (kind_) {
    case Kind::Uniform:
      return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
    case Kind::Gaussian:
      return normal_cdf((x - a_) / b_);
    case Kind::Empirical: {
      const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
      if (it == atoms_.begin()) return 0.0;
      return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
  }
  return 0.0;
}

double Distribution1D::quantile(double u) const {
  switch (kind_) {
    case Kind::Uniform:
      return a_ + (b_ - a_) * std::clamp(u, 0.0, 1.0);
    case Kind::Gaussian:
      return a_ + b_ * normal_quantile(u);
    case Kind::Empirical: {
      const double uu = std::clamp(u, 0.0, 1.0);
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), uu);
      const std::size_t k = it == cumulative_.end()
                                ? cumulative_.size() - 1
                                : static_cast<std::size_t>(it - cumulative_.begin());
      return atoms_[k];
    }
  }
  return 0.0;
}

bool Distribution1D::is_point_mass() const {
  return kind_ == Kind::Empirical && atoms_.front() == atoms_.back();
}

double Distribution1D::support_lo() const {
  switch (kind_) {
    case Kind::Uniform:
      return a_;
    case Kind::Gaussian:
      return -std::numeric_limits<double>::infinity();
    case Kind::Empirical:
      return atoms_.front();
  }
  return 0.0;
}

double Distribution1D::support_hi() const {
  switch (kind_) {
    case Kind::Uniform:
      return b_;
    case Kind::Gaussian:
      return std::numeric_limits<double>::infinity();
    case Kind::Empirical:
      return atoms_.back();
  }
  return 0.0;
}

namespace {

/// Interior quantile levels at which an atomic law jumps; empty for
/// smooth laws.
std::vector<double> interior_levels(const Distribution1D& d) {
  std::vector<double> levels;
  if (d.kind() == Distribution1D::Kind::Empirical) {
    const auto& cum = d.cumulative();
    for (std::size_t k = 0; k + 1 < cum.size(); ++k) levels.push_back(cum[k]);
  }
  return levels;
}

}  // namespace

double quantile_cost(const CostSpec& spec, const Distribution1D& X, const Distribution1D& Y,
                     int quad_points) {
  if (spec.dim() != 1) throw std::invalid_argument("quantile_cost requires a d=1 cost");
  // Segment (0,1) at every atomic jump of either side; both quantiles are
  // then constant or smooth on each open segment.
  std::vector<double> cuts{0.0, 1.0};
  for (double u : interior_levels(X)) cuts.push_back(u);
  for (double u : interior_levels(Y)) cuts.push_back(u);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const bool x_atomic = X.kind() == Distribution1D::Kind::Empirical;
  const bool y_atomic = Y.kind() == Distribution1D::Kind::Empirical;
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    const double len = hi - lo;
    if (len <= 0.0) continue;
    if (x_atomic && y_atomic) {
      const double mid = 0.5 * (lo + hi);
      total += len * spec.h1(X.quantile(mid) - Y.quantile(mid));
      continue;
    }
    const double piece =
        integrate_doubling([&](double u) { return spec.h1(X.quantile(u) - Y.quantile(u)); }, lo,
                           hi, quad_points, 1e-10);
    if (!std::isfinite(piece)) {
      throw NumericalError("quantile_cost: non-integrable tail detected");
    }
    total += piece;
  }
  if (!std::isfinite(total)) throw NumericalError("quantile_cost: non-finite result");
  return total;
}

double monotone_map(const Distribution1D& X, const Distribution1D& Y, double x) {
  if (x < X.support_lo() || x > X.support_hi()) {
    throw std::invalid_argument("monotone_map: x outside the support of X");
  }
  double u;
  if (X.kind() == Distribution1D::Kind::Empirical) {
    // At atoms the quantile interval is evaluated at its midpoint.
    const auto& atoms = X.atoms();
    const auto lo_it = std::lower_bound(atoms.begin(), atoms.end(), x);
    if (lo_it != atoms.end() && *lo_it == x) {
      double below = 0.0;
      const std::size_t first = static_cast<std::size_t>(lo_it - atoms.begin());
      if (first > 0) below = X.cumulative()[first - 1];
      u = 0.5 * (below + X.cdf(x));
    } else {
      u = X.cdf(x);
    }
  } else {
    u = X.cdf(x);
  }
  return Y.quantile(u);
}

Potential1D::Potential1D(const CostSpec& spec, Distribution1D X, Distribution1D Y, double x0,
                         bool conjugate, int quad_points)
    : spec_(spec),
      x_law_(std::move(X)),
      y_law_(std::move(Y)),
      x0_(x0),
      conjugate_(conjugate),
      order_(quad_points) {
  if (spec_.dim() != 1) throw std::invalid_argument("Potential1D requires a d=1 cost");
  if (x0_ < x_law_.support_lo() || x0_ > x_law_.support_hi()) {
    throw std::invalid_argument("Potential1D: anchor x0 outside the support of X");
  }
  const bool x_atomic = x_law_.kind() == Distribution1D::Kind::Empirical;
  const bool y_atomic = y_law_.kind() == Distribution1D::Kind::Empirical;

  if (y_atomic || x_atomic) {
    // The map s -> T(s) is piecewise constant: it jumps where F crosses an
    // interior level of Y (thresholds in x-space) and at atoms of X.
    piecewise_ = true;
    std::vector<double> cuts;
    for (double level : interior_levels(y_law_)) cuts.push_back(x_law_.quantile(level));
    if (x_atomic) {
      for (double a : x_law_.atoms()) cuts.push_back(a);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    breaks_ = std::move(cuts);
    targets_.resize(breaks_.size() + 1);
    const double lo = x_law_.support_lo();
    const double hi = x_law_.support_hi();
    for (std::size_t p = 0; p < targets_.size(); ++p) {
      const double seg_lo = p == 0 ? lo : breaks_[p - 1];
      const double seg_hi = p == targets_.size() - 1 ? hi : breaks_[p];
      double mid = 0.5 * (seg_lo + seg_hi);
      if (!std::isfinite(mid)) mid = std::isfinite(seg_lo) ? seg_lo + 1.0 : seg_hi - 1.0;
      // Level at the segment interior; clamp away from the exact jump.
      const double level = x_law_.cdf(mid);
      targets_[p] = y_law_.quantile(std::clamp(level, 1e-15, 1.0 - 1e-15));
    }
  } else {
    // Both laws smooth: tabulate prefix integrals of h'(s - T(s)) on the
    // support of X, doubling the cell count until the table settles.
    piecewise_ = false;
    table_lo_ = x_law_.support_lo();
    table_hi_ = x_law_.support_hi();
    if (!std::isfinite(table_lo_) || !std::isfinite(table_hi_)) {
      table_lo_ = x_law_.quantile(1e-10);
      table_hi_ = x_law_.quantile(1.0 - 1e-10);
    }
    auto integrand = [&](double s) {
      const double t = y_law_.quantile(std::clamp(x_law_.cdf(s), 1e-15, 1.0 - 1e-15));
      return conjugate_ ? -spec_.grad1(t - s) : spec_.grad1(s - t);
    };
    int cells = 16;
    std::vector<double> prev;
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::vector<double> table(cells + 1, 0.0);
      const double width = (table_hi_ - table_lo_) / cells;
      for (int c = 0; c < cells; ++c) {
        const double a = table_lo_ + c * width;
        table[c + 1] = table[c] + composite_gl(integrand, a, a + width, order_, 1);
      }
      if (!std::isfinite(table.back())) {
        throw NumericalError("Potential1D: non-finite quadrature");
      }
      if (!prev.empty()) {
        double scale = 1.0;
        for (double t : table) scale = std::max(scale, std::abs(t));
        double worst = 0.0;
        for (std::size_t c = 0; c < prev.size(); ++c) {
          worst = std::max(worst, std::abs(prev[c] - table[2 * c]));
        }
        if (worst <= 1e-9 * scale) {
          table_ = std::move(table);
          break;
        }
      }
      prev = std::move(table);
      cells *= 2;
    }
    if (table_.empty()) table_ = std::move(prev);
  }
  raw_at_x0_ = 0.0;
  raw_at_x0_ = raw(x0_);
}

double Potential1D::raw(double x) const {
  if (piecewise_) {
    // Signed sum of exact antiderivative increments between x0 and x;
    // each piece has a constant target, so the increment is closed form.
    const double lo = std::min(x, x0_);
    const double hi = std::max(x, x0_);
    const double sign = x >= x0_ ? 1.0 : -1.0;
    auto antiderivative = [&](double v) {
      return conjugate_ ? spec_.h1(-v) : spec_.h1(v);
    };
    double acc = 0.0;
    for (std::size_t p = 0; p < targets_.size(); ++p) {
      const double seg_lo = p == 0 ? -std::numeric_limits<double>::infinity() : breaks_[p - 1];
      const double seg_hi =
          p < breaks_.size() ? breaks_[p] : std::numeric_limits<double>::infinity();
      const double a = std::max(lo, seg_lo);
      const double b = std::min(hi, seg_hi);
      if (b > a) {
        acc += antiderivative(b - targets_[p]) - antiderivative(a - targets_[p]);
      }
      if (seg_hi >= hi) break;
    }
    return sign * acc;
  }
  const double tol = 1e-12 * (1.0 + std::abs(table_hi_ - table_lo_));
  if (x < table_lo_ - tol || x > table_hi_ + tol) {
    throw std::invalid_argument("Potential1D: evaluation point outside the tabulated support");
  }
  const double clamped = std::clamp(x, table_lo_, table_hi_);
  const int cells = static_cast<int>(table_.size()) - 1;
  const double width = (table_hi_ - table_lo_) / cells;
  int c = std::min(cells - 1, static_cast<int>((clamped - table_lo_) / width));
  const double cell_lo = table_lo_ + c * width;
  auto integrand = [&](double s) {
    const double t = y_law_.quantile(std::clamp(x_law_.cdf(s), 1e-15, 1.0 - 1e-15));
    return conjugate_ ? -spec_.grad1(t - s) : spec_.grad1(s - t);
  };
  return table_[c] + composite_gl(integrand, cell_lo, clamped, order_, 1);
}

double Potential1D::operator()(double x) const {
  if (piecewise_) {
    if (x < x_law_.support_lo() - 1e-12 || x > x_law_.support_hi() + 1e-12) {
      throw std::invalid_argument("Potential1D: evaluation point outside the support");
    }
  }
  return raw(x) - raw_at_x0_;
}

double sigma_sq_1d(const CostSpec& spec, const Distribution1D& X, const Distribution1D& Y,
                   int quad_points) {
  const double x0 = X.kind() == Distribution1D::Kind::Gaussian ? X.param_a()
                                                               : X.quantile(0.5);
  const Potential1D phi(spec, X, Y, x0, false, quad_points);
  if (X.kind() == Distribution1D::Kind::Empirical) {
    std::vector<double> values(X.atoms().size());
    std::vector<double> weights(values.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] = phi(X.atoms()[k]);
      weights[k] = X.cumulative()[k] - prev;
      prev = X.cumulative()[k];
    }
    return weighted_variance(values, weights);
  }
  // Integrate in quantile space: both moments of phi under X.
  const double lo = X.kind() == Distribution1D::Kind::Gaussian ? 1e-10 : 0.0;
  const double hi = 1.0 - lo;
  const auto phi_at = [&](double u) { return phi(X.quantile(std::clamp(u, 1e-15, 1.0 - 1e-15))); };
  const double mean = integrate_doubling(phi_at, lo, hi, quad_points, 1e-9);
  const double var = integrate_doubling(
      [&](double u) {
        const double d = phi_at(u) - mean;
        return d * d;
      },
      lo, hi, quad_points, 1e-9);
  if (!std::isfinite(var)) throw NumericalError("sigma_sq_1d: divergent quadrature");
  return var;
}

}  // namespace otclt
