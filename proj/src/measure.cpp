#include "otclt/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "otclt/rng.hpp"
#include "otclt/stats.hpp"

namespace otclt {

DiscreteMeasure::DiscreteMeasure(std::vector<double> points, std::vector<double> weights, int dim)
    : points_(std::move(points)), weights_(std::move(weights)), d_(dim) {
  if (d_ < 1) throw std::invalid_argument("measure dimension must be positive");
  if (points_.size() % static_cast<std::size_t>(d_) != 0) {
    throw std::invalid_argument("point buffer size is not a multiple of the dimension");
  }
  n_ = static_cast<int>(points_.size() / static_cast<std::size_t>(d_));
  if (n_ < 1) throw std::invalid_argument("measure needs at least one point");
  if (weights_.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("weight count does not match point count");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1 within 1e-9, got " + std::to_string(sum));
  }
  for (double x : points_) {
    if (!std::isfinite(x)) throw std::invalid_argument("coordinates must be finite");
  }
}

DiscreteMeasure DiscreteMeasure::with_uniform_weights(std::vector<double> points, int dim) {
  if (dim < 1) throw std::invalid_argument("measure dimension must be positive");
  const std::size_t n = points.size() / static_cast<std::size_t>(dim);
  std::vector<double> w(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  return DiscreteMeasure(std::move(points), std::move(w), dim);
}

int DiscreteMeasure::lexicographic_min_index() const {
  int best = 0;
  for (int i = 1; i < n_; ++i) {
    const auto a = point(i);
    const auto b = point(best);
    if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) best = i;
  }
  return best;
}

SampleSource SampleSource::uniform(std::vector<double> lo, std::vector<double> hi,
                                   std::string label) {
  if (lo.empty() || lo.size() != hi.size()) {
    throw std::invalid_argument("uniform source needs matching per-axis bounds");
  }
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (!(lo[k] < hi[k])) throw std::invalid_argument("uniform source requires a < b per axis");
  }
  SampleSource s;
  s.kind_ = Kind::Uniform;
  s.dim_ = static_cast<int>(lo.size());
  s.label_ = std::move(label);
  s.a_ = std::move(lo);
  s.b_ = std::move(hi);
  return s;
}

SampleSource SampleSource::gaussian(std::vector<double> mean, std::vector<double> stddev,
                                    std::string label) {
  if (mean.empty() || mean.size() != stddev.size()) {
    throw std::invalid_argument("gaussian source needs matching per-axis parameters");
  }
  for (double sd : stddev) {
    if (!(sd > 0.0)) throw std::invalid_argument("gaussian source requires stddev > 0");
  }
  SampleSource s;
  s.kind_ = Kind::Gaussian;
  s.dim_ = static_cast<int>(mean.size());
  s.label_ = std::move(label);
  s.a_ = std::move(mean);
  s.b_ = std::move(stddev);
  return s;
}

SampleSource SampleSource::shifted(SampleSource base, std::vector<double> offset) {
  if (static_cast<int>(offset.size()) != base.dim_) {
    throw std::invalid_argument("shift offset dimension mismatch");
  }
  SampleSource s;
  s.kind_ = Kind::Shift;
  s.dim_ = base.dim_;
  s.label_ = base.label_;  // inherits the stream, so draws stay paired
  s.offset_ = std::move(offset);
  s.base_ = std::make_shared<SampleSource>(std::move(base));
  return s;
}

SampleSource SampleSource::from_file(const std::string& path, int dim, std::string label) {
  SampleSource s;
  s.kind_ = Kind::File;
  s.dim_ = dim;
  s.label_ = std::move(label);
  s.file_measure_ = std::make_shared<DiscreteMeasure>(load_csv(path, dim));
  return s;
}

SampleSource SampleSource::relabeled(std::string label) const {
  SampleSource s = *this;
  s.label_ = std::move(label);
  return s;
}

namespace {

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(':', pos);
    const std::string_view tok =
        text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("malformed number '" + std::string(tok) +
                                  "' in generator string");
    }
    out.push_back(v);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

SampleSource SampleSource::parse(std::string_view text, std::string label, int file_dim) {
  if (text.starts_with("unif:")) {
    const auto nums = parse_numbers(text.substr(5));
    if (nums.empty() || nums.size() % 2 != 0) {
      throw std::invalid_argument("unif generator needs an even number of parameters (a:b pairs)");
    }
    std::vector<double> lo, hi;
    for (std::size_t k = 0; k < nums.size(); k += 2) {
      lo.push_back(nums[k]);
      hi.push_back(nums[k + 1]);
    }
    return uniform(std::move(lo), std::move(hi), std::move(label));
  }
  if (text.starts_with("gauss:")) {
    const auto nums = parse_numbers(text.substr(6));
    if (nums.empty() || nums.size() % 2 != 0) {
      throw std::invalid_argument("gauss generator needs an even number of parameters (mu:sd pairs)");
    }
    std::vector<double> mu, sd;
    for (std::size_t k = 0; k < nums.size(); k += 2) {
      mu.push_back(nums[k]);
      sd.push_back(nums[k + 1]);
    }
    return gaussian(std::move(mu), std::move(sd), std::move(label));
  }
  if (text.starts_with("file:")) {
    return from_file(std::string(text.substr(5)), file_dim, std::move(label));
  }
  throw std::invalid_argument("unknown generator '" + std::string(text) +
                              "'; expected unif:..., gauss:... or file:<path>");
}

namespace {

void draw_point(const SampleSource& src, RngStream& rng, double* out) {
  switch (src.kind()) {
    case SampleSource::Kind::Uniform:
      for (int k = 0; k < src.dim(); ++k) {
        out[k] = src.param_a()[k] + (src.param_b()[k] - src.param_a()[k]) * rng.uniform01();
      }
      return;
    case SampleSource::Kind::Gaussian:
      for (int k = 0; k < src.dim(); ++k) {
        out[k] = src.param_a()[k] + src.param_b()[k] * rng.normal01();
      }
      return;
    case SampleSource::Kind::Shift:
      draw_point(*src.base(), rng, out);
      for (int k = 0; k < src.dim(); ++k) out[k] += src.offset()[k];
      return;
    case SampleSource::Kind::File: {
      const DiscreteMeasure& m = *src.file_measure();
      // Inverse-CDF draw over the atom weights.
      const double u = rng.uniform01();
      double acc = 0.0;
      int idx = m.size() - 1;
      for (int i = 0; i < m.size(); ++i) {
        acc += m.weight(i);
        if (u < acc) {
          idx = i;
          break;
        }
      }
      const auto p = m.point(idx);
      std::copy(p.begin(), p.end(), out);
      return;
    }
  }
  throw std::invalid_argument("unsupported generator kind");
}

}  // namespace

DiscreteMeasure empirical_from_sample(const SampleSource& src, int n, std::uint64_t seed,
                                      std::uint64_t substream) {
  if (n < 1) throw std::invalid_argument("empirical_from_sample requires n >= 1");
  RngStream rng(seed, src.label(), substream);
  std::vector<double> pts(static_cast<std::size_t>(n) * src.dim());
  for (int i = 0; i < n; ++i) {
    draw_point(src, rng, pts.data() + static_cast<std::size_t>(i) * src.dim());
  }
  return DiscreteMeasure::with_uniform_weights(std::move(pts), src.dim());
}

namespace {

double parse_field(const std::string& field, int row, int col) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  // Tolerate surrounding spaces from hand-edited files.
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw std::invalid_argument("CSV parse error at row " + std::to_string(row) + ", column " +
                                std::to_string(col) + ": '" + field + "'");
  }
  if (!std::isfinite(v)) {
    throw std::invalid_argument("non-finite value at row " + std::to_string(row) + ", column " +
                                std::to_string(col));
  }
  return v;
}

}  // namespace

DiscreteMeasure load_csv(const std::string& path, int d) {
  if (d < 1) throw std::invalid_argument("load_csv requires d >= 1");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  std::vector<double> pts;
  std::vector<double> weights;
  bool has_weights = false;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      fields.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    const int ncol = static_cast<int>(fields.size());
    if (ncol != d && ncol != d + 1) {
      throw std::invalid_argument("row " + std::to_string(row) + " has " + std::to_string(ncol) +
                                  " columns; expected " + std::to_string(d) + " or " +
                                  std::to_string(d + 1));
    }
    if (row == 1) {
      has_weights = (ncol == d + 1);
    } else if (has_weights != (ncol == d + 1)) {
      throw std::invalid_argument("row " + std::to_string(row) +
                                  ": inconsistent weight column usage");
    }
    for (int k = 0; k < d; ++k) pts.push_back(parse_field(fields[k], row, k + 1));
    if (has_weights) weights.push_back(parse_field(fields[d], row, d + 1));
  }
  if (pts.empty()) throw std::invalid_argument("file '" + path + "' holds no data rows");
  const std::size_t n = pts.size() / static_cast<std::size_t>(d);
  if (!has_weights) {
    return DiscreteMeasure::with_uniform_weights(std::move(pts), d);
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("weight column sums to " + std::to_string(sum) +
                                "; deviation from 1 exceeds 1e-6");
  }
  // Renormalize sloppy inputs, but leave already-valid weights untouched so
  // that a write/load round trip is bit-exact.
  if (std::abs(sum - 1.0) > 1e-9) {
    for (double& w : weights) w /= sum;
  }
  (void)n;
  return DiscreteMeasure(std::move(pts), std::move(weights), d);
}

void write_csv(const DiscreteMeasure& measure, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  char buf[64];
  for (int i = 0; i < measure.size(); ++i) {
    const auto p = measure.point(i);
    for (int k = 0; k < measure.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[k]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", measure.weight(i));
    out << buf << '\n';
  }
  if (!out) throw std::invalid_argument("write failure on '" + path + "'");
}

}  // namespace otclt
