#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace otclt {

/// Weighted point cloud on R^d. Immutable once constructed: weights are
/// strictly positive and sum to 1 within 1e-9, all coordinates finite.
/// Duplicate points are allowed and never merged (merging would change n,
/// which enters the sqrt(n) scalings downstream).
class DiscreteMeasure {
 public:
  /// points is row-major n x d.
  DiscreteMeasure(std::vector<double> points, std::vector<double> weights, int dim);

  static DiscreteMeasure with_uniform_weights(std::vector<double> points, int dim);

  int size() const { return n_; }
  int dim() const { return d_; }
  std::span<const double> point(int i) const {
    return {points_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }
  double weight(int i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> points_flat() const { return points_; }

  /// Index of the lexicographically smallest point (coordinate-wise tie
  /// break, then lowest index). Used as the default anchoring site p0.
  int lexicographic_min_index() const;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  int n_ = 0;
  int d_ = 0;
};

/// Generator description for test-bed laws: axis-aligned uniform or
/// gaussian boxes, a shifted copy of another source, or resampling from a
/// CSV file. The label names the random stream; two sources sharing a
/// label draw identical underlying variates, which is how paired/coupled
/// samples are produced.
class SampleSource {
 public:
  enum class Kind { Uniform, Gaussian, Shift, File };

  static SampleSource uniform(std::vector<double> lo, std::vector<double> hi,
                              std::string label = "P");
  static SampleSource gaussian(std::vector<double> mean, std::vector<double> stddev,
                               std::string label = "P");
  static SampleSource shifted(SampleSource base, std::vector<double> offset);
  static SampleSource from_file(const std::string& path, int dim, std::string label = "P");

  /// Parses "unif:a:b[:a2:b2...]", "gauss:mu:sd[...]" or "file:<path>".
  /// Dimension is inferred from the number of parameter groups.
  static SampleSource parse(std::string_view text, std::string label, int file_dim = 1);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& param_a() const { return a_; }
  const std::vector<double>& param_b() const { return b_; }
  const std::vector<double>& offset() const { return offset_; }
  const SampleSource* base() const { return base_.get(); }
  const DiscreteMeasure* file_measure() const { return file_measure_.get(); }

  SampleSource relabeled(std::string label) const;

 private:
  SampleSource() = default;

  Kind kind_ = Kind::Uniform;
  int dim_ = 1;
  std::string label_ = "P";
  std::vector<double> a_, b_;  // per-axis lo/hi or mean/sd
  std::vector<double> offset_;
  std::shared_ptr<const SampleSource> base_;
  std::shared_ptr<const DiscreteMeasure> file_measure_;
};

/// n i.i.d. draws from src on the stream (seed, src.label, substream);
/// weights are all 1/n. Identical arguments produce bit-identical output.
DiscreteMeasure empirical_from_sample(const SampleSource& src, int n, std::uint64_t seed,
                                      std::uint64_t substream = 0);

/// CSV reader: each row holds d coordinates, optionally followed by a
/// weight column. Uniform weights when absent; explicit weights must sum
/// to 1 within 1e-6 and are renormalized to exact unit mass.
DiscreteMeasure load_csv(const std::string& path, int d);

/// Writes comma-separated rows with 17 significant digits (coordinates,
/// then the weight), losslessly reloadable by load_csv.
void write_csv(const DiscreteMeasure& measure, const std::string& path);

}  // namespace otclt
