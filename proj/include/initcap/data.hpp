#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "initcap/linalg.hpp"

namespace initcap {

enum class LabelEncoding { OneHot, SignScalar };

/// Labelled inputs. `inputs` has one sample per row with features in [0, 1].
///
/// Labels are class ids in [0, num_classes). Under SignScalar encoding there
/// are two classes and class 0 maps to target +1, class 1 to target -1.
struct Dataset {
  DenseMatrix inputs;
  std::vector<int> labels;
  int num_classes = 0;
  LabelEncoding encoding = LabelEncoding::OneHot;
  std::string provenance;

  Index size() const { return inputs.rows(); }
  int input_dim() const { return static_cast<int>(inputs.cols()); }
  /// Width of the regression target: num_classes for OneHot, 1 for SignScalar.
  int target_dim() const { return encoding == LabelEncoding::OneHot ? num_classes : 1; }

  DenseVector target(Index i) const;
  /// Targets for all samples, one per row.
  DenseMatrix targets() const;

  /// Throws ArgumentError if the invariants do not hold.
  void validate() const;
};

/// MNIST IDX pair (magic 0x803 images, 0x801 labels). Pixels scaled by 1/255.
Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset parse_mnist(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels);

/// CIFAR-10 binary batches: 3073-byte records of label + 3072 pixels.
Dataset load_cifar10(const std::vector<std::filesystem::path>& batches);
Dataset parse_cifar10(const std::vector<std::uint8_t>& batch);

/// Gaussian class clusters around means on a sphere of radius `separation`.
///
/// Points are mean + N(0, I/n), mapped into [0,1] by a per-feature affine map
/// fixed by the means, so every draw shares the same map.
class SyntheticClusters {
 public:
  SyntheticClusters(Rng& rng, int input_dim, int num_classes, double separation);

  /// Balanced draw of `m` points (class counts differ by at most one).
  Dataset draw(Rng& rng, Index m) const;

  const DenseMatrix& means() const { return means_; }

 private:
  int input_dim_;
  int num_classes_;
  double separation_;
  DenseMatrix means_;
  DenseVector offset_;
  DenseVector scale_;
};

Dataset synthetic_clusters(Rng& rng, Index m, int input_dim, int num_classes, double separation);

/// Uniform subsample without replacement.
Dataset subset(const Dataset& data, Index m, Rng& rng);

/// Keeps classes a and b, relabelled as SignScalar targets a -> +1, b -> -1.
Dataset two_class_filter(const Dataset& data, int a, int b);

/// Rows of `data` selected by `rows`, in that order.
Dataset select_rows(const Dataset& data, const std::vector<Index>& rows);

}  // namespace initcap
