#pragma once

// Plain feed-forward network: f = W_d φ(W_{d-1} φ(... φ(W_1 x + b_1) ...) + b_{d-1}) + b_d.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "initcap/linalg.hpp"

namespace initcap {

enum class Activation : std::uint8_t { ReLU = 0, Linear = 1 };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

struct NetShape {
  int input_dim = 1;
  int hidden_width = 1;
  int depth = 2;  ///< number of weight layers
  int output_dim = 1;
  Activation activation = Activation::ReLU;

  /// Throws ArgumentError unless all dims >= 1 and depth >= 2.
  void validate() const;

  /// 1-based layer index, as in W_1 .. W_d.
  int layer_rows(int layer) const { return layer == depth ? output_dim : hidden_width; }
  int layer_cols(int layer) const { return layer == 1 ? input_dim : hidden_width; }

  Index parameter_count() const;

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

/// Weights and biases; `weights[k-1]` holds W_k. Used both for trained
/// parameters (W, B) and for gradients of the same shape.
struct NetParams {
  NetShape shape;
  std::vector<DenseMatrix> weights;
  std::vector<DenseVector> biases;

  static NetParams zeros(const NetShape& shape);

  Index parameter_count() const { return shape.parameter_count(); }
  bool same_shape(const NetParams& other) const;

  /// Throws ArgumentError if any stored dimension disagrees with `shape`.
  void check_consistent() const;
  bool all_finite() const;

  NetParams& operator+=(const NetParams& o);
  NetParams& operator-=(const NetParams& o);
  NetParams& operator*=(double s);
};

NetParams operator+(NetParams a, const NetParams& b);
NetParams operator-(NetParams a, const NetParams& b);
NetParams operator*(double s, NetParams a);

/// Inner product treating all weights and biases as one flat vector.
double params_dot(const NetParams& a, const NetParams& b);
double params_norm(const NetParams& a);

/// Frozen initialization (Z, C) with cached per-layer norms.
class InitSnapshot {
 public:
  explicit InitSnapshot(NetParams params);

  const NetParams& params() const noexcept { return params_; }
  const NetShape& shape() const noexcept { return params_.shape; }
  int depth() const noexcept { return params_.shape.depth; }

  /// 1-based layer index.
  double spectral_norm(int layer) const { return spectral_[static_cast<std::size_t>(layer - 1)]; }
  double frobenius_norm(int layer) const { return frobenius_[static_cast<std::size_t>(layer - 1)]; }
  double bias_norm(int layer) const { return bias_norm_[static_cast<std::size_t>(layer - 1)]; }

 private:
  NetParams params_;
  std::vector<double> spectral_;
  std::vector<double> frobenius_;
  std::vector<double> bias_norm_;
};

/// All weights i.i.d. N(0, 1/H) (std 1/√H in every layer); all biases zero.
NetParams xavier_init(Rng& rng, const NetShape& shape);

/// φ applied elementwise; identity for Linear.
template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& v, Activation a) {
  using Plain = typename Derived::PlainObject;
  if (a == Activation::Linear) return Plain(v);
  return Plain(v.cwiseMax(typename Derived::Scalar(0)));
}

/// f^(k)(x): output of layer k before the activation; f^(0)(x) = x.
DenseVector layer_output(const NetParams& p, const DenseVector& x, int k);
DenseVector forward(const NetParams& p, const DenseVector& x);

/// Batched forward pass. `inputs` holds one sample per row; returns one output per row.
DenseMatrix forward_batch(const NetParams& p, const DenseMatrix& inputs);

/// ‖(W, B) - (Z, C)‖_F over all layers.
double distance_from_init(const NetParams& p, const NetParams& init);
double distance_from_init(const NetParams& p, const InitSnapshot& z);

// Binary checkpoint, little-endian:
//   "ICAP" | u32 version=1 | u32 n, H, d, k | u8 activation |
//   per layer: u32 rows, u32 cols, f64[rows*cols] row-major, u32 len, f64[len]
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const NetParams& p);
/// Throws FormatError naming the offending field and byte offset.
NetParams decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const NetParams& p, const std::filesystem::path& path);
NetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace initcap
