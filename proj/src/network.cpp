#include "initcap/network.hpp"

#include <cmath>

namespace initcap {

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "linear"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu" || s == "ReLU") return Activation::ReLU;
  if (s == "linear" || s == "Linear") return Activation::Linear;
  throw ArgumentError("unknown activation '" + s + "' (expected relu or linear)");
}

void NetShape::validate() const {
  if (input_dim < 1 || hidden_width < 1 || output_dim < 1)
    throw ArgumentError("NetShape: all dimensions must be >= 1");
  if (depth < 2) throw ArgumentError("NetShape: depth must be >= 2");
  if (activation != Activation::ReLU && activation != Activation::Linear)
    throw ArgumentError("NetShape: unknown activation");
}

Index NetShape::parameter_count() const {
  Index total = 0;
  for (int k = 1; k <= depth; ++k)
    total += Index(layer_rows(k)) * layer_cols(k) + layer_rows(k);
  return total;
}

NetParams NetParams::zeros(const NetShape& shape) {
  shape.validate();
  NetParams p;
  p.shape = shape;
  for (int k = 1; k <= shape.depth; ++k) {
    p.weights.push_back(DenseMatrix::Zero(shape.layer_rows(k), shape.layer_cols(k)));
    p.biases.push_back(DenseVector::Zero(shape.layer_rows(k)));
  }
  return p;
}

bool NetParams::same_shape(const NetParams& other) const { return shape == other.shape; }

void NetParams::check_consistent() const {
  shape.validate();
  if (weights.size() != static_cast<std::size_t>(shape.depth) ||
      biases.size() != static_cast<std::size_t>(shape.depth))
    throw ArgumentError("NetParams: layer count does not match depth");
  for (int k = 1; k <= shape.depth; ++k) {
    const auto& w = weights[static_cast<std::size_t>(k - 1)];
    const auto& b = biases[static_cast<std::size_t>(k - 1)];
    if (w.rows() != shape.layer_rows(k) || w.cols() != shape.layer_cols(k) ||
        b.size() != shape.layer_rows(k))
      throw ArgumentError("NetParams: layer " + std::to_string(k) + " has wrong dimensions");
  }
}

bool NetParams::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

namespace {
void require_same(const NetParams& a, const NetParams& b, const char* what) {
  if (!a.same_shape(b)) throw ArgumentError(std::string(what) + ": shape mismatch");
}
}  // namespace

NetParams& NetParams::operator+=(const NetParams& o) {
  require_same(*this, o, "NetParams +=");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += o.weights[k];
    biases[k] += o.biases[k];
  }
  return *this;
}

NetParams& NetParams::operator-=(const NetParams& o) {
  require_same(*this, o, "NetParams -=");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] -= o.weights[k];
    biases[k] -= o.biases[k];
  }
  return *this;
}

NetParams& NetParams::operator*=(double s) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] *= s;
    biases[k] *= s;
  }
  return *this;
}

NetParams operator+(NetParams a, const NetParams& b) { return a += b; }
NetParams operator-(NetParams a, const NetParams& b) { return a -= b; }
NetParams operator*(double s, NetParams a) { return a *= s; }

double params_dot(const NetParams& a, const NetParams& b) {
  require_same(a, b, "params_dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    s += a.weights[k].cwiseProduct(b.weights[k]).sum();
    s += a.biases[k].dot(b.biases[k]);
  }
  return s;
}

double params_norm(const NetParams& a) { return std::sqrt(params_dot(a, a)); }

InitSnapshot::InitSnapshot(NetParams params) : params_(std::move(params)) {
  params_.check_consistent();
  for (int k = 1; k <= params_.shape.depth; ++k) {
    const auto& w = params_.weights[static_cast<std::size_t>(k - 1)];
    spectral_.push_back(initcap::spectral_norm(w).value);
    frobenius_.push_back(w.norm());
    bias_norm_.push_back(params_.biases[static_cast<std::size_t>(k - 1)].norm());
  }
}

NetParams xavier_init(Rng& rng, const NetShape& shape) {
  NetParams p = NetParams::zeros(shape);
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(shape.hidden_width));
  for (int k = 1; k <= shape.depth; ++k)
    p.weights[static_cast<std::size_t>(k - 1)] =
        gaussian_matrix(rng, shape.layer_rows(k), shape.layer_cols(k), std_dev);
  return p;
}

DenseVector layer_output(const NetParams& p, const DenseVector& x, int k) {
  const int d = p.shape.depth;
  if (k < 0 || k > d) throw ArgumentError("layer_output: k must be in [0, depth]");
  if (x.size() != p.shape.input_dim) throw ArgumentError("layer_output: input dimension mismatch");
  DenseVector f = x;
  for (int layer = 1; layer <= k; ++layer) {
    const auto idx = static_cast<std::size_t>(layer - 1);
    if (layer == 1)
      f = p.weights[idx] * f + p.biases[idx];
    else
      f = p.weights[idx] * activate(f, p.shape.activation) + p.biases[idx];
  }
  return f;
}

DenseVector forward(const NetParams& p, const DenseVector& x) {
  return layer_output(p, x, p.shape.depth);
}

DenseMatrix forward_batch(const NetParams& p, const DenseMatrix& inputs) {
  if (inputs.cols() != p.shape.input_dim)
    throw ArgumentError("forward_batch: input dimension mismatch");
  // Column-per-sample activations.
  Eigen::MatrixXd a = p.weights[0] * inputs.transpose();
  a.colwise() += p.biases[0];
  for (int layer = 2; layer <= p.shape.depth; ++layer) {
    const auto idx = static_cast<std::size_t>(layer - 1);
    if (p.shape.activation == Activation::ReLU) a = a.cwiseMax(0.0);
    Eigen::MatrixXd next = p.weights[idx] * a;
    next.colwise() += p.biases[idx];
    a = std::move(next);
  }
  return a.transpose();
}

double distance_from_init(const NetParams& p, const NetParams& init) {
  if (!p.same_shape(init)) throw ArgumentError("distance_from_init: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    s += (p.weights[k] - init.weights[k]).squaredNorm();
    s += (p.biases[k] - init.biases[k]).squaredNorm();
  }
  return std::sqrt(s);
}

double distance_from_init(const NetParams& p, const InitSnapshot& z) {
  return distance_from_init(p, z.params());
}

}  // namespace initcap
