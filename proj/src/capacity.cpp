#include "initcap/capacity.hpp"

#include <algorithm>
#include <cmath>

namespace initcap {

namespace {
void require_match(const NetParams& p, const InitSnapshot& z, const char* what) {
  if (!p.same_shape(z.params())) throw ArgumentError(std::string(what) + ": shape mismatch");
}
}  // namespace

double l2_product(const NetParams& p) {
  double prod = 1.0;
  for (const auto& w : p.weights) prod *= w.squaredNorm();
  return prod;
}

double spectral_product(const NetParams& p) {
  double prod = 1.0;
  for (const auto& w : p.weights) prod *= spectral_norm(w).value;
  return prod;
}

double spectral_measure(const NetParams& p) {
  return std::pow(static_cast<double>(p.shape.hidden_width), p.shape.depth - 1) * spectral_product(p);
}

double spectral_from_distance_bound(const InitSnapshot& z, double r) {
  if (!(r >= 0.0)) throw ArgumentError("spectral_from_distance_bound: r must be >= 0");
  double prod = 1.0;
  for (int k = 1; k <= z.depth(); ++k) prod *= z.spectral_norm(k) + r;
  return prod;
}

double spectral_from_distance_bound(const NetParams& p, const InitSnapshot& z) {
  require_match(p, z, "spectral_from_distance_bound");
  return spectral_from_distance_bound(z, distance_from_init(p, z));
}

OutputBoundCert::OutputBoundCert(const NetParams& p, const InitSnapshot& z) {
  require_match(p, z, "output_bound");
  r_ = distance_from_init(p, z);
  for (int k = 1; k <= p.shape.depth; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    const double moved = (p.weights[i] - z.params().weights[i]).norm();
    gain_.push_back(moved + z.spectral_norm(k));
    offset_.push_back(z.bias_norm(k) + r_);
    z_spectral_.push_back(z.spectral_norm(k));
  }
}

std::vector<double> OutputBoundCert::chain(double input_norm) const {
  std::vector<double> b{input_norm};
  for (std::size_t k = 0; k < gain_.size(); ++k) b.push_back(gain_[k] * b.back() + offset_[k]);
  return b;
}

double OutputBoundCert::downstream(int layer) const {
  if (layer < 1 || layer > depth()) throw ArgumentError("gradient_bound: layer out of range");
  double prod = 1.0;
  for (std::size_t j = static_cast<std::size_t>(layer); j < z_spectral_.size(); ++j) prod *= z_spectral_[j] + r_;
  return prod;
}

std::vector<double> output_bound_chain(const NetParams& p, const InitSnapshot& z, const DenseVector& x) {
  if (x.size() != p.shape.input_dim) throw ArgumentError("output_bound: input dimension mismatch");
  return OutputBoundCert(p, z).chain(x.norm());
}

double output_bound(const NetParams& p, const InitSnapshot& z, const DenseVector& x) {
  return output_bound_chain(p, z, x).back();
}

double initial_loss_bound(const InitSnapshot& z, const Dataset& data) {
  data.validate();
  if (data.input_dim() != z.shape().input_dim) throw ArgumentError("initial_loss_bound: input dimension mismatch");
  const OutputBoundCert cert(z.params(), z);
  const double max_out = cert.bound(data.inputs.rowwise().norm().maxCoeff());
  double max_target = 0.0;
  for (Index i = 0; i < data.size(); ++i) max_target = std::max(max_target, data.target(i).norm());
  const double b = max_out + max_target;
  return b * b;
}

double gradient_bound(const NetParams& p, const InitSnapshot& z, const DenseVector& x, int layer) {
  if (layer < 1 || layer > p.shape.depth) throw ArgumentError("gradient_bound: layer out of range");
  if (x.size() != p.shape.input_dim) throw ArgumentError("gradient_bound: input dimension mismatch");
  const OutputBoundCert cert(p, z);
  return cert.chain(x.norm())[static_cast<std::size_t>(layer - 1)] * cert.downstream(layer);
}

double bias_gradient_bound(const NetParams& p, const InitSnapshot& z, int layer) {
  if (layer < 1 || layer > p.shape.depth) throw ArgumentError("bias_gradient_bound: layer out of range");
  return OutputBoundCert(p, z).downstream(layer);
}

double linear_rademacher_bound(const InitSnapshot& z, double r, const DenseMatrix& xs) {
  if (z.shape().activation != Activation::Linear)
    throw ArgumentError("linear_rademacher_bound: requires Linear activation");
  if (!(r >= 0.0)) throw ArgumentError("linear_rademacher_bound: r must be >= 0");
  if (xs.rows() < 1) throw ArgumentError("linear_rademacher_bound: need at least one input");
  if (xs.cols() != z.shape().input_dim) throw ArgumentError("linear_rademacher_bound: input dimension mismatch");
  const double sqrt_m = std::sqrt(static_cast<double>(xs.rows()));
  double bound = xs.norm();  // √(Σ‖x_i‖²)
  for (int k = 1; k <= z.depth(); ++k) bound = (r + z.spectral_norm(k)) * bound + (z.bias_norm(k) + r) * sqrt_m;
  return bound;
}

CapacityReport capacity_report(const NetParams& p, const InitSnapshot& z, const DenseMatrix& probes) {
  require_match(p, z, "capacity_report");
  CapacityReport rep;
  rep.r = distance_from_init(p, z);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const auto& w = p.weights[i];
    rep.layers.push_back({w.norm(), spectral_norm(w).value, (w - z.params().weights[i]).norm()});
  }
  rep.l2_product = 1.0;
  rep.spectral_product = 1.0;
  for (const auto& l : rep.layers) {
    rep.l2_product *= l.frobenius * l.frobenius;
    rep.spectral_product *= l.spectral;
  }
  rep.spectral_measure =
      std::pow(static_cast<double>(p.shape.hidden_width), p.shape.depth - 1) * rep.spectral_product;
  rep.spectral_from_distance = spectral_from_distance_bound(z, rep.r);

  // Every certificate is increasing in ‖x‖, so the largest probe norm gives the max.
  rep.gradient_bounds.assign(static_cast<std::size_t>(p.shape.depth), 0.0);
  if (probes.rows() > 0) {
    if (probes.cols() != p.shape.input_dim) throw ArgumentError("capacity_report: probe dimension mismatch");
    const OutputBoundCert cert(p, z);
    const auto chain = cert.chain(probes.rowwise().norm().maxCoeff());
    rep.output_bound = chain.back();
    for (int l = 1; l <= p.shape.depth; ++l)
      rep.gradient_bounds[static_cast<std::size_t>(l - 1)] = chain[static_cast<std::size_t>(l - 1)] * cert.downstream(l);
  }
  if (p.shape.activation == Activation::Linear && probes.rows() > 0) {
    rep.linear_rademacher = linear_rademacher_bound(z, rep.r, probes);
    rep.linear_rademacher_per_sample = *rep.linear_rademacher / static_cast<double>(probes.rows());
  }
  return rep;
}

}  // namespace initcap
