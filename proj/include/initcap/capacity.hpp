#pragma once

// Measured norms and constant-explicit bound certificates around a fixed
// initialization. Every certificate here is a hard upper bound on the
// quantity it names, computed from measured ‖Z_k‖₂ and the distance r.

#include <optional>
#include <vector>

#include "initcap/data.hpp"
#include "initcap/network.hpp"

namespace initcap {

/// Π_k ‖W_k‖_F².
double l2_product(const NetParams& p);
/// Π_k ‖W_k‖₂.
double spectral_product(const NetParams& p);
/// H^{d-1} Π_k ‖W_k‖₂.
double spectral_measure(const NetParams& p);

/// Π_k (‖Z_k‖₂ + r), which dominates Π_k ‖W_k‖₂ whenever ‖(W,B)-(Z,C)‖_F <= r.
double spectral_from_distance_bound(const InitSnapshot& z, double r);
double spectral_from_distance_bound(const NetParams& p, const InitSnapshot& z);

/// Layer recursion B_0 = ‖x‖, B_k = (‖W_k - Z_k‖_F + ‖Z_k‖₂) B_{k-1} + ‖c_k‖ + r.
/// Guarantees ‖f^(k)(x)‖ <= B_k. (‖c_k‖ is zero for a Xavier snapshot.)
/// The per-layer factors depend only on (W, Z), so one certificate serves
/// any number of inputs.
class OutputBoundCert {
 public:
  OutputBoundCert(const NetParams& p, const InitSnapshot& z);

  double r() const { return r_; }
  int depth() const { return static_cast<int>(gain_.size()); }
  /// B_0 .. B_d for an input of norm `input_norm`.
  std::vector<double> chain(double input_norm) const;
  double bound(double input_norm) const { return chain(input_norm).back(); }
  /// Π_{i=l+1}^{d} (‖Z_i‖₂ + r), the downstream factor of the gradient bound.
  double downstream(int layer) const;

 private:
  double r_;
  std::vector<double> gain_;
  std::vector<double> offset_;
  std::vector<double> z_spectral_;
};

std::vector<double> output_bound_chain(const NetParams& p, const InitSnapshot& z, const DenseVector& x);
double output_bound(const NetParams& p, const InitSnapshot& z, const DenseVector& x);

/// (max_i output_bound(Z, x_i) + max_i ‖y_i‖)², dominating the mean initial squared loss.
double initial_loss_bound(const InitSnapshot& z, const Dataset& data);

/// Bound on ‖∂f_j/∂W_l‖_F for any single output coordinate j:
/// B_{l-1}(x) Π_{i=l+1}^{d} (‖Z_i‖₂ + r). Layer `l` is 1-based.
double gradient_bound(const NetParams& p, const InitSnapshot& z, const DenseVector& x, int layer);
/// Same product with B replaced by 1; bounds ‖∂f_j/∂b_l‖.
double bias_gradient_bound(const NetParams& p, const InitSnapshot& z, int layer);

/// Linear-activation Rademacher certificate:
/// R_0 = √(Σ‖x_i‖²), R_k = (r + ‖Z_k‖₂) R_{k-1} + (‖c_k‖ + r) √m. Returns R_d,
/// an upper bound on E_ξ sup_{ball} Σ_i ξ_i f(x_i). `xs` holds one input per row.
double linear_rademacher_bound(const InitSnapshot& z, double r, const DenseMatrix& xs);

struct LayerNorms {
  double frobenius;
  double spectral;
  double distance;  ///< ‖W_k - Z_k‖_F
};

struct CapacityReport {
  double r = 0.0;
  std::vector<LayerNorms> layers;
  double l2_product = 0.0;
  double spectral_product = 0.0;
  double spectral_measure = 0.0;
  double spectral_from_distance = 0.0;
  double output_bound = 0.0;                  ///< max over probe inputs
  std::vector<double> gradient_bounds;        ///< per layer, max over probe inputs
  std::optional<double> linear_rademacher;    ///< Linear nets only, over the probes
  std::optional<double> linear_rademacher_per_sample;
};

/// Full report for trained parameters `p` against snapshot `z`, using the rows
/// of `probes` as the inputs for the input-dependent certificates.
CapacityReport capacity_report(const NetParams& p, const InitSnapshot& z, const DenseMatrix& probes);

}  // namespace initcap
