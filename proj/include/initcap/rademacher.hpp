#pragma once

// Monte-Carlo estimate of E_ξ sup Σ_i ξ_i f(x_i) over the Frobenius ball of
// radius r around an initialization (weights and biases jointly).

#include <vector>

#include "initcap/network.hpp"

namespace initcap {

struct RadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  int inner_restarts = 0;
  int discarded = 0;
  std::vector<double> per_trial;  ///< each is a lower bound on that trial's supremum
};

struct AscentOptions {
  int restarts = 5;
  int steps = 200;
  /// Initial step length along the normalized gradient, as a multiple of r.
  /// Steps decay as 1/√t.
  double step_scale = 0.5;
};

/// Σ_i ξ_i f(x_i) for a single-output network; `xs` has one input per row.
double signed_sum(const NetParams& p, const DenseMatrix& xs, const DenseVector& xi);

/// Uniform draw from the ball {θ : ‖θ - center‖ <= r}.
NetParams uniform_in_ball(const NetParams& center, double r, Rng& rng);

/// Projects `p` onto the ball around `center`, in place.
void project_to_ball(NetParams& p, const NetParams& center, double r);

/// Best objective found by projected gradient ascent with random restarts.
double ascent_sup(const InitSnapshot& z, double r, const DenseMatrix& xs, const DenseVector& xi,
                  const AscentOptions& opts, Rng& rng);

/// Averages ascent_sup over `trials` uniform sign vectors. Trial t uses the
/// stream rng.split(t), so results do not depend on execution order.
RadEstimate estimate(const InitSnapshot& z, double r, const DenseMatrix& xs, int trials,
                     const AscentOptions& opts, const Rng& rng);

inline constexpr Index kBruteForceMaxParams = 64;

/// Max of the objective over `samples` uniform draws from the ball.
/// Only for tiny networks (at most kBruteForceMaxParams parameters).
double brute_force_sup(const InitSnapshot& z, double r, const DenseMatrix& xs, const DenseVector& xi,
                       int samples, Rng& rng);

}  // namespace initcap
