#include "initcap/rademacher.hpp"

#include <cmath>

#include "initcap/training.hpp"

namespace initcap {

namespace {

void check_inputs(const NetParams& p, const DenseMatrix& xs, const DenseVector& xi) {
  if (p.shape.output_dim != 1) throw ArgumentError("rademacher: single-output network required");
  if (xs.cols() != p.shape.input_dim) throw ArgumentError("rademacher: input dimension mismatch");
  if (xs.rows() != xi.size() || xs.rows() < 1) throw ArgumentError("rademacher: need one sign per input");
}

NetParams gaussian_like(const NetShape& shape, Rng& rng) {
  NetParams g = NetParams::zeros(shape);
  for (auto& w : g.weights)
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  for (auto& b : g.biases)
    for (Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
  return g;
}

}  // namespace

double signed_sum(const NetParams& p, const DenseMatrix& xs, const DenseVector& xi) {
  check_inputs(p, xs, xi);
  return forward_batch(p, xs).col(0).dot(xi);
}

NetParams uniform_in_ball(const NetParams& center, double r, Rng& rng) {
  NetParams dir = gaussian_like(center.shape, rng);
  const double n = params_norm(dir);
  const double u = rng.uniform();
  const double radius = r * std::pow(u, 1.0 / static_cast<double>(center.parameter_count()));
  if (n > 0.0) dir *= radius / n;
  return center + dir;
}

void project_to_ball(NetParams& p, const NetParams& center, double r) {
  const double dist = distance_from_init(p, center);
  if (dist <= r) return;
  NetParams delta = p - center;
  delta *= r / dist;
  p = center + delta;
}

double ascent_sup(const InitSnapshot& z, double r, const DenseMatrix& xs, const DenseVector& xi,
                  const AscentOptions& opts, Rng& rng) {
  const NetParams& center = z.params();
  check_inputs(center, xs, xi);
  if (!(r >= 0.0)) throw ArgumentError("rademacher: r must be >= 0");
  if (opts.restarts < 1 || opts.steps < 0) throw ArgumentError("rademacher: bad ascent options");
  if (r == 0.0) return signed_sum(center, xs, xi);

  const DenseMatrix seeds = xi;  // output gradient of Σ ξ_i f(x_i), one row per sample
  double best = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < opts.restarts; ++restart) {
    NetParams theta = uniform_in_ball(center, r, rng);
    for (int t = 1; t <= opts.steps + 1; ++t) {
      const double value = signed_sum(theta, xs, xi);
      if (std::isfinite(value)) best = std::max(best, value);
      if (t > opts.steps) break;
      NetParams g = backprop_output_gradient(theta, xs, seeds);
      const double gn = params_norm(g);
      if (!(gn > 0.0) || !std::isfinite(gn)) break;
      g *= opts.step_scale * r / (std::sqrt(static_cast<double>(t)) * gn);
      theta += g;
      project_to_ball(theta, center, r);
    }
  }
  return best;
}

RadEstimate estimate(const InitSnapshot& z, double r, const DenseMatrix& xs, int trials,
                     const AscentOptions& opts, const Rng& rng) {
  if (trials < 1) throw ArgumentError("rademacher: trials must be >= 1");
  RadEstimate est;
  est.inner_restarts = opts.restarts;
  for (int t = 0; t < trials; ++t) {
    Rng stream = rng.split(static_cast<std::uint64_t>(t));
    DenseVector xi(xs.rows());
    for (Index i = 0; i < xi.size(); ++i) xi[i] = stream.sign();
    const double sup = ascent_sup(z, r, xs, xi, opts, stream);
    if (!std::isfinite(sup)) {
      ++est.discarded;
      continue;
    }
    est.per_trial.push_back(sup);
  }
  if (est.discarded * 10 > trials) throw EstimationError("rademacher: more than 10% of trials were non-finite");
  est.trials = static_cast<int>(est.per_trial.size());
  const Eigen::Map<const Eigen::VectorXd> v(est.per_trial.data(), static_cast<Index>(est.per_trial.size()));
  est.mean = v.mean();
  if (est.trials > 1) {
    const double var = (v.array() - est.mean).square().sum() / (est.trials - 1);
    est.std_error = std::sqrt(var / est.trials);
  }
  return est;
}

double brute_force_sup(const InitSnapshot& z, double r, const DenseMatrix& xs, const DenseVector& xi,
                       int samples, Rng& rng) {
  const NetParams& center = z.params();
  check_inputs(center, xs, xi);
  if (center.parameter_count() > kBruteForceMaxParams)
    throw ArgumentError("brute_force_sup: network too large for exhaustive sampling");
  if (samples < 1) throw ArgumentError("brute_force_sup: samples must be >= 1");
  if (!(r >= 0.0)) throw ArgumentError("brute_force_sup: r must be >= 0");
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) best = std::max(best, signed_sum(uniform_in_ball(center, r, rng), xs, xi));
  return best;
}

}  // namespace initcap
