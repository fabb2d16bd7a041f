#include <gtest/gtest.h>

#include <cmath>

#include "initcap/capacity.hpp"
#include "initcap/stats.hpp"
#include "initcap/training.hpp"
#include "oracles.hpp"

using namespace initcap;

namespace {

// Moves every parameter of z by a random direction scaled to total norm r.
NetParams perturb(const NetParams& z, double r, Rng& rng) {
  NetParams d = NetParams::zeros(z.shape);
  for (auto& w : d.weights) w = gaussian_matrix(rng, w.rows(), w.cols(), 1.0);
  for (auto& b : d.biases) b = gaussian_vector(rng, b.size());
  d *= r / params_norm(d);
  return z + d;
}

DenseMatrix unit_cube(Rng& rng, Index m, int n) {
  DenseMatrix xs(m, n);
  for (Index i = 0; i < xs.size(); ++i) xs.data()[i] = rng.uniform();
  return xs;
}

}  // namespace

TEST(NormProducts, SmallExamples) {
  NetParams p = NetParams::zeros({2, 2, 2, 2, Activation::ReLU});
  p.weights[0] = 2.0 * DenseMatrix::Identity(2, 2);
  p.weights[1] = 3.0 * DenseMatrix::Identity(2, 2);
  EXPECT_NEAR(spectral_product(p), 6.0, 1e-9);
  EXPECT_NEAR(spectral_measure(p), 12.0, 1e-9);
  EXPECT_NEAR(l2_product(p), 8.0 * 18.0, 1e-9);

  NetParams q = NetParams::zeros({1, 1, 3, 1, Activation::ReLU});
  q.weights[0](0, 0) = 2;
  q.weights[1](0, 0) = 3;
  q.weights[2](0, 0) = 1;
  EXPECT_DOUBLE_EQ(l2_product(q), 36.0);

  NetParams u = NetParams::zeros({2, 2, 2, 2, Activation::ReLU});
  u.weights[0](0, 0) = 1.0;
  u.weights[1](1, 0) = 1.0;
  EXPECT_DOUBLE_EQ(l2_product(u), 1.0);
}

TEST(NormProducts, InitScalingSlopes) {
  Rng rng(1);
  std::vector<double> hs, l2, sm, sp;
  for (int H : {64, 128, 256, 512, 1024}) {
    double a = 0, b = 0, c = 0;
    const int reps = 3;
    for (int r = 0; r < reps; ++r) {
      const NetParams z = xavier_init(rng, {8, H, 4, 1, Activation::ReLU});
      a += std::log(l2_product(z));
      b += std::log(spectral_measure(z));
      c += std::log(spectral_product(z));
    }
    hs.push_back(H);
    l2.push_back(std::exp(a / reps));
    sm.push_back(std::exp(b / reps));
    sp.push_back(std::exp(c / reps));
  }
  EXPECT_NEAR(fit_power_law(hs, l2).exponent, 2.0, 0.2);
  EXPECT_NEAR(fit_power_law(hs, sm).exponent, 3.0, 0.2);
  EXPECT_NEAR(fit_power_law(hs, sp).exponent, 0.0, 0.1);
}

TEST(SpectralFromDistance, EqualityAtInit) {
  Rng rng(2);
  const NetParams z = xavier_init(rng, {5, 12, 3, 2, Activation::ReLU});
  const InitSnapshot snap(z);
  EXPECT_NEAR(spectral_from_distance_bound(z, snap), spectral_product(z), 1e-12 * spectral_product(z));
}

TEST(SpectralFromDistance, DominatesSampledPerturbations) {
  NetParams z = NetParams::zeros({2, 2, 2, 2, Activation::ReLU});
  z.weights[0] = DenseMatrix::Identity(2, 2);
  z.weights[1] = DenseMatrix::Identity(2, 2);
  const InitSnapshot snap(z);
  EXPECT_NEAR(spectral_from_distance_bound(snap, 0.5), 2.25, 1e-12);
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const NetParams p = perturb(z, 0.5 * rng.uniform(), rng);
    EXPECT_LE(spectral_product(p), 2.25 + 1e-9);
    EXPECT_LE(spectral_product(p), spectral_from_distance_bound(p, snap) * (1 + 1e-9));
  }
}

TEST(SpectralFromDistance, RejectsNegativeRadius) {
  Rng rng(4);
  const InitSnapshot snap(xavier_init(rng, {2, 3, 2, 1, Activation::ReLU}));
  EXPECT_THROW(spectral_from_distance_bound(snap, -1.0), ArgumentError);
}

TEST(OutputBound, LinearAtInitIsProductOfSpectralNorms) {
  Rng rng(5);
  const NetParams z = xavier_init(rng, {4, 6, 2, 1, Activation::Linear});
  const InitSnapshot snap(z);
  const DenseVector x = gaussian_vector(rng, 4);
  const double b = output_bound(z, snap, x);
  EXPECT_NEAR(b, snap.spectral_norm(1) * snap.spectral_norm(2) * x.norm(), 1e-12 * b);
  EXPECT_LE(std::abs(forward(z, x)(0)), b);
}

TEST(OutputBound, ZeroInputZeroRadius) {
  Rng rng(6);
  const NetParams z = xavier_init(rng, {4, 6, 3, 1, Activation::ReLU});
  const InitSnapshot snap(z);
  const DenseVector x = DenseVector::Zero(4);
  EXPECT_EQ(output_bound(z, snap, x), 0.0);
  EXPECT_EQ(forward(z, x)(0), 0.0);
}

TEST(OutputBound, DominatesEveryLayerOnRandomNets) {
  Rng rng(7);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const int H = 2 + static_cast<int>(rng.uniform_index(127));
    const int d = 2 + static_cast<int>(rng.uniform_index(4));
    const Activation act = t % 4 == 0 ? Activation::Linear : Activation::ReLU;
    const NetShape s{1 + static_cast<int>(rng.uniform_index(10)), H, d, 1 + static_cast<int>(rng.uniform_index(3)), act};
    const NetParams z = xavier_init(rng, s);
    const InitSnapshot snap(z);
    const NetParams p = perturb(z, 3.0 * rng.uniform(), rng);
    const DenseVector x = 2.0 * gaussian_vector(rng, s.input_dim);
    const auto chain = output_bound_chain(p, snap, x);
    ASSERT_EQ(chain.size(), static_cast<std::size_t>(d + 1));
    for (int k = 0; k <= d; ++k) {
      EXPECT_LE(layer_output(p, x, k).norm(), chain[static_cast<std::size_t>(k)] * (1 + 1e-9));
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Certificates, MonotoneInRadius) {
  Rng rng(8);
  const InitSnapshot relu(xavier_init(rng, {3, 8, 3, 1, Activation::ReLU}));
  const InitSnapshot lin(xavier_init(rng, {3, 8, 3, 1, Activation::Linear}));
  const DenseMatrix xs = unit_cube(rng, 5, 3);
  double prev_lin = 0.0, prev_sfd = 0.0;
  for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double sfd = spectral_from_distance_bound(relu, r);
    const double lb = linear_rademacher_bound(lin, r, xs);
    EXPECT_GE(sfd, prev_sfd);
    EXPECT_GE(lb, prev_lin);
    prev_sfd = sfd;
    prev_lin = lb;
  }
}

TEST(GradientBound, DominatesAutodiffOnRandomTriples) {
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const int H = 2 + static_cast<int>(rng.uniform_index(40));
    const int d = 2 + static_cast<int>(rng.uniform_index(3));
    const NetShape s{1 + static_cast<int>(rng.uniform_index(6)), H, d, 1, Activation::ReLU};
    const NetParams z = xavier_init(rng, s);
    const InitSnapshot snap(z);
    const NetParams p = perturb(z, 2.0 * rng.uniform(), rng);
    const DenseVector x = gaussian_vector(rng, s.input_dim);
    const NetParams g = backprop_output_gradient(p, x.transpose(), DenseMatrix::Ones(1, 1));
    const int l = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(d)));
    const auto li = static_cast<std::size_t>(l - 1);
    EXPECT_LE(g.weights[li].norm(), gradient_bound(p, snap, x, l) * (1 + 1e-9));
    EXPECT_LE(g.biases[li].norm(), bias_gradient_bound(p, snap, l) * (1 + 1e-9));
  }
}

TEST(GradientBound, LastLayerIsPreviousChainValue) {
  Rng rng(10);
  const NetParams z = xavier_init(rng, {4, 10, 3, 1, Activation::ReLU});
  const InitSnapshot snap(z);
  const NetParams p = perturb(z, 0.7, rng);
  const DenseVector x = gaussian_vector(rng, 4);
  const auto chain = output_bound_chain(p, snap, x);
  EXPECT_DOUBLE_EQ(gradient_bound(p, snap, x, 3), chain[2]);
  const NetParams g = backprop_output_gradient(p, x.transpose(), DenseMatrix::Ones(1, 1));
  EXPECT_NEAR(g.weights[2].norm(), activate(layer_output(p, x, 2), Activation::ReLU).norm(), 1e-12);
}

TEST(GradientBound, ZeroInputGivesZeroForDeeperLayers) {
  Rng rng(11);
  const NetParams z = xavier_init(rng, {4, 10, 3, 1, Activation::ReLU});
  const InitSnapshot snap(z);
  const DenseVector x = DenseVector::Zero(4);
  for (int l = 2; l <= 3; ++l) EXPECT_EQ(gradient_bound(z, snap, x, l), 0.0);
  const NetParams g = backprop_output_gradient(z, x.transpose(), DenseMatrix::Ones(1, 1));
  for (std::size_t l = 1; l < 3; ++l) EXPECT_EQ(g.weights[l].norm(), 0.0);
  EXPECT_THROW(gradient_bound(z, snap, x, 0), ArgumentError);
  EXPECT_THROW(gradient_bound(z, snap, x, 4), ArgumentError);
}

TEST(InitialLossBound, ZeroInitAndDominance) {
  const NetParams z = NetParams::zeros({3, 4, 3, 2, Activation::ReLU});
  const InitSnapshot snap(z);
  Rng rng(12);
  Dataset d;
  d.inputs = unit_cube(rng, 20, 3);
  d.num_classes = 2;
  for (int i = 0; i < 20; ++i) d.labels.push_back(i % 2);
  const double b = initial_loss_bound(snap, d);
  EXPECT_GE(b, 1.0);
  EXPECT_LE(evaluate(z, d, LossKind::Squared).loss, b);
}

TEST(InitialLossBound, RoughlyWidthIndependent) {
  Rng rng(13);
  Dataset d;
  d.inputs = unit_cube(rng, 50, 10);
  d.num_classes = 10;
  for (int i = 0; i < 50; ++i) d.labels.push_back(i % 10);
  std::vector<double> bounds;
  for (int H : {64, 128, 256, 512, 1024}) {
    const InitSnapshot snap(xavier_init(rng, {10, H, 4, 10, Activation::ReLU}));
    const double b = initial_loss_bound(snap, d);
    EXPECT_LE(evaluate(snap.params(), d, LossKind::Squared).loss, b);
    bounds.push_back(b);
  }
  EXPECT_LT(*std::max_element(bounds.begin(), bounds.end()) / *std::min_element(bounds.begin(), bounds.end()), 2.0);
}

TEST(LinearRademacherBound, RadiusZeroIsProductTimesRootSum) {
  Rng rng(14);
  const InitSnapshot snap(xavier_init(rng, {4, 8, 3, 1, Activation::Linear}));
  const DenseMatrix xs = unit_cube(rng, 6, 4);
  double prod = 1.0;
  for (int k = 1; k <= 3; ++k) prod *= snap.spectral_norm(k);
  EXPECT_NEAR(linear_rademacher_bound(snap, 0.0, xs), prod * xs.norm(), 1e-12);
}

TEST(LinearRademacherBound, LeadingTermDegreeIsDepth) {
  Rng rng(15);
  const int d = 3;
  const InitSnapshot snap(xavier_init(rng, {4, 8, d, 1, Activation::Linear}));
  const DenseMatrix xs = unit_cube(rng, 6, 4);
  const std::vector<double> rs = {1e3, 1e4, 1e5, 1e6};
  std::vector<double> bs;
  for (double r : rs) bs.push_back(linear_rademacher_bound(snap, r, xs));
  EXPECT_NEAR(fit_power_law(rs, bs).exponent, d, 0.01);
}

TEST(LinearRademacherBound, Preconditions) {
  Rng rng(16);
  const InitSnapshot relu(xavier_init(rng, {4, 8, 3, 1, Activation::ReLU}));
  const InitSnapshot lin(xavier_init(rng, {4, 8, 3, 1, Activation::Linear}));
  const DenseMatrix xs = unit_cube(rng, 3, 4);
  EXPECT_THROW(linear_rademacher_bound(relu, 1.0, xs), ArgumentError);
  EXPECT_THROW(linear_rademacher_bound(lin, -1.0, xs), ArgumentError);
  EXPECT_THROW(linear_rademacher_bound(lin, 1.0, DenseMatrix(0, 4)), ArgumentError);
  EXPECT_THROW(linear_rademacher_bound(lin, 1.0, unit_cube(rng, 3, 5)), ArgumentError);
}

TEST(LinearRademacherBound, WidthIndependentAtFixedRadius) {
  Rng rng(17);
  const DenseMatrix xs = unit_cube(rng, 16, 8);
  std::vector<double> ob, lb;
  for (int H : {64, 128, 256, 512, 1024}) {
    const NetParams z = xavier_init(rng, {8, H, 3, 1, Activation::Linear});
    const InitSnapshot snap(z);
    lb.push_back(linear_rademacher_bound(snap, 1.0, xs));
    ob.push_back(output_bound(perturb(z, 1.0, rng), snap, xs.row(0).transpose()));
  }
  for (const auto* v : {&ob, &lb})
    EXPECT_LT(*std::max_element(v->begin(), v->end()) / *std::min_element(v->begin(), v->end()), 2.0);
}

TEST(CapacityReport, ConsistentWithIndividualFunctions) {
  Rng rng(18);
  const NetParams z = xavier_init(rng, {5, 12, 3, 2, Activation::ReLU});
  const InitSnapshot snap(z);
  const NetParams p = perturb(z, 1.3, rng);
  const DenseMatrix probes = unit_cube(rng, 9, 5);
  const CapacityReport rep = capacity_report(p, snap, probes);
  EXPECT_NEAR(rep.r, 1.3, 1e-12);
  EXPECT_NEAR(rep.l2_product, l2_product(p), 1e-9 * rep.l2_product);
  EXPECT_NEAR(rep.spectral_product, spectral_product(p), 1e-12 * rep.spectral_product);
  EXPECT_NEAR(rep.spectral_measure, spectral_measure(p), 1e-12 * rep.spectral_measure);
  EXPECT_LE(rep.spectral_product, rep.spectral_from_distance);
  double ob = 0.0;
  for (Index i = 0; i < probes.rows(); ++i) ob = std::max(ob, output_bound(p, snap, probes.row(i).transpose()));
  EXPECT_NEAR(rep.output_bound, ob, 1e-12 * ob);
  ASSERT_EQ(rep.layers.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(rep.layers[k].distance, (p.weights[k] - z.weights[k]).norm(), 1e-12);
  EXPECT_FALSE(rep.linear_rademacher.has_value());
}

TEST(CapacityReport, LinearNetsCarryRademacherCertificate) {
  Rng rng(19);
  const NetParams z = xavier_init(rng, {5, 12, 3, 1, Activation::Linear});
  const InitSnapshot snap(z);
  const NetParams p = perturb(z, 0.4, rng);
  const DenseMatrix probes = unit_cube(rng, 8, 5);
  const CapacityReport rep = capacity_report(p, snap, probes);
  ASSERT_TRUE(rep.linear_rademacher.has_value());
  EXPECT_NEAR(*rep.linear_rademacher, linear_rademacher_bound(snap, rep.r, probes), 1e-12);
  EXPECT_NEAR(*rep.linear_rademacher_per_sample, *rep.linear_rademacher / 8.0, 1e-15);
}
