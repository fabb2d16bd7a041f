#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "initcap/network.hpp"
#include "initcap/stats.hpp"
#include "oracles.hpp"

using namespace initcap;

namespace {

NetParams random_params(Rng& rng, const NetShape& s, double scale = 1.0) {
  NetParams p = xavier_init(rng, s);
  for (auto& b : p.biases) b = gaussian_vector(rng, b.size(), 0.3 * scale);
  for (auto& w : p.weights) w *= scale;
  return p;
}

std::vector<double> as_std(const DenseVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(NetShape, Validation) {
  EXPECT_NO_THROW((NetShape{3, 4, 2, 1, Activation::ReLU}.validate()));
  EXPECT_THROW((NetShape{3, 4, 1, 1, Activation::ReLU}.validate()), ArgumentError);
  EXPECT_THROW((NetShape{0, 4, 3, 1, Activation::ReLU}.validate()), ArgumentError);
  EXPECT_THROW((NetShape{3, 0, 3, 1, Activation::ReLU}.validate()), ArgumentError);
  EXPECT_THROW((NetShape{3, 4, 3, 0, Activation::ReLU}.validate()), ArgumentError);
  EXPECT_EQ((NetShape{3, 4, 3, 2, Activation::ReLU}.parameter_count()), 3 * 4 + 4 + 4 * 4 + 4 + 4 * 2 + 2);
}

TEST(Activation, ParseAndPrint) {
  EXPECT_EQ(parse_activation("relu"), Activation::ReLU);
  EXPECT_EQ(parse_activation("linear"), Activation::Linear);
  EXPECT_EQ(parse_activation(to_string(Activation::ReLU)), Activation::ReLU);
  EXPECT_THROW(parse_activation("tanh"), ArgumentError);
}

TEST(XavierInit, LayerShapesAndZeroBiases) {
  Rng rng(1);
  const NetShape s{5, 7, 4, 3, Activation::ReLU};
  const NetParams p = xavier_init(rng, s);
  ASSERT_EQ(p.weights.size(), 4u);
  EXPECT_EQ(p.weights[0].rows(), 7);
  EXPECT_EQ(p.weights[0].cols(), 5);
  EXPECT_EQ(p.weights[1].rows(), 7);
  EXPECT_EQ(p.weights[1].cols(), 7);
  EXPECT_EQ(p.weights[3].rows(), 3);
  EXPECT_EQ(p.weights[3].cols(), 7);
  for (const auto& b : p.biases) EXPECT_TRUE((b.array() == 0.0).all());
}

TEST(XavierInit, HiddenFrobeniusNearSqrtH) {
  Rng rng(2);
  const NetParams p = xavier_init(rng, {16, 256, 4, 1, Activation::ReLU});
  for (int k = 2; k <= 3; ++k) {
    const double f = p.weights[static_cast<std::size_t>(k - 1)].norm();
    EXPECT_GE(f, 0.9 * 16.0);
    EXPECT_LE(f, 1.1 * 16.0);
  }
}

TEST(XavierInit, HiddenSpectralNearTwoAgainstOracle) {
  Rng rng(3);
  const NetParams p = xavier_init(rng, {16, 256, 4, 1, Activation::ReLU});
  for (int k = 2; k <= 3; ++k) {
    const auto& w = p.weights[static_cast<std::size_t>(k - 1)];
    const double expected = oracle::spectral_norm(w);
    EXPECT_GE(expected, 1.8);
    EXPECT_LE(expected, 2.2);
    EXPECT_NEAR(spectral_norm(w).value, expected, 1e-6 * expected);
  }
}

TEST(XavierInit, NormSlopesAcrossWidths) {
  Rng rng(4);
  std::vector<double> hs, fro, spec;
  for (int H : {64, 128, 256, 512, 1024}) {
    const NetParams p = xavier_init(rng, {8, H, 3, 1, Activation::ReLU});
    hs.push_back(H);
    fro.push_back(p.weights[1].norm());
    spec.push_back(spectral_norm(p.weights[1], 1e-8).value);
  }
  EXPECT_NEAR(fit_power_law(hs, fro).exponent, 0.5, 0.05);
  EXPECT_NEAR(fit_power_law(hs, spec).exponent, 0.0, 0.05);
}

TEST(InitSnapshot, CachesMatchRecomputation) {
  Rng rng(5);
  const NetParams p = random_params(rng, {6, 12, 3, 2, Activation::ReLU});
  const InitSnapshot z(p);
  for (int k = 1; k <= 3; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    EXPECT_NEAR(z.frobenius_norm(k), p.weights[i].norm(), 1e-12);
    EXPECT_NEAR(z.spectral_norm(k), spectral_norm(p.weights[i]).value, 1e-12);
    EXPECT_NEAR(z.bias_norm(k), p.biases[i].norm(), 1e-12);
  }
}

TEST(Forward, ZeroWeightsGiveOutputBias) {
  NetParams p = NetParams::zeros({4, 5, 3, 3, Activation::ReLU});
  p.biases.back() << 1, 2, 3;
  const DenseVector x = DenseVector::Constant(4, 0.7);
  EXPECT_EQ(forward(p, x), p.biases.back());
}

TEST(Forward, LinearCollapse) {
  Rng rng(6);
  const NetParams p = random_params(rng, {4, 4, 2, 4, Activation::Linear});
  const DenseVector x = gaussian_vector(rng, 4);
  const DenseVector expected = p.weights[1] * p.weights[0] * x + p.weights[1] * p.biases[0] + p.biases[1];
  EXPECT_LE((forward(p, x) - expected).norm(), 1e-12);
}

TEST(Forward, MatchesLoopOracle) {
  Rng rng(7);
  for (Activation a : {Activation::ReLU, Activation::Linear}) {
    const NetParams p = random_params(rng, {5, 9, 4, 3, a});
    for (int t = 0; t < 20; ++t) {
      const DenseVector x = gaussian_vector(rng, 5);
      const auto got = as_std(forward(p, x));
      const auto want = oracle::forward(p, as_std(x));
      for (std::size_t j = 0; j < got.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
    }
  }
}

TEST(Forward, DimensionMismatchThrows) {
  Rng rng(8);
  const NetParams p = xavier_init(rng, {3, 4, 2, 1, Activation::ReLU});
  EXPECT_THROW(forward(p, DenseVector::Zero(4)), ArgumentError);
}

TEST(ForwardBatch, RowsMatchSingleForward) {
  Rng rng(9);
  const NetParams p = random_params(rng, {5, 8, 3, 2, Activation::ReLU});
  const DenseMatrix xs = gaussian_matrix(rng, 7, 5, 1.0);
  const DenseMatrix out = forward_batch(p, xs);
  ASSERT_EQ(out.rows(), 7);
  ASSERT_EQ(out.cols(), 2);
  for (Index i = 0; i < 7; ++i)
    EXPECT_LE((out.row(i).transpose() - forward(p, xs.row(i).transpose())).norm(), 1e-12);
}

TEST(LayerOutput, EndpointsAndFirstLayer) {
  Rng rng(10);
  const NetParams p = random_params(rng, {3, 6, 4, 2, Activation::ReLU});
  const DenseVector x = gaussian_vector(rng, 3);
  EXPECT_EQ(layer_output(p, x, 0), x);
  const DenseVector fd = layer_output(p, x, 4), f = forward(p, x);
  EXPECT_EQ(0, std::memcmp(fd.data(), f.data(), sizeof(double) * 2));
  EXPECT_LE((layer_output(p, x, 1) - (p.weights[0] * x + p.biases[0])).norm(), 1e-14);
  EXPECT_THROW(layer_output(p, x, 5), ArgumentError);
  EXPECT_THROW(layer_output(p, x, -1), ArgumentError);
}

TEST(Activation, ReluIsNormContracting) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const DenseVector v = gaussian_vector(rng, 13);
    EXPECT_LE(activate(v, Activation::ReLU).norm(), v.norm());
  }
}

TEST(DistanceFromInit, Examples) {
  Rng rng(12);
  const NetParams z = xavier_init(rng, {3, 4, 3, 2, Activation::ReLU});
  const InitSnapshot snap(z);
  EXPECT_EQ(distance_from_init(z, snap), 0.0);

  NetParams p = z;
  p.biases[1](2) += 3.0;
  EXPECT_NEAR(distance_from_init(p, snap), 3.0, 1e-15);

  p = z;
  DenseMatrix dw = gaussian_matrix(rng, 4, 3, 1.0);
  dw *= 3.0 / dw.norm();
  DenseVector db = gaussian_vector(rng, 4);
  db *= 4.0 / db.norm();
  p.weights[0] += dw;
  p.biases[1] += db;
  EXPECT_NEAR(distance_from_init(p, snap), 5.0, 1e-12);
}

TEST(DistanceFromInit, ShapeMismatchThrows) {
  Rng rng(13);
  const NetParams a = xavier_init(rng, {3, 4, 3, 2, Activation::ReLU});
  const NetParams b = xavier_init(rng, {3, 5, 3, 2, Activation::ReLU});
  EXPECT_THROW(distance_from_init(a, b), ArgumentError);
}

TEST(DistanceFromInit, IsAMetric) {
  Rng rng(14);
  const NetShape s{4, 6, 3, 2, Activation::ReLU};
  for (int t = 0; t < 50; ++t) {
    const NetParams a = random_params(rng, s), b = random_params(rng, s), c = random_params(rng, s);
    const double ab = distance_from_init(a, b), ba = distance_from_init(b, a);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_LE(distance_from_init(a, c), ab + distance_from_init(b, c) + 1e-9);
  }
}

TEST(NetParams, ArithmeticAndDot) {
  Rng rng(15);
  const NetShape s{3, 4, 3, 2, Activation::ReLU};
  const NetParams a = random_params(rng, s), b = random_params(rng, s);
  const NetParams c = a + 2.0 * b - b;
  EXPECT_NEAR(distance_from_init(c, a + b), 0.0, 1e-12);
  EXPECT_NEAR(params_norm(a) * params_norm(a), params_dot(a, a), 1e-10);
  EXPECT_NEAR(distance_from_init(a, b), params_norm(a - b), 1e-12);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(16);
  for (Activation act : {Activation::ReLU, Activation::Linear}) {
    const NetParams p = random_params(rng, {5, 7, 4, 3, act});
    const auto bytes = encode_checkpoint(p);
    const NetParams q = decode_checkpoint(bytes);
    EXPECT_EQ(q.shape, p.shape);
    EXPECT_EQ(encode_checkpoint(q), bytes);
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      EXPECT_EQ(0, std::memcmp(p.weights[k].data(), q.weights[k].data(),
                               sizeof(double) * static_cast<std::size_t>(p.weights[k].size())));
      EXPECT_EQ(p.biases[k], q.biases[k]);
    }
  }
}

TEST(Checkpoint, FileRoundTrip) {
  Rng rng(17);
  const NetParams p = random_params(rng, {3, 4, 2, 1, Activation::ReLU});
  const auto path = std::filesystem::temp_directory_path() / "initcap_ckpt_roundtrip.icap";
  save_checkpoint(p, path);
  const NetParams q = load_checkpoint(path);
  EXPECT_EQ(encode_checkpoint(q), encode_checkpoint(p));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), IoError);
}

TEST(Checkpoint, LayoutMatchesDocumentedFormat) {
  NetParams p = NetParams::zeros({2, 3, 2, 1, Activation::Linear});
  p.weights[0](0, 1) = 1.5;
  const auto b = encode_checkpoint(p);
  ASSERT_GE(b.size(), 25u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "ICAP");
  auto u32 = [&](std::size_t off) {
    return std::uint32_t(b[off]) | std::uint32_t(b[off + 1]) << 8 | std::uint32_t(b[off + 2]) << 16 |
           std::uint32_t(b[off + 3]) << 24;
  };
  EXPECT_EQ(u32(4), 1u);
  EXPECT_EQ(u32(8), 2u);
  EXPECT_EQ(u32(12), 3u);
  EXPECT_EQ(u32(16), 2u);
  EXPECT_EQ(u32(20), 1u);
  EXPECT_EQ(b[24], 1);
  EXPECT_EQ(u32(25), 3u);
  EXPECT_EQ(u32(29), 2u);
  double w01;
  std::memcpy(&w01, &b[33 + 8], 8);
  EXPECT_EQ(w01, 1.5);
  // header 25 + layer1 (8 + 48 + 4 + 24) + layer2 (8 + 24 + 4 + 8)
  EXPECT_EQ(b.size(), 25u + 84u + 44u);
}

TEST(Checkpoint, CorruptionsAreFormatErrors) {
  Rng rng(18);
  const auto good = encode_checkpoint(random_params(rng, {3, 4, 3, 2, Activation::ReLU}));
  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = std::vector<std::uint8_t>(good.begin(), good.end() - 3);
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = good;
  bad[24] = 7;
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  try {
    bad = good;
    bad[0] = 'X';
    decode_checkpoint(bad);
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}
