#pragma once

#include <string>
#include <variant>
#include <vector>

#include "initcap/data.hpp"
#include "initcap/network.hpp"

namespace initcap {

enum class LossKind { Squared, CrossEntropy };

std::string to_string(LossKind k);
LossKind parse_loss(const std::string& s);

/// (1/k) Σ_j (f_j - y_j)².
double squared_loss(const DenseVector& output, const DenseVector& onehot);
/// Softmax cross entropy, evaluated with max-subtraction.
double cross_entropy_loss(const DenseVector& logits, int label);

// Stopping criteria ---------------------------------------------------------

struct LossBelow {
  double threshold;
};
struct LossFractionOfInitial {
  double fraction;
};
/// At least `fraction` of training points have (true logit) - (max other logit) >= margin.
struct MarginSatisfied {
  double margin;
  double fraction = 0.99;
};
struct EpochLimit {};

using StopRule = std::variant<LossBelow, LossFractionOfInitial, MarginSatisfied, EpochLimit>;

void validate(const StopRule& rule);
/// Compact textual form: "loss<0.001", "fraction:0.1", "margin:10@0.99", "epochs".
std::string to_string(const StopRule& rule);
StopRule parse_stop_rule(const std::string& s);

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
  int batch_size = 64;
  int max_epochs = 2000;
  StopRule stop = LossFractionOfInitial{0.1};
  LossKind loss = LossKind::Squared;
  std::uint64_t seed = 0;

  void validate() const;
};

// Loss at or above this is treated as divergence.
inline constexpr double kDivergenceLoss = 1e6;

enum class TrainStatus { Converged, EpochLimitHit, Diverged };
std::string to_string(TrainStatus s);

struct EpochRecord {
  int epoch;  ///< 0 is the untrained network
  double train_loss;
  double train_error;
  double distance_from_init;
  double wall_time_s;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  TrainStatus status = TrainStatus::EpochLimitHit;

  double initial_loss() const { return epochs.front().train_loss; }
  const EpochRecord& final() const { return epochs.back(); }
};

/// Mini-batch of samples, one per row, with regression targets and class ids.
struct Batch {
  DenseMatrix inputs;
  DenseMatrix targets;
  std::vector<int> labels;
};

Batch make_batch(const Dataset& data, const std::vector<Index>& rows);
Batch full_batch(const Dataset& data);

struct Gradient {
  double loss = 0.0;  ///< mean batch loss
  NetParams grad;
};

/// Σ_i J_i^T g_i: parameter gradient of Σ_i g_i · f(x_i), where `output_grads`
/// holds one row g_i per sample. ReLU'(0) is taken as 0.
NetParams backprop_output_gradient(const NetParams& p, const DenseMatrix& inputs,
                                   const DenseMatrix& output_grads);

/// Exact gradient of the mean batch loss.
Gradient backprop(const NetParams& p, const Batch& batch, LossKind loss);

struct Evaluation {
  double loss;
  double error;            ///< misclassified fraction
  double margin_fraction;  ///< fraction meeting the margin (0 unless requested)
};

/// Loss and error over a whole dataset; margin fraction is computed when `margin` > 0.
Evaluation evaluate(const NetParams& p, const Dataset& data, LossKind loss, double margin = 0.0);

/// Per-sample margins: true-class output minus best other output.
std::vector<double> margins(const NetParams& p, const Dataset& data);

/// Mini-batch SGD with classical momentum, in place. Reshuffles every epoch
/// from the config seed and records one EpochRecord per epoch (plus epoch 0).
TrainTrace sgd_train(NetParams& p, const InitSnapshot& z, const Dataset& data, const TrainConfig& cfg);

enum class CorruptionMode { FullRandomSign, PartialFlip };

/// FullRandomSign: every label becomes a uniform ±1 target (two-class SignScalar).
/// PartialFlip: a uniform subset of floor(level * m) points gets uniform random labels.
Dataset corrupt_labels(const Dataset& data, CorruptionMode mode, double level, Rng& rng);

}  // namespace initcap
