#include "initcap/training.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace initcap {

std::string to_string(LossKind k) { return k == LossKind::Squared ? "squared" : "cross-entropy"; }

LossKind parse_loss(const std::string& s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "cross-entropy" || s == "xent") return LossKind::CrossEntropy;
  throw ArgumentError("unknown loss '" + s + "' (expected squared or cross-entropy)");
}

std::string to_string(TrainStatus s) {
  switch (s) {
    case TrainStatus::Converged: return "converged";
    case TrainStatus::EpochLimitHit: return "epoch-limit";
    case TrainStatus::Diverged: return "diverged";
  }
  return "unknown";
}

double squared_loss(const DenseVector& output, const DenseVector& onehot) {
  if (output.size() != onehot.size() || output.size() == 0)
    throw ArgumentError("squared_loss: length mismatch");
  return (output - onehot).squaredNorm() / static_cast<double>(output.size());
}

double cross_entropy_loss(const DenseVector& logits, int label) {
  if (label < 0 || label >= logits.size()) throw ArgumentError("cross_entropy_loss: label out of range");
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return lse - logits[label];
}

// ---------------------------------------------------------------------------

void validate(const StopRule& rule) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LossBelow>) {
          if (!(r.threshold > 0.0)) throw ArgumentError("LossBelow: threshold must be > 0");
        } else if constexpr (std::is_same_v<T, LossFractionOfInitial>) {
          if (!(r.fraction > 0.0 && r.fraction <= 1.0))
            throw ArgumentError("LossFractionOfInitial: fraction must be in (0, 1]");
        } else if constexpr (std::is_same_v<T, MarginSatisfied>) {
          if (!(r.margin > 0.0)) throw ArgumentError("MarginSatisfied: margin must be > 0");
          if (!(r.fraction > 0.0 && r.fraction <= 1.0))
            throw ArgumentError("MarginSatisfied: fraction must be in (0, 1]");
        }
      },
      rule);
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(const StopRule& rule) {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LossBelow>)
          os << "loss<" << shortest(r.threshold);
        else if constexpr (std::is_same_v<T, LossFractionOfInitial>)
          os << "fraction:" << shortest(r.fraction);
        else if constexpr (std::is_same_v<T, MarginSatisfied>)
          os << "margin:" << shortest(r.margin) << "@" << shortest(r.fraction);
        else
          os << "epochs";
      },
      rule);
  return os.str();
}

StopRule parse_stop_rule(const std::string& s) {
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty()) throw ArgumentError("stop rule: bad number in '" + s + "'");
    return v;
  };
  StopRule rule;
  if (s == "epochs") {
    rule = EpochLimit{};
  } else if (s.rfind("loss<", 0) == 0) {
    rule = LossBelow{number(s.substr(5))};
  } else if (s.rfind("fraction:", 0) == 0) {
    rule = LossFractionOfInitial{number(s.substr(9))};
  } else if (s.rfind("margin:", 0) == 0) {
    const std::string body = s.substr(7);
    const auto at = body.find('@');
    if (at == std::string::npos)
      rule = MarginSatisfied{number(body)};
    else
      rule = MarginSatisfied{number(body.substr(0, at)), number(body.substr(at + 1))};
  } else {
    throw ArgumentError("unknown stop rule '" + s + "'");
  }
  validate(rule);
  return rule;
}

void TrainConfig::validate() const {
  // Zero is admitted so that a frozen run can be expressed.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ArgumentError("TrainConfig: learning_rate must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("TrainConfig: momentum must be in [0, 1)");
  if (batch_size < 1) throw ArgumentError("TrainConfig: batch_size must be >= 1");
  if (max_epochs < 0) throw ArgumentError("TrainConfig: max_epochs must be >= 0");
  initcap::validate(stop);
}

// ---------------------------------------------------------------------------

Batch make_batch(const Dataset& data, const std::vector<Index>& rows) {
  Batch b;
  b.inputs = data.inputs(rows, Eigen::all);
  b.targets.resize(static_cast<Index>(rows.size()), data.target_dim());
  b.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b.targets.row(static_cast<Index>(i)) = data.target(rows[i]).transpose();
    b.labels.push_back(data.labels[static_cast<std::size_t>(rows[i])]);
  }
  return b;
}

Batch full_batch(const Dataset& data) {
  Batch b;
  b.inputs = data.inputs;
  b.targets = data.targets();
  b.labels = data.labels;
  return b;
}

NetParams backprop_output_gradient(const NetParams& p, const DenseMatrix& inputs,
                                   const DenseMatrix& output_grads) {
  const int d = p.shape.depth;
  if (inputs.cols() != p.shape.input_dim) throw ArgumentError("backprop: input dimension mismatch");
  if (output_grads.rows() != inputs.rows() || output_grads.cols() != p.shape.output_dim)
    throw ArgumentError("backprop: output gradient dimension mismatch");
  const bool relu = p.shape.activation == Activation::ReLU;

  // pre[k] = f^(k) for the batch, one column per sample; post[k] = φ(f^(k)), post[0] = x.
  std::vector<Eigen::MatrixXd> pre(static_cast<std::size_t>(d + 1));
  std::vector<Eigen::MatrixXd> post(static_cast<std::size_t>(d));
  post[0] = inputs.transpose();
  for (int k = 1; k <= d; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    pre[static_cast<std::size_t>(k)] = p.weights[i] * post[i];
    pre[static_cast<std::size_t>(k)].colwise() += p.biases[i];
    if (k < d)
      post[static_cast<std::size_t>(k)] =
          relu ? Eigen::MatrixXd(pre[static_cast<std::size_t>(k)].cwiseMax(0.0)) : pre[static_cast<std::size_t>(k)];
  }

  NetParams g = NetParams::zeros(p.shape);
  Eigen::MatrixXd delta = output_grads.transpose();
  for (int k = d; k >= 1; --k) {
    const auto i = static_cast<std::size_t>(k - 1);
    g.weights[i].noalias() = delta * post[i].transpose();
    g.biases[i] = delta.rowwise().sum();
    if (k > 1) {
      Eigen::MatrixXd back = p.weights[i].transpose() * delta;
      if (relu) back.array() *= (pre[i].array() > 0.0).cast<double>();
      delta = std::move(back);
    }
  }
  return g;
}

namespace {

/// Mean loss over the rows of `outputs` and the matching per-row loss gradient.
double loss_and_gradient(const DenseMatrix& outputs, const DenseMatrix& targets, const std::vector<int>& labels,
                         LossKind loss, DenseMatrix* grad) {
  const Index b = outputs.rows();
  const Index k = outputs.cols();
  const double inv_b = 1.0 / static_cast<double>(b);
  if (grad) grad->resize(b, k);
  double total = 0.0;
  if (loss == LossKind::Squared) {
    if (targets.rows() != b || targets.cols() != k) throw ArgumentError("squared loss: target dimension mismatch");
    const DenseMatrix diff = outputs - targets;
    total = diff.squaredNorm() / static_cast<double>(k);
    if (grad) *grad = diff * (2.0 / static_cast<double>(k) * inv_b);
  } else {
    for (Index r = 0; r < b; ++r) {
      const int label = labels[static_cast<std::size_t>(r)];
      if (label < 0 || label >= k) throw ArgumentError("cross entropy: label out of range");
      const auto row = outputs.row(r);
      const double mx = row.maxCoeff();
      const Eigen::RowVectorXd e = (row.array() - mx).exp();
      const double z = e.sum();
      total += mx + std::log(z) - row[label];
      if (grad) {
        grad->row(r) = e / z * inv_b;
        (*grad)(r, label) -= inv_b;
      }
    }
  }
  return total * inv_b;
}

}  // namespace

Gradient backprop(const NetParams& p, const Batch& batch, LossKind loss) {
  if (batch.inputs.rows() < 1) throw ArgumentError("backprop: empty batch");
  const DenseMatrix out = forward_batch(p, batch.inputs);
  DenseMatrix g;
  Gradient result;
  result.loss = loss_and_gradient(out, batch.targets, batch.labels, loss, &g);
  result.grad = backprop_output_gradient(p, batch.inputs, g);
  return result;
}

std::vector<double> margins(const NetParams& p, const Dataset& data) {
  const DenseMatrix out = forward_batch(p, data.inputs);
  std::vector<double> result(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) {
    const int label = data.labels[static_cast<std::size_t>(i)];
    if (data.encoding == LabelEncoding::SignScalar) {
      result[static_cast<std::size_t>(i)] = (label == 0 ? 1.0 : -1.0) * out(i, 0);
      continue;
    }
    double best_other = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < out.cols(); ++j)
      if (j != label) best_other = std::max(best_other, out(i, j));
    result[static_cast<std::size_t>(i)] = out(i, label) - best_other;
  }
  return result;
}

Evaluation evaluate(const NetParams& p, const Dataset& data, LossKind loss, double margin) {
  const DenseMatrix out = forward_batch(p, data.inputs);
  Evaluation ev{};
  ev.loss = loss_and_gradient(out, loss == LossKind::Squared ? data.targets() : DenseMatrix(), data.labels, loss,
                              nullptr);
  Index wrong = 0;
  Index met = 0;
  for (Index i = 0; i < data.size(); ++i) {
    const int label = data.labels[static_cast<std::size_t>(i)];
    double m = 0.0;
    if (data.encoding == LabelEncoding::SignScalar) {
      const int predicted = out(i, 0) > 0.0 ? 0 : 1;
      wrong += predicted != label;
      m = (label == 0 ? 1.0 : -1.0) * out(i, 0);
    } else {
      Index predicted = 0;
      out.row(i).maxCoeff(&predicted);
      wrong += predicted != label;
      double best_other = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < out.cols(); ++j)
        if (j != label) best_other = std::max(best_other, out(i, j));
      m = out(i, label) - best_other;
    }
    if (margin > 0.0 && m >= margin) ++met;
  }
  ev.error = static_cast<double>(wrong) / static_cast<double>(data.size());
  ev.margin_fraction = static_cast<double>(met) / static_cast<double>(data.size());
  return ev;
}

namespace {

bool stop_satisfied(const StopRule& rule, const Evaluation& ev, double initial_loss) {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LossBelow>)
          return ev.loss < r.threshold;
        else if constexpr (std::is_same_v<T, LossFractionOfInitial>)
          return ev.loss <= r.fraction * initial_loss;
        else if constexpr (std::is_same_v<T, MarginSatisfied>)
          return ev.margin_fraction >= r.fraction;
        else
          return false;
      },
      rule);
}

double margin_of(const StopRule& rule) {
  if (const auto* m = std::get_if<MarginSatisfied>(&rule)) return m->margin;
  return 0.0;
}

}  // namespace

TrainTrace sgd_train(NetParams& p, const InitSnapshot& z, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  p.check_consistent();
  if (!p.same_shape(z.params())) throw ArgumentError("sgd_train: parameters and snapshot differ in shape");
  if (p.shape.input_dim != data.input_dim()) throw ArgumentError("sgd_train: input dimension mismatch");
  const int out_dim = cfg.loss == LossKind::Squared ? data.target_dim() : data.num_classes;
  if (p.shape.output_dim != out_dim) throw ArgumentError("sgd_train: output dimension mismatch");
  if (std::holds_alternative<MarginSatisfied>(cfg.stop) && data.encoding != LabelEncoding::OneHot)
    throw ArgumentError("sgd_train: margin stopping requires class labels");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const double margin = margin_of(cfg.stop);

  TrainTrace trace;
  Evaluation ev = evaluate(p, data, cfg.loss, margin);
  const double initial = ev.loss;
  trace.epochs.push_back({0, ev.loss, ev.error, distance_from_init(p, z), elapsed()});
  if (!std::isfinite(ev.loss) || ev.loss >= kDivergenceLoss) {
    trace.status = TrainStatus::Diverged;
    return trace;
  }
  if (stop_satisfied(cfg.stop, ev, initial)) {
    trace.status = TrainStatus::Converged;
    return trace;
  }

  const DenseMatrix targets = data.targets();
  Rng rng(cfg.seed);
  NetParams velocity = NetParams::zeros(p.shape);
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::vector<Index> rows;
  Batch batch;

  trace.status = TrainStatus::EpochLimitHit;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi));
      batch.inputs = data.inputs(rows, Eigen::all);
      batch.targets = targets(rows, Eigen::all);
      batch.labels.clear();
      for (Index r : rows) batch.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
      Gradient g = backprop(p, batch, cfg.loss);
      velocity *= cfg.momentum;
      g.grad *= cfg.learning_rate;
      velocity -= g.grad;
      p += velocity;
    }
    ev = evaluate(p, data, cfg.loss, margin);
    trace.epochs.push_back({epoch, ev.loss, ev.error, distance_from_init(p, z), elapsed()});
    if (!std::isfinite(ev.loss) || ev.loss >= kDivergenceLoss || !p.all_finite()) {
      trace.status = TrainStatus::Diverged;
      break;
    }
    if (stop_satisfied(cfg.stop, ev, initial)) {
      trace.status = TrainStatus::Converged;
      break;
    }
  }
  return trace;
}

Dataset corrupt_labels(const Dataset& data, CorruptionMode mode, double level, Rng& rng) {
  if (!(level >= 0.0 && level <= 1.0)) throw ArgumentError("corrupt_labels: level must be in [0, 1]");
  data.validate();
  Dataset out = data;
  if (mode == CorruptionMode::FullRandomSign) {
    out.num_classes = 2;
    out.encoding = LabelEncoding::SignScalar;
    for (int& l : out.labels) l = rng.sign() > 0 ? 0 : 1;
    out.provenance = "corrupted(" + data.provenance + ")";
    return out;
  }
  const auto m = static_cast<std::size_t>(data.size());
  const auto count = static_cast<std::size_t>(std::floor(level * static_cast<double>(m)));
  if (count == 0) return out;
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.uniform_index(m - i)]);
  for (std::size_t i = 0; i < count; ++i)
    out.labels[idx[i]] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(data.num_classes)));
  out.provenance = "corrupted(" + data.provenance + ")";
  return out;
}

}  // namespace initcap
