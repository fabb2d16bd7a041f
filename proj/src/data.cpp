#include "initcap/data.hpp"

#include <algorithm>
#include <numeric>

#include "byte_io.hpp"

namespace initcap {

DenseVector Dataset::target(Index i) const {
  const int label = labels[static_cast<std::size_t>(i)];
  if (encoding == LabelEncoding::SignScalar) return DenseVector::Constant(1, label == 0 ? 1.0 : -1.0);
  DenseVector t = DenseVector::Zero(num_classes);
  t[label] = 1.0;
  return t;
}

DenseMatrix Dataset::targets() const {
  DenseMatrix t = DenseMatrix::Zero(size(), target_dim());
  for (Index i = 0; i < size(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (encoding == LabelEncoding::SignScalar)
      t(i, 0) = label == 0 ? 1.0 : -1.0;
    else
      t(i, label) = 1.0;
  }
  return t;
}

void Dataset::validate() const {
  if (size() < 1) throw ArgumentError("Dataset: empty");
  if (static_cast<Index>(labels.size()) != size()) throw ArgumentError("Dataset: label count mismatch");
  if (num_classes < 1) throw ArgumentError("Dataset: num_classes must be >= 1");
  if (encoding == LabelEncoding::SignScalar && num_classes != 2)
    throw ArgumentError("Dataset: SignScalar encoding requires two classes");
  for (int l : labels)
    if (l < 0 || l >= num_classes) throw ArgumentError("Dataset: label out of range");
}

// ---------------------------------------------------------------------------
// MNIST / IDX

namespace {
constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;
}  // namespace

Dataset parse_mnist(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels) {
  detail::ByteReader im(images);
  const std::uint32_t im_magic = im.u32_be("images magic");
  if (im_magic != kIdxImages) throw FormatError("images magic", 0, "expected 0x00000803");
  const std::uint32_t count = im.u32_be("images count");
  const std::uint64_t rows_at = im.offset();
  const std::uint32_t rows = im.u32_be("images rows");
  const std::uint64_t cols_at = im.offset();
  const std::uint32_t cols = im.u32_be("images cols");
  if (rows == 0 || rows > 4096) throw FormatError("images rows", rows_at, "out of range");
  if (cols == 0 || cols > 4096) throw FormatError("images cols", cols_at, "out of range");
  const std::uint64_t n = std::uint64_t(rows) * cols;
  if (im.remaining() != std::uint64_t(count) * n)
    throw FormatError("images payload", im.offset(),
                      "expected " + std::to_string(std::uint64_t(count) * n) + " pixel bytes, found " +
                          std::to_string(im.remaining()));
  if (count == 0) throw FormatError("images count", 4, "no images");

  detail::ByteReader lb(labels);
  const std::uint32_t lb_magic = lb.u32_be("labels magic");
  if (lb_magic != kIdxLabels) throw FormatError("labels magic", 0, "expected 0x00000801");
  const std::uint32_t lcount = lb.u32_be("labels count");
  if (lcount != count)
    throw FormatError("labels count", 4,
                      std::to_string(lcount) + " labels for " + std::to_string(count) + " images");
  if (lb.remaining() != lcount)
    throw FormatError("labels payload", lb.offset(),
                      "expected " + std::to_string(lcount) + " label bytes, found " + std::to_string(lb.remaining()));

  Dataset d;
  d.num_classes = 10;
  d.encoding = LabelEncoding::OneHot;
  d.provenance = "mnist";
  d.inputs.resize(count, static_cast<Index>(n));
  const std::uint8_t* px = im.take(std::uint64_t(count) * n, "images payload");
  for (Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] = px[i] / 255.0;
  d.labels.resize(count);
  const std::uint64_t label_base = lb.offset();
  const std::uint8_t* ls = lb.take(lcount, "labels payload");
  for (std::uint32_t i = 0; i < lcount; ++i) {
    if (ls[i] > 9) throw FormatError("label", label_base + i, "class " + std::to_string(ls[i]) + " out of range");
    d.labels[i] = ls[i];
  }
  return d;
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_mnist(detail::read_file(images), detail::read_file(labels));
}

// ---------------------------------------------------------------------------
// CIFAR-10

namespace {
constexpr std::size_t kCifarPixels = 3072;
constexpr std::size_t kCifarRecord = kCifarPixels + 1;
}  // namespace

Dataset parse_cifar10(const std::vector<std::uint8_t>& batch) {
  if (batch.empty()) throw FormatError("cifar batch", 0, "empty file");
  if (batch.size() % kCifarRecord != 0)
    throw FormatError("cifar batch", batch.size(),
                      "length " + std::to_string(batch.size()) + " is not a multiple of 3073");
  const std::size_t m = batch.size() / kCifarRecord;
  Dataset d;
  d.num_classes = 10;
  d.encoding = LabelEncoding::OneHot;
  d.provenance = "cifar10";
  d.inputs.resize(static_cast<Index>(m), static_cast<Index>(kCifarPixels));
  d.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint8_t* rec = batch.data() + i * kCifarRecord;
    if (rec[0] > 9)
      throw FormatError("label", i * kCifarRecord, "class " + std::to_string(rec[0]) + " out of range");
    d.labels[i] = rec[0];
    for (std::size_t j = 0; j < kCifarPixels; ++j)
      d.inputs(static_cast<Index>(i), static_cast<Index>(j)) = rec[1 + j] / 255.0;
  }
  return d;
}

Dataset load_cifar10(const std::vector<std::filesystem::path>& batches) {
  if (batches.empty()) throw ArgumentError("load_cifar10: no batch files");
  std::vector<Dataset> parts;
  Index total = 0;
  for (const auto& path : batches) {
    parts.push_back(parse_cifar10(detail::read_file(path)));
    total += parts.back().size();
  }
  Dataset d = parts.front();
  d.inputs.resize(total, static_cast<Index>(kCifarPixels));
  d.labels.clear();
  Index row = 0;
  for (const auto& p : parts) {
    d.inputs.middleRows(row, p.size()) = p.inputs;
    d.labels.insert(d.labels.end(), p.labels.begin(), p.labels.end());
    row += p.size();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Synthetic clusters

SyntheticClusters::SyntheticClusters(Rng& rng, int input_dim, int num_classes, double separation)
    : input_dim_(input_dim), num_classes_(num_classes), separation_(separation) {
  if (input_dim < 1) throw ArgumentError("synthetic_clusters: input_dim must be >= 1");
  if (num_classes < 1) throw ArgumentError("synthetic_clusters: num_classes must be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw ArgumentError("synthetic_clusters: separation must be finite and >= 0");
  means_.resize(num_classes, input_dim);
  for (int c = 0; c < num_classes; ++c) {
    DenseVector dir = gaussian_vector(rng, input_dim);
    means_.row(c) = (separation * dir / dir.norm()).transpose();
  }
  // Per-feature window covering every mean plus 6 noise standard deviations.
  const double halo = 6.0 / std::sqrt(static_cast<double>(input_dim));
  offset_.resize(input_dim);
  scale_.resize(input_dim);
  for (int j = 0; j < input_dim; ++j) {
    const double lo = means_.col(j).minCoeff() - halo;
    const double hi = means_.col(j).maxCoeff() + halo;
    offset_[j] = lo;
    scale_[j] = 1.0 / (hi - lo);
  }
}

Dataset SyntheticClusters::draw(Rng& rng, Index m) const {
  if (m < num_classes_) throw ArgumentError("synthetic_clusters: m must be >= num_classes");
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % num_classes_);
  for (std::size_t i = labels.size() - 1; i > 0; --i) std::swap(labels[i], labels[rng.uniform_index(i + 1)]);

  const double noise = 1.0 / std::sqrt(static_cast<double>(input_dim_));
  Dataset d;
  d.num_classes = num_classes_;
  d.encoding = LabelEncoding::OneHot;
  d.provenance = "synthetic";
  d.labels = std::move(labels);
  d.inputs.resize(m, input_dim_);
  for (Index i = 0; i < m; ++i) {
    const int c = d.labels[static_cast<std::size_t>(i)];
    for (int j = 0; j < input_dim_; ++j) {
      const double raw = means_(c, j) + noise * rng.normal();
      d.inputs(i, j) = std::clamp((raw - offset_[j]) * scale_[j], 0.0, 1.0);
    }
  }
  return d;
}

Dataset synthetic_clusters(Rng& rng, Index m, int input_dim, int num_classes, double separation) {
  SyntheticClusters dist(rng, input_dim, num_classes, separation);
  return dist.draw(rng, m);
}

// ---------------------------------------------------------------------------
// Subsetting

Dataset select_rows(const Dataset& data, const std::vector<Index>& rows) {
  Dataset d;
  d.num_classes = data.num_classes;
  d.encoding = data.encoding;
  d.provenance = data.provenance;
  d.inputs.resize(static_cast<Index>(rows.size()), data.inputs.cols());
  d.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.inputs.row(static_cast<Index>(i)) = data.inputs.row(rows[i]);
    d.labels.push_back(data.labels[static_cast<std::size_t>(rows[i])]);
  }
  return d;
}

Dataset subset(const Dataset& data, Index m, Rng& rng) {
  if (m < 1 || m > data.size()) throw ArgumentError("subset: m must be in [1, data size]");
  std::vector<Index> idx(static_cast<std::size_t>(data.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  // Partial Fisher-Yates: the first m slots are a uniform sample.
  for (Index i = 0; i < m; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.uniform_index(idx.size() - static_cast<std::size_t>(i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(m));
  return select_rows(data, idx);
}

Dataset two_class_filter(const Dataset& data, int a, int b) {
  if (a == b) throw ArgumentError("two_class_filter: classes must differ");
  if (a < 0 || b < 0 || a >= data.num_classes || b >= data.num_classes)
    throw ArgumentError("two_class_filter: class out of range");
  std::vector<Index> rows;
  for (Index i = 0; i < data.size(); ++i) {
    const int l = data.labels[static_cast<std::size_t>(i)];
    if (l == a || l == b) rows.push_back(i);
  }
  if (rows.empty()) throw ArgumentError("two_class_filter: no samples of the requested classes");
  Dataset d = select_rows(data, rows);
  for (int& l : d.labels) l = (l == a) ? 0 : 1;
  d.num_classes = 2;
  d.encoding = LabelEncoding::SignScalar;
  d.provenance = data.provenance + "/two-class";
  return d;
}

}  // namespace initcap
