#include <cmath>

#include "byte_io.hpp"
#include "initcap/network.hpp"

namespace initcap {

namespace {
constexpr char kMagic[4] = {'I', 'C', 'A', 'P'};
}

std::vector<std::uint8_t> encode_checkpoint(const NetParams& p) {
  p.check_consistent();
  detail::ByteWriter w;
  w.raw(kMagic, 4);
  w.u32_le(kCheckpointVersion);
  w.u32_le(static_cast<std::uint32_t>(p.shape.input_dim));
  w.u32_le(static_cast<std::uint32_t>(p.shape.hidden_width));
  w.u32_le(static_cast<std::uint32_t>(p.shape.depth));
  w.u32_le(static_cast<std::uint32_t>(p.shape.output_dim));
  w.u8(static_cast<std::uint8_t>(p.shape.activation));
  for (int k = 0; k < p.shape.depth; ++k) {
    const auto& m = p.weights[static_cast<std::size_t>(k)];
    const auto& b = p.biases[static_cast<std::size_t>(k)];
    w.u32_le(static_cast<std::uint32_t>(m.rows()));
    w.u32_le(static_cast<std::uint32_t>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) w.f64_le(m.data()[i]);
    w.u32_le(static_cast<std::uint32_t>(b.size()));
    for (Index i = 0; i < b.size(); ++i) w.f64_le(b[i]);
  }
  return w.take();
}

NetParams decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader in(bytes);
  const std::uint8_t* magic = in.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("magic", 0, "expected \"ICAP\"");

  const std::uint64_t version_at = in.offset();
  const std::uint32_t version = in.u32_le("version");
  if (version != kCheckpointVersion)
    throw FormatError("version", version_at, "unsupported version " + std::to_string(version));

  auto dim = [&](const char* field) {
    const std::uint64_t at = in.offset();
    const std::uint32_t v = in.u32_le(field);
    if (v < 1 || v > (1u << 24)) throw FormatError(field, at, "out of range: " + std::to_string(v));
    return static_cast<int>(v);
  };
  NetShape shape;
  shape.input_dim = dim("input_dim");
  shape.hidden_width = dim("hidden_width");
  const std::uint64_t depth_at = in.offset();
  shape.depth = dim("depth");
  if (shape.depth < 2) throw FormatError("depth", depth_at, "depth must be >= 2");
  shape.output_dim = dim("output_dim");
  const std::uint64_t act_at = in.offset();
  const std::uint8_t act = in.u8("activation");
  if (act > 1) throw FormatError("activation", act_at, "unknown activation code " + std::to_string(act));
  shape.activation = static_cast<Activation>(act);

  NetParams p;
  p.shape = shape;
  for (int k = 1; k <= shape.depth; ++k) {
    const std::string layer = "layer " + std::to_string(k);
    const std::uint64_t rows_at = in.offset();
    const std::uint32_t rows = in.u32_le(layer + " rows");
    if (rows != static_cast<std::uint32_t>(shape.layer_rows(k)))
      throw FormatError(layer + " rows", rows_at, "expected " + std::to_string(shape.layer_rows(k)));
    const std::uint64_t cols_at = in.offset();
    const std::uint32_t cols = in.u32_le(layer + " cols");
    if (cols != static_cast<std::uint32_t>(shape.layer_cols(k)))
      throw FormatError(layer + " cols", cols_at, "expected " + std::to_string(shape.layer_cols(k)));
    in.require(std::uint64_t(rows) * cols * 8, layer + " weights");
    DenseMatrix w(rows, cols);
    for (Index i = 0; i < w.size(); ++i) {
      const std::uint64_t at = in.offset();
      w.data()[i] = in.f64_le(layer + " weights");
      if (!std::isfinite(w.data()[i])) throw FormatError(layer + " weights", at, "non-finite value");
    }
    const std::uint64_t len_at = in.offset();
    const std::uint32_t len = in.u32_le(layer + " bias length");
    if (len != rows) throw FormatError(layer + " bias length", len_at, "expected " + std::to_string(rows));
    in.require(std::uint64_t(len) * 8, layer + " biases");
    DenseVector b(len);
    for (Index i = 0; i < b.size(); ++i) {
      const std::uint64_t at = in.offset();
      b[i] = in.f64_le(layer + " biases");
      if (!std::isfinite(b[i])) throw FormatError(layer + " biases", at, "non-finite value");
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  in.expect_end("end of checkpoint");
  return p;
}

void save_checkpoint(const NetParams& p, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(p));
}

NetParams load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace initcap
