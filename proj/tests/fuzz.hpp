#pragma once

// Structured corruptions of IDX, CIFAR-10 and checkpoint byte streams. Every
// mutation produced here makes the stream invalid, so a correct parser must
// reject all of them with FormatError.

#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "initcap/data.hpp"
#include "initcap/errors.hpp"
#include "initcap/network.hpp"

namespace fuzz {

using Bytes = std::vector<std::uint8_t>;

inline void put_u32_be(Bytes& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
}
inline std::uint32_t get_u32_be(const Bytes& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | b[at + i];
  return v;
}
inline void put_u32_le(Bytes& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint32_t get_u32_le(const Bytes& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

/// IDX pair with `count` images of rows×cols and labels in [0, 10).
inline std::pair<Bytes, Bytes> make_idx(initcap::Rng& rng, std::uint32_t count, std::uint32_t rows,
                                        std::uint32_t cols) {
  Bytes im(16 + std::size_t(count) * rows * cols);
  put_u32_be(im, 0, 0x803);
  put_u32_be(im, 4, count);
  put_u32_be(im, 8, rows);
  put_u32_be(im, 12, cols);
  for (std::size_t i = 16; i < im.size(); ++i) im[i] = static_cast<std::uint8_t>(rng.uniform_index(256));
  Bytes lb(8 + count);
  put_u32_be(lb, 0, 0x801);
  put_u32_be(lb, 4, count);
  for (std::size_t i = 8; i < lb.size(); ++i) lb[i] = static_cast<std::uint8_t>(rng.uniform_index(10));
  return {im, lb};
}

inline Bytes make_cifar(initcap::Rng& rng, std::size_t records) {
  Bytes b(records * 3073);
  for (std::size_t r = 0; r < records; ++r) {
    b[r * 3073] = static_cast<std::uint8_t>(rng.uniform_index(10));
    for (std::size_t i = 1; i < 3073; ++i) b[r * 3073 + i] = static_cast<std::uint8_t>(rng.uniform_index(256));
  }
  return b;
}

inline std::uint32_t different_u32(initcap::Rng& rng, std::uint32_t v) {
  std::uint32_t w = v;
  while (w == v) {
    switch (rng.uniform_index(4)) {
      case 0: w = v + 1 + static_cast<std::uint32_t>(rng.uniform_index(8)); break;
      case 1: w = v - 1 - static_cast<std::uint32_t>(rng.uniform_index(std::max<std::uint32_t>(v, 1))); break;
      case 2: w = v ^ (1u << rng.uniform_index(32)); break;
      default: w = static_cast<std::uint32_t>(rng.next_u64()); break;
    }
  }
  return w;
}

inline void truncate_or_extend(Bytes& b, initcap::Rng& rng, std::size_t granule = 1) {
  if (rng.uniform_index(2) == 0 && !b.empty()) {
    b.resize(rng.uniform_index(b.size()));
    if (granule > 1 && !b.empty() && b.size() % granule == 0) b.pop_back();
  } else {
    std::size_t extra = 1 + rng.uniform_index(64);
    if (granule > 1 && extra % granule == 0) ++extra;
    for (std::size_t i = 0; i < extra; ++i) b.push_back(static_cast<std::uint8_t>(rng.uniform_index(256)));
  }
}

/// One corruption of a valid IDX pair; modifies exactly one of the two files.
inline void corrupt_idx(Bytes& im, Bytes& lb, initcap::Rng& rng) {
  switch (rng.uniform_index(7)) {
    case 0: im[rng.uniform_index(4)] ^= static_cast<std::uint8_t>(1 + rng.uniform_index(255)); break;
    case 1: lb[rng.uniform_index(4)] ^= static_cast<std::uint8_t>(1 + rng.uniform_index(255)); break;
    case 2: {
      const std::size_t at = 4 + 4 * rng.uniform_index(3);  // count, rows or cols
      put_u32_be(im, at, different_u32(rng, get_u32_be(im, at)));
      break;
    }
    case 3: put_u32_be(lb, 4, different_u32(rng, get_u32_be(lb, 4))); break;
    case 4: truncate_or_extend(im, rng); break;
    case 5: truncate_or_extend(lb, rng); break;
    default: lb[8 + rng.uniform_index(lb.size() - 8)] = static_cast<std::uint8_t>(10 + rng.uniform_index(246)); break;
  }
}

inline void corrupt_cifar(Bytes& b, initcap::Rng& rng) {
  switch (rng.uniform_index(3)) {
    case 0: truncate_or_extend(b, rng, 3073); break;
    case 1: b[3073 * rng.uniform_index(b.size() / 3073)] = static_cast<std::uint8_t>(10 + rng.uniform_index(246)); break;
    default: b.clear(); break;
  }
}

/// Byte offsets of the structural fields of an encoded checkpoint.
struct CheckpointLayout {
  std::vector<std::size_t> u32_fields;  // version, dims, rows/cols/len of each layer
  std::vector<std::size_t> f64_values;
  std::size_t activation = 0;
};

inline CheckpointLayout checkpoint_layout(const initcap::NetParams& p) {
  CheckpointLayout L;
  std::size_t at = 4;
  for (int i = 0; i < 5; ++i, at += 4) L.u32_fields.push_back(at);
  L.activation = at++;
  for (int k = 0; k < p.shape.depth; ++k) {
    const auto& w = p.weights[static_cast<std::size_t>(k)];
    L.u32_fields.push_back(at);
    L.u32_fields.push_back(at + 4);
    at += 8;
    for (initcap::Index i = 0; i < w.size(); ++i, at += 8) L.f64_values.push_back(at);
    L.u32_fields.push_back(at);
    at += 4;
    for (initcap::Index i = 0; i < w.rows(); ++i, at += 8) L.f64_values.push_back(at);
  }
  return L;
}

inline void corrupt_checkpoint(Bytes& b, const CheckpointLayout& L, initcap::Rng& rng) {
  switch (rng.uniform_index(5)) {
    case 0: b[rng.uniform_index(4)] ^= static_cast<std::uint8_t>(1 + rng.uniform_index(255)); break;
    case 1: {
      const std::size_t at = L.u32_fields[rng.uniform_index(L.u32_fields.size())];
      put_u32_le(b, at, different_u32(rng, get_u32_le(b, at)));
      break;
    }
    case 2: b[L.activation] = static_cast<std::uint8_t>(2 + rng.uniform_index(254)); break;
    case 3: {
      const double bad[] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
      const double v = bad[rng.uniform_index(3)];
      std::memcpy(&b[L.f64_values[rng.uniform_index(L.f64_values.size())]], &v, 8);
      break;
    }
    default: truncate_or_extend(b, rng); break;
  }
}

struct Tally {
  int trials = 0;
  int format_errors = 0;
  int other_errors = 0;
  int accepted = 0;
  bool all_rejected() const { return format_errors == trials; }
};

inline void classify(Tally& t, const std::function<void()>& parse) {
  ++t.trials;
  try {
    parse();
    ++t.accepted;
  } catch (const initcap::FormatError&) {
    ++t.format_errors;
  } catch (...) {
    ++t.other_errors;
  }
}

inline Tally fuzz_idx(initcap::Rng& rng, int trials) {
  Tally t;
  for (int i = 0; i < trials; ++i) {
    const auto count = static_cast<std::uint32_t>(1 + rng.uniform_index(6));
    auto [im, lb] = make_idx(rng, count, static_cast<std::uint32_t>(1 + rng.uniform_index(5)),
                             static_cast<std::uint32_t>(1 + rng.uniform_index(5)));
    corrupt_idx(im, lb, rng);
    classify(t, [&] { initcap::parse_mnist(im, lb); });
  }
  return t;
}

inline Tally fuzz_cifar(initcap::Rng& rng, int trials) {
  Tally t;
  for (int i = 0; i < trials; ++i) {
    Bytes b = make_cifar(rng, 1 + rng.uniform_index(3));
    corrupt_cifar(b, rng);
    classify(t, [&] { initcap::parse_cifar10(b); });
  }
  return t;
}

inline Tally fuzz_checkpoint(initcap::Rng& rng, int trials) {
  Tally t;
  for (int i = 0; i < trials; ++i) {
    initcap::NetShape shape;
    shape.input_dim = 1 + static_cast<int>(rng.uniform_index(4));
    shape.hidden_width = 1 + static_cast<int>(rng.uniform_index(4));
    shape.depth = 2 + static_cast<int>(rng.uniform_index(3));
    shape.output_dim = 1 + static_cast<int>(rng.uniform_index(3));
    shape.activation = rng.uniform_index(2) ? initcap::Activation::ReLU : initcap::Activation::Linear;
    const initcap::NetParams p = initcap::xavier_init(rng, shape);
    Bytes b = initcap::encode_checkpoint(p);
    corrupt_checkpoint(b, checkpoint_layout(p), rng);
    classify(t, [&] { initcap::decode_checkpoint(b); });
  }
  return t;
}

}  // namespace fuzz
