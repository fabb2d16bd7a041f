#pragma once

// Dense containers, seeded sampling and the two matrix norms used everywhere.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

#include "initcap/errors.hpp"

namespace initcap {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Matrix<double>;
using DenseVector = Vector<double>;
using Index = Eigen::Index;

/// splitmix64 finalizer; used to derive independent seed streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) noexcept {
  std::uint64_t h = mix64(base);
  ((h = mix64(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

/// Seeded random stream. Single owner; not safe to share across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t uniform_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  /// Uniform draw from {-1, +1}.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }
  std::uint64_t next_u64() { return engine_(); }

  /// Child stream that depends only on this stream's seed and `stream`.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

template <typename Scalar = double>
Matrix<Scalar> gaussian_matrix(Rng& rng, Index rows, Index cols, Scalar std_dev) {
  if (rows < 1 || cols < 1) throw ArgumentError("gaussian_matrix: dimensions must be positive");
  if (!(std_dev > Scalar(0)) || !std::isfinite(static_cast<double>(std_dev)))
    throw ArgumentError("gaussian_matrix: std must be positive and finite");
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = std_dev * static_cast<Scalar>(rng.normal());
  return m;
}

template <typename Scalar = double>
Vector<Scalar> gaussian_vector(Rng& rng, Index len, Scalar std_dev = Scalar(1)) {
  Vector<Scalar> v(len);
  for (Index i = 0; i < len; ++i) v[i] = std_dev * static_cast<Scalar>(rng.normal());
  return v;
}

template <typename Derived>
typename Derived::RealScalar frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

struct SpectralNorm {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {
std::uint64_t hash_bytes(const void* data, std::size_t bytes) noexcept;
}

inline constexpr double kSpectralTol = 1e-10;
inline constexpr int kSpectralMaxIter = 10000;

/// Largest singular value by power iteration on mᵀm.
///
/// The start vector is derived from a hash of the matrix contents, so the
/// result is a pure function of the input. The estimate never exceeds the
/// Frobenius norm. If `max_iter` is exhausted the best estimate is returned
/// with `converged == false`.
template <typename Derived>
SpectralNorm spectral_norm(const Eigen::MatrixBase<Derived>& m, double tol = kSpectralTol,
                           int max_iter = kSpectralMaxIter) {
  if (!(tol > 0.0)) throw ArgumentError("spectral_norm: tol must be positive");
  if (max_iter < 1) throw ArgumentError("spectral_norm: max_iter must be >= 1");
  using Plain = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Plain a = m.template cast<double>();
  const double frob = a.norm();
  SpectralNorm out;
  if (a.size() == 0 || frob == 0.0) {
    out.converged = true;
    return out;
  }

  Rng rng(detail::hash_bytes(a.data(), sizeof(double) * static_cast<std::size_t>(a.size())));
  Eigen::VectorXd v = gaussian_vector(rng, a.cols());
  v.normalize();

  double sigma = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd w = a * v;
    const double next = w.norm();
    out.iterations = it;
    Eigen::VectorXd u = a.transpose() * w;
    const double un = u.norm();
    if (un == 0.0) {
      // v fell into the null space; the hashed start makes this measure-zero.
      sigma = std::max(sigma, next);
      out.converged = true;
      break;
    }
    v = u / un;
    if (std::abs(next - sigma) <= tol * next) {
      sigma = next;
      out.converged = true;
      break;
    }
    sigma = next;
  }
  out.value = std::min(sigma, frob);
  return out;
}

template <typename Derived>
double spectral_norm_value(const Eigen::MatrixBase<Derived>& m) {
  return spectral_norm(m).value;
}

// Checked arithmetic. Dimension mismatch throws ArgumentError.

template <typename Scalar>
Vector<Scalar> matvec(const Matrix<Scalar>& a, const Vector<Scalar>& x) {
  if (a.cols() != x.size()) throw ArgumentError("matvec: dimension mismatch");
  return a * x;
}

template <typename Scalar>
Matrix<Scalar> matmul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matmul: dimension mismatch");
  return a * b;
}

/// Returns y + alpha * x.
template <typename Scalar>
Vector<Scalar> axpy(Scalar alpha, const Vector<Scalar>& x, const Vector<Scalar>& y) {
  if (x.size() != y.size()) throw ArgumentError("axpy: dimension mismatch");
  return y + alpha * x;
}

template <typename Scalar>
Scalar dot(const Vector<Scalar>& x, const Vector<Scalar>& y) {
  if (x.size() != y.size()) throw ArgumentError("dot: dimension mismatch");
  return x.dot(y);
}

}  // namespace initcap
