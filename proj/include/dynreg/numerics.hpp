#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynreg/error.hpp"

namespace dynreg {

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(what) + ": non-finite value at coordinate " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Dense real vector whose entries are all finite and whose dimension is at least one.
///
/// Every constructor validates; arithmetic that would produce NaN or infinity throws
/// NumericError instead of returning a poisoned vector.
class RealVector {
 public:
  explicit RealVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw InvalidInputError("RealVector: dimension must be >= 1");
    detail::require_finite(entries_, "RealVector");
  }
  RealVector(std::initializer_list<double> entries) : RealVector(std::vector<double>(entries)) {}

  static RealVector zeros(std::size_t dim) {
    if (dim == 0) throw InvalidInputError("RealVector: dimension must be >= 1");
    return RealVector(std::vector<double>(dim, 0.0));
  }

  std::size_t dim() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  double at(std::size_t i) const {
    if (i >= entries_.size()) throw IndexError("RealVector: index " + std::to_string(i) + " out of range");
    return entries_[i];
  }
  std::span<const double> values() const noexcept { return entries_; }
  const std::vector<double>& data() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool operator==(const RealVector&) const = default;

 private:
  std::vector<double> entries_;
};

inline void require_same_dim(const RealVector& a, const RealVector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()) + ")");
  }
}

inline double l2_norm_sq(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInputError("l2_norm_sq: non-finite entry");
    sum += x * x;
  }
  return sum;
}

inline double l2_norm_sq(const RealVector& v) { return l2_norm_sq(v.values()); }
inline double l2_norm(const RealVector& v) { return std::sqrt(l2_norm_sq(v)); }

inline double dot(const RealVector& a, const RealVector& b) {
  require_same_dim(a, b, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
  return sum;
}

/// result[i] = f(a[i], b[i]).
template <typename BinaryOp>
RealVector elementwise_combine(const RealVector& a, const RealVector& b, BinaryOp&& f) {
  require_same_dim(a, b, "elementwise_combine");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = f(a[i], b[i]);
  detail::require_finite(out, "elementwise_combine");
  return RealVector(std::move(out));
}

inline RealVector operator+(const RealVector& a, const RealVector& b) {
  return elementwise_combine(a, b, std::plus<>{});
}
inline RealVector operator-(const RealVector& a, const RealVector& b) {
  return elementwise_combine(a, b, std::minus<>{});
}
inline RealVector operator*(double s, const RealVector& v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x *= s;
  detail::require_finite(out, "scale");
  return RealVector(std::move(out));
}

/// a + s * b
inline RealVector axpy(const RealVector& a, double s, const RealVector& b) {
  return elementwise_combine(a, b, [s](double x, double y) { return x + s * y; });
}

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double kDefaultFiniteDifferenceStep = 1e-5;

/// Central-difference gradient of a scalar function.
template <typename Fn>
RealVector finite_difference_gradient(Fn&& f, const RealVector& x, double h = kDefaultFiniteDifferenceStep) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInputError("finite_difference_gradient: h must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = f(RealVector(probe));
    probe[i] = xi - h;
    const double fm = f(RealVector(probe));
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_difference_gradient: f non-finite at probe along coordinate " +
                         std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return RealVector(std::move(grad));
}

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ULL);
  splitmix64(s);
  return splitmix64(s);
}

// xoshiro256** by Blackman and Vigna; satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& word : s_) word = splitmix64(seed);
  }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace detail

/// Reproducible random stream keyed by (seed, stream id).
///
/// Sub-streams are derived by hashing, so callers can hand out one stream per
/// (round, window slot) without any shared counter. Single owner only.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(detail::mix64(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream; the same (parent, k) always yields the same child.
  RngStream substream(std::uint64_t k) const {
    return RngStream(seed_, detail::mix64(stream_id_ + 0x632BE59BD9B4E019ULL, k));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  RealVector normal_vector(std::size_t dim, double stddev = 1.0) {
    std::vector<double> out(dim);
    for (double& x : out) x = stddev * normal();
    return RealVector(std::move(out));
  }
  RealVector uniform_vector(std::size_t dim, double lo, double hi) {
    std::vector<double> out(dim);
    for (double& x : out) x = uniform(lo, hi);
    return RealVector(std::move(out));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  detail::Xoshiro256 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline RngStream spawn_rng_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace dynreg
