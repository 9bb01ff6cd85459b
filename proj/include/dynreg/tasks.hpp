#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dynreg/error.hpp"
#include "dynreg/numerics.hpp"

namespace dynreg {

/// Analytic constants of a loss family: |l| <= D, L-Lipschitz, gamma-smooth,
/// H-Hessian-Lipschitz.
struct LossConstants {
  double D = 1.0;
  double L = 1.0;
  double gamma = 1.0;
  double H = 1.0;

  void validate() const {
    for (double c : {D, L, gamma, H}) {
      if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("LossConstants: every constant must be finite and > 0");
    }
  }
};

enum class NoiseKind { Exact, GaussianBoundedVariance, SubGaussian };

inline const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Exact: return "exact";
    case NoiseKind::GaussianBoundedVariance: return "gaussian";
    case NoiseKind::SubGaussian: return "subgaussian";
  }
  return "unknown";
}

/// Sub-Gaussian scale for isotropic Gaussian noise with E||n||^2 = sigma^2 in `dim`
/// coordinates.
///
/// For n ~ N(0, s^2 I_d), E[exp(||n||^2/k^2)] = (1 - 2 s^2/k^2)^(-d/2). The smallest k
/// with that moment <= e is k^2 = 2 s^2 / (1 - exp(-2/d)); we return twice that k^2 so
/// the moment is well below e and exp(||n||^2/k^2) has finite variance (which keeps
/// Monte-Carlo checks of the moment meaningful). As dim grows k^2 -> 2 sigma^2.
inline double kappa_for_gaussian(double sigma, std::size_t dim) {
  if (dim == 0) throw ConfigError("kappa_for_gaussian: dim must be >= 1");
  const double d = static_cast<double>(dim);
  const double s2 = sigma * sigma / d;
  return std::sqrt(4.0 * s2 / (-std::expm1(-2.0 / d)));
}

/// Additive isotropic gradient noise.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Exact;
  double sigma = 0.0;  // E||n||^2 = sigma^2
  double kappa = 0.0;  // sub-Gaussian scale; 0 for Exact

  static NoiseModel exact() { return {}; }

  /// sigma == 0 collapses to Exact.
  static NoiseModel gaussian(double sigma, std::size_t dim) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise.sigma must be >= 0");
    if (sigma == 0.0) return exact();
    return {NoiseKind::GaussianBoundedVariance, sigma, kappa_for_gaussian(sigma, dim)};
  }

  /// kappa <= 0 selects the documented Gaussian mapping; an explicit kappa must not be
  /// below the minimal admissible value for this sigma and dim.
  static NoiseModel sub_gaussian(double sigma, std::size_t dim, double kappa = 0.0) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise.sigma must be >= 0");
    if (sigma == 0.0) return exact();
    const double mapped = kappa_for_gaussian(sigma, dim);
    if (kappa <= 0.0) kappa = mapped;
    if (kappa < mapped / std::sqrt(2.0)) {
      throw ConfigError("noise.kappa below the admissible minimum for this sigma and dim (kappa >= " +
                        std::to_string(mapped / std::sqrt(2.0)) + ")");
    }
    return {NoiseKind::SubGaussian, sigma, kappa};
  }

  bool is_exact() const noexcept { return kind == NoiseKind::Exact; }

  /// Noise of the mean of `batch` independent draws.
  NoiseModel averaged_over(std::size_t batch) const {
    if (batch == 0) throw ConfigError("batch size must be >= 1");
    NoiseModel out = *this;
    const double s = 1.0 / std::sqrt(static_cast<double>(batch));
    out.sigma *= s;
    out.kappa *= s;
    return out;
  }

  /// One noise vector; all-zero for Exact.
  std::vector<double> draw(std::size_t dim, RngStream& rng) const {
    std::vector<double> out(dim, 0.0);
    if (is_exact()) return out;
    const double sd = sigma / std::sqrt(static_cast<double>(dim));
    for (double& x : out) x = sd * rng.normal();
    return out;
  }
};

/// A scalar loss with an exact gradient.
class DifferentiableLoss {
 public:
  virtual ~DifferentiableLoss() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(const RealVector& x) const = 0;
  virtual RealVector gradient(const RealVector& x) const = 0;
};

using LossHandle = std::shared_ptr<const DifferentiableLoss>;

/// Exact gradient plus one fresh noise draw.
inline RealVector sample_stochastic_gradient(const DifferentiableLoss& loss, const NoiseModel& noise,
                                             const RealVector& x, RngStream& rng) {
  if (x.dim() != loss.dim()) throw ShapeError("sample_stochastic_gradient: dimension mismatch");
  RealVector g = loss.gradient(x);
  if (noise.is_exact()) return g;
  std::vector<double> out = noise.draw(x.dim(), rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  detail::require_finite(out, "sample_stochastic_gradient");
  return RealVector(std::move(out));
}

/// One round's task: l(x) = D sin(<a, x> + b) with additive gradient noise.
class TaskRound final : public DifferentiableLoss {
 public:
  TaskRound(double amplitude, RealVector direction, double offset, NoiseModel noise)
      : amplitude_(amplitude), a_(std::move(direction)), b_(offset), noise_(noise), a_norm_sq_(l2_norm_sq(a_)) {
    if (!(amplitude > 0.0)) throw ConfigError("task amplitude D must be > 0");
  }

  std::size_t dim() const override { return a_.dim(); }
  double amplitude() const noexcept { return amplitude_; }
  const RealVector& direction() const noexcept { return a_; }
  double offset() const noexcept { return b_; }
  const NoiseModel& noise() const noexcept { return noise_; }

  double phase(const RealVector& x) const { return dot(a_, x) + b_; }

  double value(const RealVector& x) const override { return amplitude_ * std::sin(phase(x)); }

  RealVector gradient(const RealVector& x) const override {
    return (amplitude_ * std::cos(phase(x))) * a_;
  }

  /// Hessian-vector product: -D sin(z) <a, v> a.
  RealVector hessian_vector(const RealVector& x, const RealVector& v) const {
    require_same_dim(a_, v, "hessian_vector");
    return (-amplitude_ * std::sin(phase(x)) * dot(a_, v)) * a_;
  }

  LossConstants constants() const {
    const double n = std::sqrt(a_norm_sq_);
    return {amplitude_, amplitude_ * n, amplitude_ * a_norm_sq_, amplitude_ * a_norm_sq_ * n};
  }

 private:
  double amplitude_;
  RealVector a_;
  double b_;
  NoiseModel noise_;
  double a_norm_sq_;
};

inline RealVector sample_stochastic_gradient(const TaskRound& task, const RealVector& x, RngStream& rng) {
  return sample_stochastic_gradient(task, task.noise(), x, rng);
}

enum class StreamFamily { DriftingSine, PiecewiseDrift };

inline const char* to_string(StreamFamily f) {
  return f == StreamFamily::DriftingSine ? "drifting_sine" : "piecewise";
}

struct StreamSpec {
  StreamFamily family = StreamFamily::DriftingSine;
  std::size_t dim = 10;
  double amplitude = 1.0;    // D
  double frequency = 1.0;    // ||a_t||
  double drift_rate = 0.01;  // radians per round (drifting sine)
  std::size_t segment_length = 100;  // rounds per segment (piecewise)
  double jump = std::numbers::pi / 2;  // radians per segment boundary (piecewise)
  double phase = 0.0;        // b at t = 1
  NoiseModel noise{};

  void validate() const {
    if (dim < 1) throw ConfigError("stream.dim must be >= 1");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("stream.amplitude must be > 0");
    if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ConfigError("stream.frequency must be > 0");
    if (!(drift_rate >= 0.0) || !std::isfinite(drift_rate)) throw ConfigError("stream.drift_rate must be >= 0");
    if (segment_length < 1) throw ConfigError("stream.segment_length must be >= 1");
    if (!(jump >= 0.0) || !std::isfinite(jump)) throw ConfigError("stream.jump must be >= 0");
    if (!std::isfinite(phase)) throw ConfigError("stream.phase must be finite");
  }
};

/// Non-stationary sequence of sine tasks; round t is a pure function of (t, seed).
///
/// The direction a_t = frequency * (cos(phi_t) u + sin(phi_t) v) rotates in a plane
/// spanned by a seeded orthonormal pair (u, v), so ||a_t|| and hence every loss
/// constant stays fixed. The offset b_t advances by the same angle phi_t. In one
/// dimension only the offset moves.
class TaskStream {
 public:
  TaskStream(StreamSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    spec_.validate();
    const std::size_t d = spec_.dim;
    std::vector<double> u(d, 0.0), v(d, 0.0);
    if (d == 1) {
      u[0] = 1.0;
    } else {
      RngStream rng(seed, 0x5EED5EED5EEDULL);
      for (auto& x : u) x = rng.normal();
      for (auto& x : v) x = rng.normal();
      normalize(u);
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += u[i] * v[i];
      for (std::size_t i = 0; i < d; ++i) v[i] -= proj * u[i];
      normalize(v);
    }
    u_ = std::move(u);
    v_ = std::move(v);
  }

  const StreamSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t dim() const noexcept { return spec_.dim; }

  /// Rotation angle of round t (t >= 1).
  double angle(std::uint64_t t) const {
    if (t < 1) throw IndexError("TaskStream: rounds are numbered from 1");
    const double k = spec_.family == StreamFamily::DriftingSine
                         ? static_cast<double>(t - 1) * spec_.drift_rate
                         : static_cast<double>((t - 1) / spec_.segment_length) * spec_.jump;
    return k;
  }

  TaskRound round(std::uint64_t t) const {
    const double phi = angle(t);
    std::vector<double> a(spec_.dim);
    const double c = spec_.dim == 1 ? 1.0 : std::cos(phi);
    const double s = spec_.dim == 1 ? 0.0 : std::sin(phi);
    for (std::size_t i = 0; i < spec_.dim; ++i) a[i] = spec_.frequency * (c * u_[i] + s * v_[i]);
    return TaskRound(spec_.amplitude, RealVector(std::move(a)), spec_.phase + phi, spec_.noise);
  }

  LossConstants constants() const {
    const double D = spec_.amplitude;
    const double n = spec_.frequency;
    return {D, D * n, D * n * n, D * n * n * n};
  }

 private:
  static void normalize(std::vector<double>& x) {
    double n = 0.0;
    for (double e : x) n += e * e;
    n = std::sqrt(n);
    for (double& e : x) e /= n;
  }

  StreamSpec spec_;
  std::uint64_t seed_;
  std::vector<double> u_;
  std::vector<double> v_;
};

inline TaskStream make_drifting_sine_stream(std::size_t dim, double amplitude, double frequency, double drift_rate,
                                            NoiseModel noise, std::uint64_t seed) {
  StreamSpec spec;
  spec.family = StreamFamily::DriftingSine;
  spec.dim = dim;
  spec.amplitude = amplitude;
  spec.frequency = frequency;
  spec.drift_rate = drift_rate;
  spec.noise = noise;
  return TaskStream(spec, seed);
}

inline TaskStream make_piecewise_drift_stream(std::size_t dim, std::size_t segment_length, double jump,
                                              NoiseModel noise, std::uint64_t seed, double amplitude = 1.0,
                                              double frequency = 1.0) {
  StreamSpec spec;
  spec.family = StreamFamily::PiecewiseDrift;
  spec.dim = dim;
  spec.amplitude = amplitude;
  spec.frequency = frequency;
  spec.segment_length = segment_length;
  spec.jump = jump;
  spec.noise = noise;
  return TaskStream(spec, seed);
}

/// Analytic (D, L, gamma, H); every segment shares ||a||, so the max over segments
/// equals any one segment's constants.
inline LossConstants loss_constants(const TaskStream& stream) { return stream.constants(); }

}  // namespace dynreg
