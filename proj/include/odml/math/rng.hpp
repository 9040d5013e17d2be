#pragma once

#include <cmath>
#include <cstdint>

namespace odml {

/// SplitMix64: a small counter-style 64-bit generator with cheap stream
/// derivation. Every draw path is a pure function of the seed, so results
/// are bit-reproducible across platforms and shard layouts.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Derive an independent sub-seed for stream `stream` of a master seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return g.next_u64();
  }

  /// Uniform draw in the open interval (0, 1).
  double uniform() {
    // 53-bit mantissa; +0.5 keeps the value strictly inside (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 goes through the
  /// boosting identity Gamma(a) = Gamma(a+1) * U^(1/a).
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double w = t * t * t;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * w;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - w + std::log(w))) return d * w;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  /// Raw Student-t draw: Z / sqrt(W/v) with W ~ chi-square(v).
  double student_t(double dof) {
    double z = normal();
    double w = chi_square(dof);
    return z / std::sqrt(w / dof);
  }

  /// Beta(a, b) from two gammas.
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t state_;
};

}  // namespace odml
