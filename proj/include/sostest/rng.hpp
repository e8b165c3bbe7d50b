#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sostest {

/// Counter-based 64-bit generator (SplitMix64).  The state advances by a fixed
/// odd constant and each output is a finalizer of the counter, so streams can
/// be split deterministically: stream t of seed s starts from the finalized
/// counter s + (t+1)*gamma.  Bit-reproducible across platforms.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Substream for (seed, stream index): used one stream per sampled point /
  /// per equation so draws stay aligned regardless of evaluation order.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_index) {
    return SplitMix64(mix(seed + (stream_index + 1) * kGamma));
  }

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double strictly inside (0,1): (x >> 11 + 0.5) * 2^-53.
  double next_double() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t state_;
};

/// Inverse of the standard normal CDF by Acklam's rational approximation
/// (relative error below 1.15e-9 over (0,1)).  Deterministic draw count: one
/// uniform per normal deviate.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inverse_normal_cdf: argument outside (0,1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// m points drawn i.i.d. from N(0, Id_n), reproducible bit-for-bit from
/// (n, m, seed): point i consumes exactly n uniforms from stream i.
struct SampleSet {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd points;  // m x n, row i = point p_i
};

inline SampleSet sample_gaussian(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 0) throw std::invalid_argument("sample_gaussian: bad dimensions");
  SampleSet s{n, m, seed, Eigen::MatrixXd(m, n)};
  for (int i = 0; i < m; ++i) {
    SplitMix64 g = SplitMix64::stream(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < n; ++j) s.points(i, j) = inverse_normal_cdf(g.next_double());
  }
  return s;
}

}  // namespace sostest
