#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sostest/hermite.hpp"
#include "sostest/poly.hpp"
#include "sostest/rng.hpp"

namespace sostest {

/// Thrown when the interpolation system is singular or too ill-conditioned to
/// solve; carries the minimum eigenvalue seen.  This is the signal that m is
/// too large for n at the given degree, so it must surface, not be smoothed
/// over by a pseudo-inverse.
class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(double min_eig)
      : std::runtime_error("interpolation system singular or ill-conditioned (min eigenvalue " +
                           std::to_string(min_eig) + ")"),
        min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

class IterationLimitError : public std::runtime_error {
 public:
  explicit IterationLimitError(double estimate)
      : std::runtime_error("power iteration hit the iteration cap"), last_estimate(estimate) {}
  double last_estimate;
};

/// Number of multisets with 0 < |I| <= d, which equals E[sum h_I(p)^2] since
/// every E[h_I^2] = 1.
inline double capacity(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("capacity: need n >= 1 and d >= 1");
  BigInt total = 0;
  for (int i = 1; i <= d; ++i) {
    BigInt binom = 1;
    for (int t = 0; t < i; ++t) binom = binom * (n - 1 + i - t) / (t + 1);
    total += binom;
  }
  return static_cast<double>(total);
}

/// All multisets with 0 < |I| <= d over variables 1..n, in canonical order.
inline std::vector<MultisetIndex> interpolation_basis(int n, int d) {
  std::vector<MultisetIndex> out;
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, int min_var, int remaining) -> void {
    for (int v = min_var; v <= n; ++v) {
      for (int m = 1; m <= remaining; ++m) {
        cur.push_back({v, m});
        out.push_back(MultisetIndex(cur));
        if (remaining - m > 0) self(self, v + 1, remaining - m);
        cur.pop_back();
      }
    }
  };
  rec(rec, 1, d);
  std::sort(out.begin(), out.end());
  return out;
}

/// H with rows indexed by the interpolation basis and columns by points:
/// H_{Ii} = h_I(p_i).
inline Eigen::MatrixXd build_H(const SampleSet& samples, int d) {
  auto basis = interpolation_basis(samples.n, d);
  Eigen::MatrixXd H(basis.size(), samples.m);
  for (int i = 0; i < samples.m; ++i) {
    Eigen::VectorXd row = samples.points.row(i);
    BasisEvaluator ev(std::span<const double>(row.data(), row.size()), d);
    for (std::size_t r = 0; r < basis.size(); ++r) H(r, i) = ev.eval(basis[r]);
  }
  return H;
}

/// M = H^T H / C.
inline Eigen::MatrixXd build_M(const Eigen::MatrixXd& H, double C) {
  return H.transpose() * H / C;
}

/// Largest singular value by power iteration on A^T A; iterates until the
/// Rayleigh-quotient change drops below 1e-12 relative, cap 1e4 sweeps.
inline double spectral_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  if (!A.allFinite()) throw std::invalid_argument("spectral_norm: non-finite entries");
  const int n = static_cast<int>(A.cols());
  Eigen::VectorXd v(n);
  SplitMix64 g(0x5eedULL);
  for (int i = 0; i < n; ++i) v(i) = g.next_double() - 0.5;
  double nv = v.norm();
  if (nv == 0.0) v.setOnes(), nv = v.norm();
  v /= nv;
  double prev = 0.0;
  constexpr int kMaxIter = 10000;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = A.transpose() * (A * v);
    double rayleigh = v.dot(w);  // = sigma^2 estimate
    double wn = w.norm();
    if (wn == 0.0) return 0.0;  // A v = 0 and v maximal only if A = 0 on the cycle
    v = w / wn;
    if (rayleigh >= 0 && std::abs(rayleigh - prev) <= 1e-12 * std::max(rayleigh, 1e-300))
      return std::sqrt(std::max(rayleigh, 0.0));
    prev = rayleigh;
  }
  throw IterationLimitError(std::sqrt(std::max(prev, 0.0)));
}

/// The interpolant g plus the diagnostic bundle measured on this run.
struct InterpolationResult {
  HermitePoly g;
  Eigen::VectorXd x;   // solution of M x = v
  double C = 0;        // capacity
  double M_dev = 0;    // ||M - Id||_2
  double H_norm = 0;   // ||H||_2
  double g_norm = 0;   // ||g|| by Parseval
  double gsq_norm = 0; // ||g^2|| (NaN when skipped)
  double residual = 0; // max_i |g(p_i) - v_i|
};

struct InterpolateOptions {
  bool with_gsq = true;
  double min_eigenvalue_gate = 1e-8;
};

namespace detail {

/// ||g^2|| for a degree-2 Hermite polynomial via the cumulants of the
/// quadratic form g = gamma + b.x + x'Ax:
///   K(t) = -1/2 log det(I - 2tA) + (t^2/2) b'(I-2tA)^{-1} b  (+ gamma t)
/// so kappa_s = s! (2^{s-1} tr(A^s)/s + 2^{s-3} b'A^{s-2}b) for s >= 2, and
/// E[g^4] = k4 + 4 k3 k1 + 3 k2^2 + 6 k2 k1^2 + k1^4 = ||g^2||^2.
inline double gsq_norm_degree2(const HermitePoly& g) {
  const int n = g.n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  double gamma = 0.0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const auto& [I, c] : g.terms) {
    const auto& e = I.entries();
    if (I.empty()) {
      gamma += c;
    } else if (I.total_degree() == 1) {
      b(e[0].first - 1) += c;
    } else if (e.size() == 1) {  // h_2(x_i): (x_i^2 - 1)/sqrt(2)
      A(e[0].first - 1, e[0].first - 1) += c * inv_sqrt2;
      gamma -= c * inv_sqrt2;
    } else {  // x_i x_j
      A(e[0].first - 1, e[1].first - 1) += c / 2.0;
      A(e[1].first - 1, e[0].first - 1) += c / 2.0;
    }
  }
  Eigen::MatrixXd A2 = A * A;
  double trA2 = A2.trace();
  double trA3 = (A2 * A).trace();
  double trA4 = (A2 * A2).trace();
  double k1 = gamma + A.trace();
  double k2 = 2.0 * trA2 + b.squaredNorm();
  double k3 = 8.0 * trA3 + 6.0 * b.dot(A * b);
  double k4 = 48.0 * trA4 + 48.0 * b.dot(A2 * b);
  double Eg4 = k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1 * k1 * k1 * k1;
  return std::sqrt(std::max(Eg4, 0.0));
}

}  // namespace detail

/// ||g^2||: closed form for degree 2, otherwise via the Hermite product.
inline double gsq_norm(const HermitePoly& g) {
  if (g.degree() <= 2) return detail::gsq_norm_degree2(g);
  return norm(multiply(g, g));
}

/// Solve M x = v on the dual-basis construction and assemble
/// g = (1/C) sum_I (Hx)_I h_I, with the full diagnostic bundle.
/// Throws SingularSystemError when min eig(M) is at or below the gate.
inline InterpolationResult interpolate(const SampleSet& samples, const Eigen::VectorXd& v,
                                       int d, const InterpolateOptions& opts = {}) {
  if (v.size() != samples.m)
    throw std::invalid_argument("interpolate: value count differs from point count");
  const double C = capacity(samples.n, d);
  Eigen::MatrixXd H = build_H(samples, d);
  Eigen::MatrixXd M = build_M(H, C);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  double min_eig = samples.m == 0 ? 1.0 : eig.eigenvalues().minCoeff();
  if (samples.m > 0 && min_eig <= opts.min_eigenvalue_gate) throw SingularSystemError(min_eig);

  Eigen::VectorXd x = samples.m == 0
                          ? Eigen::VectorXd(0)
                          : eig.eigenvectors() *
                                (eig.eigenvalues().cwiseInverse().asDiagonal() *
                                 (eig.eigenvectors().transpose() * v));

  InterpolationResult res;
  res.C = C;
  res.x = x;
  res.M_dev = samples.m == 0
                  ? 0.0
                  : spectral_norm(M - Eigen::MatrixXd::Identity(samples.m, samples.m));
  res.H_norm = spectral_norm(H);

  auto basis = interpolation_basis(samples.n, d);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.size());
  if (samples.m > 0) coeffs = (H * x) / C;
  res.g = HermitePoly(samples.n);
  for (std::size_t r = 0; r < basis.size(); ++r) res.g.add_term(basis[r], coeffs(r));
  res.g.prune();
  res.g_norm = norm(res.g);

  res.residual = 0.0;
  for (int i = 0; i < samples.m; ++i) {
    Eigen::VectorXd p = samples.points.row(i);
    double gi = evaluate(res.g, std::span<const double>(p.data(), p.size()));
    res.residual = std::max(res.residual, std::abs(gi - v(i)));
  }
  res.gsq_norm = opts.with_gsq ? gsq_norm(res.g) : std::numeric_limits<double>::quiet_NaN();
  return res;
}

/// interpolate on entrywise square roots, plus the certificate polynomial g^2
/// (always assembled through the Hermite product).  Rejects negative entries;
/// a caller holding a negative sample must route to tester rejection instead.
struct SqrtInterpolationResult {
  InterpolationResult base;
  HermitePoly gsq;
};

inline SqrtInterpolationResult sqrt_interpolate(const SampleSet& samples,
                                                const Eigen::VectorXd& v, int d,
                                                const InterpolateOptions& opts = {}) {
  for (int i = 0; i < v.size(); ++i)
    if (v(i) < 0.0)
      throw std::invalid_argument("sqrt_interpolate: negative value at sample " +
                                  std::to_string(i));
  Eigen::VectorXd sqrtv = v.array().sqrt();
  InterpolateOptions o = opts;
  o.with_gsq = false;
  SqrtInterpolationResult out{interpolate(samples, sqrtv, d, o), HermitePoly(samples.n)};
  out.gsq = multiply(out.base.g, out.base.g);
  out.base.gsq_norm = norm(out.gsq);
  return out;
}

}  // namespace sostest
