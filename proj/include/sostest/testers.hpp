#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sostest/interp.hpp"
#include "sostest/rng.hpp"
#include "sostest/sos.hpp"

namespace sostest {

/// Oracle rounding guard: a value this far below zero counts as negative.
inline bool strictly_negative(double v) { return v < -1e-12 * (1.0 + std::abs(v)); }

/// B = e (4 + ln(1/eps))^{2d}: the concentration bound behind the sampling
/// tester's budget of ceil(10 B / eps) draws.
inline double sample_bound_B(double eps, int d) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("sample_bound_B: eps must lie in (0, 1]");
  if (d < 1) throw std::invalid_argument("sample_bound_B: d must be positive");
  return std::exp(1.0) * std::pow(4.0 + std::log(1.0 / eps), 2.0 * d);
}

inline std::uint64_t nonneg_sample_count(double eps, int d) {
  double raw = std::ceil(10.0 * sample_bound_B(eps, d) / eps);
  if (!(raw < 9.0e18)) throw std::overflow_error("nonneg_sample_count: budget out of range");
  return static_cast<std::uint64_t>(raw);
}

struct TesterVerdict {
  bool yes = false;
  std::uint64_t samples_used = 0;
  std::optional<Eigen::VectorXd> witness_point;     // negative point (NO, sampling tester)
  std::optional<double> witness_value;
  std::optional<FeasibilityReport> report;          // SOS tester outcome
};

/// One-sided sampling tester for non-negativity.  Reads only signs, so the
/// verdict is literally scale-invariant; the caller owns any normalization.
/// Returns NO with the first strictly negative sample, YES after the full
/// budget stays nonnegative.
inline TesterVerdict nonneg_tester(const std::function<double(std::span<const double>)>& f,
                                   int n, double eps, int d, std::uint64_t seed) {
  const std::uint64_t budget = nonneg_sample_count(eps, d);
  std::vector<double> point(n);
  for (std::uint64_t i = 0; i < budget; ++i) {
    SplitMix64 g = SplitMix64::stream(seed, i);
    for (int j = 0; j < n; ++j) point[j] = inverse_normal_cdf(g.next_double());
    double v = f(point);
    if (strictly_negative(v)) {
      TesterVerdict no;
      no.yes = false;
      no.samples_used = i + 1;
      no.witness_point = Eigen::Map<Eigen::VectorXd>(point.data(), n);
      no.witness_value = v;
      return no;
    }
  }
  TesterVerdict yes;
  yes.yes = true;
  yes.samples_used = budget;
  return yes;
}

/// SOS tester on sampled data: NO immediately on any negative value (a sum of
/// squares is pointwise nonnegative), otherwise YES iff the convex feasibility
/// search finds a Gram matrix matching the data inside the norm ball.  When
/// the data is nonnegative and the interpolation system is well conditioned,
/// the square-root interpolant's rank-one Gram matrix seeds the search.
inline TesterVerdict sos_tester(const std::vector<std::pair<Eigen::VectorXd, double>>& samples,
                                int d, double norm_bound = 1.0,
                                const Tolerances& tol = {}, int max_iterations = 100000) {
  TesterVerdict out;
  out.samples_used = samples.size();
  if (samples.empty()) throw std::invalid_argument("sos_tester: no samples");
  const int n = static_cast<int>(samples.front().first.size());

  for (const auto& [p, v] : samples) {
    if (strictly_negative(v)) {
      out.yes = false;
      out.witness_point = p;
      out.witness_value = v;
      return out;
    }
  }

  FeasibilityProblem prob;
  prob.n = n;
  prob.half_degree = d;
  prob.point_constraints = samples;
  prob.norm_bound = norm_bound;
  prob.tol = tol;
  prob.max_iterations = max_iterations;

  // warm start from the square-root interpolant
  SampleSet s;
  s.n = n;
  s.m = static_cast<int>(samples.size());
  s.points.resize(s.m, n);
  Eigen::VectorXd v(s.m);
  for (int i = 0; i < s.m; ++i) {
    s.points.row(i) = samples[i].first;
    v(i) = std::max(samples[i].second, 0.0);
  }
  try {
    auto sq = sqrt_interpolate(s, v, d, {.with_gsq = false});
    prob.warm_start = gram_from_square(to_monomial(sq.base.g), d);
  } catch (const SingularSystemError&) {
    // oversampled or degenerate geometry: run the search cold
  }

  auto res = feasibility_search(prob);
  out.yes = res.report.feasible;
  out.report = res.report;
  return out;
}

}  // namespace sostest
