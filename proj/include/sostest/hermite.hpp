#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "sostest/multiset_index.hpp"

namespace sostest {

using BigInt = boost::multiprecision::cpp_int;

/// Exact integer coefficient tables for the monic (probabilists') Hermite
/// polynomials He_j under the standard Gaussian weight, together with the
/// squared norms ||He_j||^2 = j!.  The normalized basis is h_j = He_j/sqrt(j!).
///
/// Values are immutable after construction; the process-wide default table is
/// built once and then only read, so concurrent use is safe.
class HermiteTable {
 public:
  static constexpr int kMaxDegree = 64;

  explicit HermiteTable(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 0 || max_degree > kMaxDegree)
      throw std::invalid_argument("HermiteTable: unsupported max degree");
    monic_.resize(max_degree + 1);
    norm_sq_.resize(max_degree + 1);
    monic_[0] = {1};
    if (max_degree >= 1) monic_[1] = {0, 1};
    // He_{j+1} = x He_j - j He_{j-1}
    for (int j = 1; j < max_degree; ++j) {
      std::vector<BigInt> next(j + 2);
      for (int p = 0; p <= j; ++p) next[p + 1] += monic_[j][p];
      for (int p = 0; p < j; ++p) next[p] -= j * monic_[j - 1][p];
      monic_[j + 1] = std::move(next);
    }
    norm_sq_[0] = 1;
    for (int j = 1; j <= max_degree; ++j) norm_sq_[j] = norm_sq_[j - 1] * j;
  }

  int max_degree() const { return max_degree_; }

  const std::vector<BigInt>& monic_coefficients(int j) const {
    if (j < 0 || j > max_degree_)
      throw std::out_of_range("HermiteTable: degree exceeds table limit");
    return monic_[j];
  }

  /// ||He_j||^2 = j!, exactly.
  const BigInt& norm_sq(int j) const {
    if (j < 0 || j > max_degree_)
      throw std::out_of_range("HermiteTable: degree exceeds table limit");
    return norm_sq_[j];
  }

  static const HermiteTable& global() {
    static const HermiteTable table(kMaxDegree);
    return table;
  }

 private:
  int max_degree_;
  std::vector<std::vector<BigInt>> monic_;
  std::vector<BigInt> norm_sq_;
};

/// Exact integer coefficients of the monic Hermite polynomial He_j.
inline std::vector<BigInt> hermite_coefficients(int j) {
  if (j < 0) throw std::invalid_argument("hermite_coefficients: negative degree");
  return HermiteTable::global().monic_coefficients(j);
}

/// E[x^p] over N(0,1): (p-1)!! for even p, 0 for odd p. Exact.
inline BigInt gaussian_moment(int p) {
  if (p < 0) throw std::invalid_argument("gaussian_moment: negative power");
  if (p % 2 == 1) return 0;
  BigInt r = 1;
  for (int i = 1; i <= p / 2; ++i) r *= 2 * i - 1;
  return r;
}

/// Normalized h_j(x) by the stable three-term recurrence
/// h_{j+1} = (x h_j - sqrt(j) h_{j-1}) / sqrt(j+1).
inline double hermite_eval(int j, double x) {
  if (j < 0) throw std::invalid_argument("hermite_eval: negative degree");
  double prev = 1.0;
  if (j == 0) return prev;
  double cur = x;
  for (int t = 1; t < j; ++t) {
    double next = (x * cur - std::sqrt(double(t)) * prev) / std::sqrt(double(t + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Per-point evaluator caching the univariate values h_a(x_i) for a <= max_deg.
/// Cuts basis evaluation to one table lookup per variable of the multiset.
class BasisEvaluator {
 public:
  BasisEvaluator(std::span<const double> point, int max_deg)
      : n_(static_cast<int>(point.size())), max_deg_(max_deg),
        table_((max_deg + 1) * point.size()) {
    for (int i = 0; i < n_; ++i) {
      double x = point[i];
      table_[i * (max_deg_ + 1) + 0] = 1.0;
      if (max_deg_ >= 1) table_[i * (max_deg_ + 1) + 1] = x;
      for (int t = 1; t < max_deg_; ++t) {
        table_[i * (max_deg_ + 1) + t + 1] =
            (x * table_[i * (max_deg_ + 1) + t] -
             std::sqrt(double(t)) * table_[i * (max_deg_ + 1) + t - 1]) /
            std::sqrt(double(t + 1));
      }
    }
  }

  double h(int var, int deg) const { return table_[(var - 1) * (max_deg_ + 1) + deg]; }

  double eval(const MultisetIndex& I) const {
    double r = 1.0;
    for (const auto& [var, mult] : I.entries()) {
      if (var > n_) throw std::invalid_argument("BasisEvaluator: variable exceeds dimension");
      r *= h(var, mult);
    }
    return r;
  }

 private:
  int n_;
  int max_deg_;
  std::vector<double> table_;
};

/// h_I(point) = prod_k h_{I_k}(x_k).
inline double eval_basis(const MultisetIndex& I, std::span<const double> point) {
  if (I.max_var() > static_cast<int>(point.size()))
    throw std::invalid_argument("eval_basis: variable id exceeds point dimension");
  double r = 1.0;
  for (const auto& [var, mult] : I.entries()) r *= hermite_eval(mult, point[var - 1]);
  return r;
}

/// An exact value of the form num / sqrt(radicand), radicand a positive integer.
struct ExactRadical {
  BigInt num;
  BigInt radicand = 1;

  bool is_zero() const { return num == 0; }
  bool is_one() const { return num > 0 && num * num == radicand; }
  double to_double() const {
    return static_cast<double>(num) / std::sqrt(static_cast<double>(radicand));
  }
};

namespace detail {

/// Exact E[He_a(x) He_b(x)] via coefficient convolution + Gaussian moments.
inline BigInt monic_pair_integral(int a, int b) {
  const auto& ta = HermiteTable::global().monic_coefficients(a);
  const auto& tb = HermiteTable::global().monic_coefficients(b);
  BigInt acc = 0;
  for (int i = 0; i <= a; ++i) {
    if (ta[i] == 0) continue;
    for (int j = 0; j <= b; ++j) {
      if (tb[j] == 0) continue;
      if ((i + j) % 2) continue;
      acc += ta[i] * tb[j] * gaussian_moment(i + j);
    }
  }
  return acc;
}

/// Exact E[He_a He_b He_c].
inline BigInt monic_triple_integral(int a, int b, int c) {
  const auto& ta = HermiteTable::global().monic_coefficients(a);
  const auto& tb = HermiteTable::global().monic_coefficients(b);
  // convolve He_a * He_b, then integrate against He_c
  std::vector<BigInt> prod(a + b + 1);
  for (int i = 0; i <= a; ++i) {
    if (ta[i] == 0) continue;
    for (int j = 0; j <= b; ++j) {
      if (tb[j] == 0) continue;
      prod[i + j] += ta[i] * tb[j];
    }
  }
  const auto& tc = HermiteTable::global().monic_coefficients(c);
  BigInt acc = 0;
  for (int p = 0; p <= a + b; ++p) {
    if (prod[p] == 0) continue;
    for (int q = 0; q <= c; ++q) {
      if (tc[q] == 0) continue;
      if ((p + q) % 2) continue;
      acc += prod[p] * tc[q] * gaussian_moment(p + q);
    }
  }
  return acc;
}

}  // namespace detail

/// Exact <h_I, h_J> over N(0, Id): the orthonormality oracle.  Computed by
/// expanding to monomials per variable and integrating with gaussian_moment;
/// the result is num / sqrt(prod_k I_k! J_k!).
inline ExactRadical inner_product_exact(const MultisetIndex& I, const MultisetIndex& J) {
  ExactRadical r{1, 1};
  auto a = I.entries().begin();
  auto b = J.entries().begin();
  while (a != I.entries().end() || b != J.entries().end()) {
    int var, ma = 0, mb = 0;
    if (b == J.entries().end() || (a != I.entries().end() && a->first < b->first)) {
      var = a->first; ma = a->second; ++a;
    } else if (a == I.entries().end() || b->first < a->first) {
      var = b->first; mb = b->second; ++b;
    } else {
      var = a->first; ma = a->second; mb = b->second; ++a; ++b;
    }
    (void)var;
    r.num *= detail::monic_pair_integral(ma, mb);
    if (r.num == 0) return {0, 1};
    r.radicand *= HermiteTable::global().norm_sq(ma) * HermiteTable::global().norm_sq(mb);
  }
  return r;
}

/// Univariate linearization h_a h_b = sum_c Q^c_{ab} h_c with
/// Q^c_{ab} = E[He_a He_b He_c] / sqrt(a! b! c!), derived from the exact
/// integrals rather than a closed-form transcription.  Memoized for small
/// degrees (the hot path of polynomial multiplication).
inline const std::vector<std::pair<int, double>>& univariate_product_coeffs(int a, int b) {
  if (a > b) std::swap(a, b);
  static constexpr int kMemoLimit = 16;
  static const auto memo = [] {
    std::vector<std::vector<std::vector<std::pair<int, double>>>> t(
        kMemoLimit + 1, std::vector<std::vector<std::pair<int, double>>>(kMemoLimit + 1));
    for (int a2 = 0; a2 <= kMemoLimit; ++a2)
      for (int b2 = a2; b2 <= kMemoLimit; ++b2) {
        std::vector<std::pair<int, double>> out;
        for (int c = b2 - a2; c <= a2 + b2; c += 2) {
          BigInt num = detail::monic_triple_integral(a2, b2, c);
          if (num == 0) continue;
          BigInt rad = HermiteTable::global().norm_sq(a2) *
                       HermiteTable::global().norm_sq(b2) *
                       HermiteTable::global().norm_sq(c);
          out.push_back({c, ExactRadical{num, rad}.to_double()});
        }
        t[a2][b2] = std::move(out);
      }
    return t;
  }();
  if (b <= kMemoLimit) return memo[a][b];

  static std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> overflow;
  static std::mutex overflow_mutex;
  std::lock_guard<std::mutex> lock(overflow_mutex);
  auto it = overflow.find({a, b});
  if (it != overflow.end()) return it->second;
  std::vector<std::pair<int, double>> out;
  for (int c = b - a; c <= a + b; c += 2) {
    BigInt num = detail::monic_triple_integral(a, b, c);
    if (num == 0) continue;
    BigInt rad = HermiteTable::global().norm_sq(a) * HermiteTable::global().norm_sq(b) *
                 HermiteTable::global().norm_sq(c);
    out.push_back({c, ExactRadical{num, rad}.to_double()});
  }
  return overflow.emplace(std::pair{a, b}, std::move(out)).first->second;
}

/// Full linearization h_I h_J = sum_K Q_{K(I,J)} h_K.  The support satisfies
/// I delta J <= K <= I + J with per-variable parity matching.
inline std::map<MultisetIndex, double> product_expansion(const MultisetIndex& I,
                                                         const MultisetIndex& J) {
  std::map<MultisetIndex, double> acc;
  acc[MultisetIndex{}] = 1.0;
  auto a = I.entries().begin();
  auto b = J.entries().begin();
  while (a != I.entries().end() || b != J.entries().end()) {
    int var, ma = 0, mb = 0;
    if (b == J.entries().end() || (a != I.entries().end() && a->first < b->first)) {
      var = a->first; ma = a->second; ++a;
    } else if (a == I.entries().end() || b->first < a->first) {
      var = b->first; mb = b->second; ++b;
    } else {
      var = a->first; ma = a->second; mb = b->second; ++a; ++b;
    }
    const auto& uni = univariate_product_coeffs(ma, mb);
    std::map<MultisetIndex, double> next;
    for (const auto& [K, coeff] : acc) {
      for (const auto& [c, q] : uni) {
        MultisetIndex K2 = c == 0 ? K : K.merged(MultisetIndex({{var, c}}));
        next[K2] += coeff * q;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace sostest
