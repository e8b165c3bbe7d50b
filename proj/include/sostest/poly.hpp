#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "sostest/hermite.hpp"
#include "sostest/multiset_index.hpp"

namespace sostest {

inline constexpr double kCoeffZeroThreshold = 1e-15;

namespace detail {

template <class Tag>
struct SparsePoly {
  int n = 0;
  std::map<MultisetIndex, double> terms;

  SparsePoly() = default;
  explicit SparsePoly(int n_) : n(n_) {
    if (n_ < 0) throw std::invalid_argument("polynomial: negative variable count");
  }

  int degree() const {
    int d = 0;
    for (const auto& [I, c] : terms) d = std::max(d, I.total_degree());
    return d;
  }

  double coeff(const MultisetIndex& I) const {
    auto it = terms.find(I);
    return it == terms.end() ? 0.0 : it->second;
  }

  void add_term(const MultisetIndex& I, double c) {
    if (I.max_var() > n) throw std::invalid_argument("polynomial: variable id exceeds n");
    auto [it, inserted] = terms.emplace(I, c);
    if (!inserted) it->second += c;
  }

  /// Drop coefficients below the absolute zero threshold.
  void prune(double threshold = kCoeffZeroThreshold) {
    for (auto it = terms.begin(); it != terms.end();) {
      if (std::abs(it->second) < threshold)
        it = terms.erase(it);
      else
        ++it;
    }
  }

  SparsePoly& operator+=(const SparsePoly& o) {
    if (n != o.n) throw std::invalid_argument("polynomial: mixed variable counts");
    for (const auto& [I, c] : o.terms) add_term(I, c);
    prune();
    return *this;
  }

  SparsePoly& operator*=(double s) {
    for (auto& [I, c] : terms) c *= s;
    prune();
    return *this;
  }

  friend SparsePoly operator+(SparsePoly a, const SparsePoly& b) { return a += b; }
  friend SparsePoly operator*(SparsePoly a, double s) { return a *= s; }
  friend SparsePoly operator*(double s, SparsePoly a) { return a *= s; }
  friend SparsePoly operator-(SparsePoly a, const SparsePoly& b) {
    SparsePoly nb = b;
    nb *= -1.0;
    return a += nb;
  }
};

struct HermiteTag {};
struct MonomialTag {};

}  // namespace detail

/// Sparse polynomial stored by coefficients over the normalized Hermite basis
/// h_I.  Parseval: ||f||^2 over N(0,Id) equals the sum of squared coefficients.
using HermitePoly = detail::SparsePoly<detail::HermiteTag>;

/// Sparse polynomial stored by monomial coefficients (x_I).
using MonomialPoly = detail::SparsePoly<detail::MonomialTag>;

/// sqrt(sum c_I^2): the Gaussian-measure norm read off by Parseval.
inline double norm(const HermitePoly& f) {
  double s = 0.0;
  for (const auto& [I, c] : f.terms) s += c * c;
  return std::sqrt(s);
}

namespace detail {

/// Exact expansion table x^a = sum_j c_{a,j} He_j, built from the integer
/// recurrence x He_j = He_{j+1} + j He_{j-1}.
inline const std::vector<BigInt>& monomial_over_monic(int a) {
  static const auto table = [] {
    std::vector<std::vector<BigInt>> t(HermiteTable::kMaxDegree + 1);
    t[0] = {1};
    for (int p = 0; p < HermiteTable::kMaxDegree; ++p) {
      std::vector<BigInt> next(p + 2);
      for (int j = 0; j <= p; ++j) {
        if (t[p][j] == 0) continue;
        next[j + 1] += t[p][j];
        if (j >= 1) next[j - 1] += j * t[p][j];
      }
      t[p + 1] = std::move(next);
    }
    return t;
  }();
  if (a < 0 || a > HermiteTable::kMaxDegree)
    throw std::out_of_range("monomial_over_monic: degree exceeds table limit");
  return table[a];
}

}  // namespace detail

/// Exact triangular change of basis, monomials -> normalized Hermite.
inline HermitePoly to_hermite(const MonomialPoly& f) {
  HermitePoly out(f.n);
  for (const auto& [I, c] : f.terms) {
    // per-variable expansion x^a = sum_j c_j He_j, tensored across variables
    std::map<MultisetIndex, double> acc;
    acc[MultisetIndex{}] = c;
    for (const auto& [var, mult] : I.entries()) {
      const auto& uni = detail::monomial_over_monic(mult);
      std::map<MultisetIndex, double> next;
      for (const auto& [K, q] : acc) {
        for (int j = 0; j <= mult; ++j) {
          if (uni[j] == 0) continue;
          // He_j = sqrt(j!) h_j
          double w = static_cast<double>(uni[j]) *
                     std::sqrt(static_cast<double>(HermiteTable::global().norm_sq(j)));
          MultisetIndex K2 = j == 0 ? K : K.merged(MultisetIndex({{var, j}}));
          next[K2] += q * w;
        }
      }
      acc = std::move(next);
    }
    for (const auto& [K, q] : acc) out.add_term(K, q);
  }
  out.prune();
  return out;
}

/// Inverse change of basis, normalized Hermite -> monomials.
inline MonomialPoly to_monomial(const HermitePoly& f) {
  MonomialPoly out(f.n);
  for (const auto& [I, c] : f.terms) {
    std::map<MultisetIndex, double> acc;
    acc[MultisetIndex{}] = c;
    for (const auto& [var, mult] : I.entries()) {
      const auto& he = HermiteTable::global().monic_coefficients(mult);
      double inv_norm =
          1.0 / std::sqrt(static_cast<double>(HermiteTable::global().norm_sq(mult)));
      std::map<MultisetIndex, double> next;
      for (const auto& [K, q] : acc) {
        for (int p = 0; p <= mult; ++p) {
          if (he[p] == 0) continue;
          MultisetIndex K2 = p == 0 ? K : K.merged(MultisetIndex({{var, p}}));
          next[K2] += q * static_cast<double>(he[p]) * inv_norm;
        }
      }
      acc = std::move(next);
    }
    for (const auto& [K, q] : acc) out.add_term(K, q);
  }
  out.prune();
  return out;
}

/// Bilinear product via the exact Hermite linearization.
inline HermitePoly multiply(const HermitePoly& f, const HermitePoly& g) {
  if (f.n != g.n) throw std::invalid_argument("multiply: mixed variable counts");
  if (f.degree() + g.degree() > HermiteTable::kMaxDegree)
    throw std::out_of_range("multiply: combined degree exceeds Hermite table limit");
  HermitePoly out(f.n);
  for (const auto& [I, ci] : f.terms) {
    for (const auto& [J, cj] : g.terms) {
      for (const auto& [K, q] : product_expansion(I, J)) out.add_term(K, ci * cj * q);
    }
  }
  out.prune();
  return out;
}

inline double evaluate(const HermitePoly& f, std::span<const double> point) {
  if (static_cast<int>(point.size()) < f.n)
    throw std::invalid_argument("evaluate: point dimension below variable count");
  BasisEvaluator ev(point, f.degree());
  double s = 0.0;
  for (const auto& [I, c] : f.terms) s += c * ev.eval(I);
  return s;
}

inline double evaluate(const MonomialPoly& f, std::span<const double> point) {
  if (static_cast<int>(point.size()) < f.n)
    throw std::invalid_argument("evaluate: point dimension below variable count");
  double s = 0.0;
  for (const auto& [I, c] : f.terms) {
    double t = c;
    for (const auto& [var, mult] : I.entries()) t *= std::pow(point[var - 1], mult);
    s += t;
  }
  return s;
}

}  // namespace sostest
