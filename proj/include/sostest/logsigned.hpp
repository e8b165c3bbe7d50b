#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sostest {

using Rational = boost::multiprecision::cpp_rational;
/// ~212-bit binary float; every magnitude comparison below is carried out at
/// this precision (the certificate values overflow double by thousands of
/// binary orders of magnitude).
using Real200 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<64>>;

namespace detail {

inline boost::multiprecision::cpp_int rational_floor(const Rational& q) {
  boost::multiprecision::cpp_int num = boost::multiprecision::numerator(q);
  boost::multiprecision::cpp_int den = boost::multiprecision::denominator(q);
  boost::multiprecision::cpp_int quo = num / den;
  if (num < 0 && quo * den != num) --quo;
  return quo;
}

inline Real200 rational_to_real(const Rational& q) {
  return Real200(boost::multiprecision::numerator(q)) /
         Real200(boost::multiprecision::denominator(q));
}

inline Real200 log2_real(const Real200& x) {
  using std::log;
  return log(x) / log(Real200(2));
}

}  // namespace detail

/// A signed number stored in exact factored form
///     value = sign * coeff * prod_i base_i^{exp_i},
/// coeff a positive rational, bases canonical (prime where factorable) and
/// exponents strictly fractional in (0,1).  Multiplication adds exponents
/// exactly.  Sums that stay within one irrational class remain exact; mixed
/// sums degrade to a 200-bit signed log magnitude, which is also the
/// representation every comparison bottoms out in.
class LogSigned {
 public:
  using BigInt = boost::multiprecision::cpp_int;
  using Factors = std::vector<std::pair<BigInt, Rational>>;

  LogSigned() = default;  // zero

  static LogSigned zero() { return LogSigned(); }
  static LogSigned one() { return from_rational(1); }

  static LogSigned from_rational(const Rational& q) {
    LogSigned v;
    if (q == 0) return v;
    v.sign_ = q > 0 ? 1 : -1;
    v.exact_ = true;
    v.coeff_ = q > 0 ? q : Rational(-q);
    return v;
  }

  /// value = sign * coeff * prod base^exp with arbitrary rational exponents;
  /// bases are factored (trial division; large cofactors stay opaque) and the
  /// integer parts of the exponents are folded into the coefficient.
  static LogSigned from_power_product(int sign, const Rational& coeff, const Factors& raw) {
    if (sign == 0 || coeff == 0) return zero();
    if (coeff < 0) throw std::invalid_argument("LogSigned: coefficient must be positive");
    std::map<BigInt, Rational> acc;
    for (const auto& [base, exp] : raw) {
      if (base <= 0) throw std::invalid_argument("LogSigned: bases must be positive");
      if (base == 1 || exp == 0) continue;
      factor_into(acc, base, exp);
    }
    LogSigned v;
    v.sign_ = sign > 0 ? 1 : -1;
    v.exact_ = true;
    v.coeff_ = coeff;
    for (const auto& [base, exp] : acc) {
      BigInt ip = detail::rational_floor(exp);
      Rational frac = exp - Rational(ip);
      if (ip != 0) {
        // fold base^ip into the rational coefficient
        BigInt p = boost::multiprecision::pow(base, static_cast<unsigned>(abs(ip)));
        if (ip > 0)
          v.coeff_ *= Rational(p);
        else
          v.coeff_ /= Rational(p);
      }
      if (frac != 0) v.factors_.push_back({base, frac});
    }
    if (v.coeff_ == 0) return zero();
    return v;
  }

  static LogSigned from_log2(int sign, const Real200& log2_magnitude) {
    LogSigned v;
    if (sign == 0) return v;
    v.sign_ = sign > 0 ? 1 : -1;
    v.exact_ = false;
    v.log2_ = log2_magnitude;
    return v;
  }

  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }
  bool exact() const { return sign_ == 0 || exact_; }
  const Rational& coeff() const { return coeff_; }
  const Factors& factors() const { return factors_; }

  /// Exact rational value; valid only when the factor list is empty.
  Rational to_rational() const {
    if (sign_ == 0) return 0;
    if (!exact_ || !factors_.empty())
      throw std::domain_error("LogSigned: value is not rational");
    return sign_ > 0 ? coeff_ : Rational(-coeff_);
  }

  bool is_rational() const { return sign_ == 0 || (exact_ && factors_.empty()); }

  /// log2 |value| at 200-bit precision.  Undefined for zero.
  Real200 log2() const {
    if (sign_ == 0) throw std::domain_error("LogSigned: log2 of zero");
    if (!exact_) return log2_;
    Real200 l = detail::log2_real(detail::rational_to_real(coeff_));
    for (const auto& [base, exp] : factors_)
      l += detail::rational_to_real(exp) * detail::log2_real(Real200(base));
    return l;
  }

  double log2_double() const { return static_cast<double>(log2()); }

  double to_double() const {
    if (sign_ == 0) return 0.0;
    Real200 l = log2();
    if (l > 1060) return sign_ > 0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    if (l < -1060) return 0.0;
    return sign_ * std::exp2(static_cast<double>(l));
  }

  LogSigned operator-() const {
    LogSigned v = *this;
    v.sign_ = -v.sign_;
    return v;
  }

  friend LogSigned operator*(const LogSigned& a, const LogSigned& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return zero();
    if (a.exact_ && b.exact_) {
      Factors raw = a.factors_;
      raw.insert(raw.end(), b.factors_.begin(), b.factors_.end());
      return from_power_product(a.sign_ * b.sign_, a.coeff_ * b.coeff_, raw);
    }
    return from_log2(a.sign_ * b.sign_, a.log2() + b.log2());
  }

  friend LogSigned operator/(const LogSigned& a, const LogSigned& b) {
    if (b.sign_ == 0) throw std::domain_error("LogSigned: division by zero");
    if (a.sign_ == 0) return zero();
    if (a.exact_ && b.exact_) {
      Factors raw = a.factors_;
      for (const auto& [base, exp] : b.factors_) raw.push_back({base, -exp});
      return from_power_product(a.sign_ * b.sign_, a.coeff_ / b.coeff_, raw);
    }
    return from_log2(a.sign_ * b.sign_, a.log2() - b.log2());
  }

  LogSigned squared() const { return (*this) * (*this); }

  /// Same irrational class (so sums of the two stay exact)?
  bool same_class(const LogSigned& o) const {
    return exact_ && o.exact_ && factors_ == o.factors_;
  }

  /// Three-way compare, sign-aware; magnitudes through 200-bit logs unless an
  /// exact rational fast path applies.
  friend int compare(const LogSigned& a, const LogSigned& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    if (a.sign_ == 0) return 0;
    int mag;
    if (a.same_class(b)) {
      mag = a.coeff_ == b.coeff_ ? 0 : (a.coeff_ < b.coeff_ ? -1 : 1);
    } else {
      Real200 la = a.log2(), lb = b.log2();
      mag = la == lb ? 0 : (la < lb ? -1 : 1);
    }
    return a.sign_ > 0 ? mag : -mag;
  }

  friend bool operator<(const LogSigned& a, const LogSigned& b) { return compare(a, b) < 0; }
  friend bool operator>(const LogSigned& a, const LogSigned& b) { return compare(a, b) > 0; }

 private:
  static void factor_into(std::map<BigInt, Rational>& acc, BigInt base, const Rational& exp) {
    static constexpr std::uint64_t kTrialLimit = 1000000;
    for (std::uint64_t p = 2; p <= kTrialLimit && BigInt(p) * p <= base; p += (p == 2 ? 1 : 2)) {
      while (base % p == 0) {
        acc[BigInt(p)] += exp;
        base /= p;
      }
    }
    if (base > 1) acc[base] += exp;  // prime, or an opaque cofactor
  }

  int sign_ = 0;
  bool exact_ = true;
  Rational coeff_ = 0;
  Factors factors_;
  Real200 log2_ = 0;
};

/// Exact accumulator for sums of LogSigned terms.  Terms are grouped by
/// irrational class and summed as rationals inside each class; a sum that
/// collapses to one class is exact, anything else is evaluated at 200 bits.
class LogSum {
 public:
  void add(const LogSigned& t) {
    if (t.is_zero()) return;
    if (t.exact()) {
      Rational signed_coeff = t.sign() > 0 ? t.coeff() : Rational(-t.coeff());
      groups_[t.factors()] += signed_coeff;
    } else {
      inexact_.push_back(t);
    }
  }

  void add_scaled(const Rational& s, const LogSigned& t) {
    if (s == 0) return;
    add(LogSigned::from_rational(s) * t);
  }

  LogSigned reduce() const {
    std::vector<std::pair<LogSigned::Factors, Rational>> live;
    for (const auto& [cls, coeff] : groups_)
      if (coeff != 0) live.push_back({cls, coeff});
    if (inexact_.empty()) {
      if (live.empty()) return LogSigned::zero();
      if (live.size() == 1) {
        const auto& [cls, coeff] = live.front();
        LogSigned::Factors raw = cls;
        return LogSigned::from_power_product(coeff > 0 ? 1 : -1,
                                             coeff > 0 ? coeff : Rational(-coeff), raw);
      }
    }
    // mixed classes: 200-bit evaluation
    Real200 total = 0;
    for (const auto& [cls, coeff] : live) {
      Real200 v = detail::rational_to_real(coeff);
      for (const auto& [base, exp] : cls) {
        using std::pow;
        v *= pow(Real200(base), detail::rational_to_real(exp));
      }
      total += v;
    }
    for (const auto& t : inexact_) {
      using std::pow;
      total += t.sign() * pow(Real200(2), t.log2());
    }
    if (total == 0) return LogSigned::zero();
    int sign = total > 0 ? 1 : -1;
    using std::abs;
    return LogSigned::from_log2(sign, detail::log2_real(abs(total)));
  }

 private:
  std::map<LogSigned::Factors, Rational> groups_;
  std::vector<LogSigned> inexact_;
};

}  // namespace sostest
