#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sostest/logsigned.hpp"
#include "sostest/poly.hpp"
#include "sostest/rng.hpp"

namespace sostest {

class CertificateError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The generalized Motzkin polynomial in variables 1,2 of n:
/// (r/2) x^{r+2} y^r + (r/2) x^r y^{r+2} - (r+1) x^r y^r + (1+c),
/// nonnegative with minimum >= c by AM-GM, of degree 2r+2.
inline MonomialPoly motzkin_polynomial(int r, double c, int n = 2) {
  if (r < 2 || r % 2 != 0) throw std::invalid_argument("motzkin_polynomial: r must be even, >= 2");
  if (c < 0) throw std::invalid_argument("motzkin_polynomial: c must be nonnegative");
  if (n < 2) throw std::invalid_argument("motzkin_polynomial: needs at least two variables");
  MonomialPoly f(n);
  f.add_term(MultisetIndex({{1, r + 2}, {2, r}}), r / 2.0);
  f.add_term(MultisetIndex({{1, r}, {2, r + 2}}), r / 2.0);
  f.add_term(MultisetIndex({{1, r}, {2, r}}), -(r + 1.0));
  f.add_term(MultisetIndex{}, 1.0 + c);
  return f;
}

/// Pseudo-expectation refuting the generalized Motzkin polynomial.  Values on
/// x^a y^b follow a two-parameter power ladder in k and d^3 = (2r+2)^3 with a
/// tower base B = (k d^3)^{3 d^3}; products with other variables split off as
/// true Gaussian moments, so E~[h_I] = 0 exactly whenever I touches a third
/// variable.  k is carried exactly as k_base^(1/k_root).
class MotzkinPE {
 public:
  /// Default normalization: k = (2+c)^{1/r}, nu = (r+2)^2 + (2r+2)^2 (the
  /// exponent that pins E~[x^{r+2} y^r] = 1).
  MotzkinPE(int r, double c)
      : MotzkinPE(r, c, Rational(2) + to_rational(c), r, default_nu(r)) {}

  MotzkinPE(int r, double c, Rational k_base, int k_root, Rational nu)
      : r_(r), c_(to_rational(c)), k_base_(std::move(k_base)), k_root_(k_root), nu_(std::move(nu)) {
    if (r_ < 2 || r_ % 2 != 0) throw std::invalid_argument("MotzkinPE: r must be even, >= 2");
    if (c < 0) throw std::invalid_argument("MotzkinPE: c must be nonnegative");
    if (k_root_ < 1 || k_base_ <= 1)
      throw std::invalid_argument("MotzkinPE: requires k > 1");
  }

  static Rational default_nu(int r) {
    return Rational((r + 2) * (r + 2) + (2 * r + 2) * (2 * r + 2));
  }

  int r() const { return r_; }
  int degree() const { return 2 * r_ + 2; }     // d: the top monomial degree covered
  int half_degree() const { return r_ + 1; }
  const Rational& c() const { return c_; }
  const Rational& k_base() const { return k_base_; }
  int k_root() const { return k_root_; }
  const Rational& nu() const { return nu_; }

  /// E~[x^a y^b] for the two distinguished variables.  Ungated in degree so
  /// the ladder identities can be probed directly.
  LogSigned xy_value(int a, int b) const {
    if (a < 0 || b < 0) throw std::invalid_argument("MotzkinPE: negative powers");
    const int d = degree();
    const Rational d3 = Rational(d) * d * d;
    const Rational bigB = Rational(3) * d3;  // B = (k d^3)^{3 d^3}: exponent multiplier
    if (a == 0 && b == 0) return LogSigned::one();
    if (a == b) {
      if (a <= r_) {
        // 4^{a^2 - r^2} k^a
        return make_value(Rational(a * a - r_ * r_), Rational(a), Rational(0));
      }
      // above the ladder's diagonal range the equal-power formula of the
      // off-diagonal cases keeps the moment matrix inside the PSD cone
      Rational kd3_exp = Rational(a * a + (a + b) * (a + b)) - nu_ +
                         bigB * (Rational(a) - Rational(r_ + 2, r_) * b);
      return make_value(Rational(0), kd3_exp, kd3_exp);
    }
    if (a > b) {
      Rational kd3_exp = Rational(a * a + (a + b) * (a + b)) - nu_ +
                         bigB * (Rational(a) - Rational(r_ + 2, r_) * b);
      return make_value(Rational(0), kd3_exp, kd3_exp);
    }
    Rational kd3_exp = Rational(b * b + (a + b) * (a + b)) - nu_ +
                       bigB * (Rational(b) - Rational(r_ + 2, r_) * a);
    return make_value(Rational(0), kd3_exp, kd3_exp);
  }

  /// E~[x_I] for a general monomial: the (x,y) ladder times true Gaussian
  /// moments of the remaining variables.
  LogSigned value(const MultisetIndex& I) const {
    int a = 0, b = 0;
    Rational moments = 1;
    for (const auto& [var, mult] : I.entries()) {
      if (var == 1) {
        a = mult;
      } else if (var == 2) {
        b = mult;
      } else {
        if (mult % 2 == 1) return LogSigned::zero();
        moments *= Rational(gaussian_moment(mult));
      }
    }
    return LogSigned::from_rational(moments) * xy_value(a, b);
  }

  /// log2(k d^3): the scale every reported bound is expressed against.
  Real200 log2_kd3() const {
    const int d = degree();
    Real200 lk = detail::log2_real(Real200(boost::multiprecision::numerator(k_base_))) -
                 detail::log2_real(Real200(boost::multiprecision::denominator(k_base_)));
    return lk / k_root_ + 3 * detail::log2_real(Real200(d));
  }

 private:
  static Rational to_rational(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("MotzkinPE: non-finite parameter");
    return Rational(x);
  }

  /// 4^{e4} k^{ek} (d^3)^{eD}
  LogSigned make_value(const Rational& e4, const Rational& ek, const Rational& eD) const {
    const int d = degree();
    LogSigned::Factors raw;
    if (e4 != 0) raw.push_back({LogSigned::BigInt(4), e4});
    if (ek != 0) {
      raw.push_back({boost::multiprecision::numerator(k_base_), ek / k_root_});
      if (boost::multiprecision::denominator(k_base_) != 1)
        raw.push_back({boost::multiprecision::denominator(k_base_), -ek / k_root_});
    }
    if (eD != 0) raw.push_back({LogSigned::BigInt(d) * d * d, eD});
    return LogSigned::from_power_product(1, 1, raw);
  }

  int r_;
  Rational c_;
  Rational k_base_;
  int k_root_;
  Rational nu_;
};

/// Reference pseudo-expectation: the honest Gaussian expectation (a point of
/// comparison for the distance machinery; every h_I with |I| > 0 integrates
/// to zero).
class GaussianPE {
 public:
  explicit GaussianPE(int half_degree) : half_(half_degree) {}
  int half_degree() const { return half_; }
  LogSigned value(const MultisetIndex& I) const {
    Rational m = 1;
    for (const auto& [var, mult] : I.entries()) {
      if (mult % 2 == 1) return LogSigned::zero();
      m *= Rational(gaussian_moment(mult));
    }
    return LogSigned::from_rational(m);
  }

 private:
  int half_;
};

/// Linear extension of a pseudo-expectation to a monomial polynomial, with
/// exact coefficient arithmetic (double coefficients are exact rationals).
template <class PE>
LogSigned pe_apply(const PE& pe, const MonomialPoly& f) {
  if (f.degree() > 2 * pe.half_degree())
    throw std::invalid_argument("pe_apply: polynomial degree exceeds 2 * half_degree");
  LogSum acc;
  for (const auto& [I, coeff] : f.terms) acc.add_scaled(Rational(coeff), pe.value(I));
  return acc.reduce();
}

/// E~[h_I]: the Hermite basis element expanded per variable with exact integer
/// coefficients, evaluated monomial by monomial, then normalized by
/// 1/sqrt(prod_k I_k!).
template <class PE>
LogSigned pe_hermite(const PE& pe, const MultisetIndex& I) {
  if (I.total_degree() > 2 * pe.half_degree())
    throw std::invalid_argument("pe_hermite: degree exceeds 2 * half_degree");
  struct VarExpansion {
    int var;
    const std::vector<BigInt>* coeffs;
  };
  std::vector<VarExpansion> vars;
  BigInt norm_sq = 1;
  for (const auto& [var, mult] : I.entries()) {
    vars.push_back({var, &HermiteTable::global().monic_coefficients(mult)});
    norm_sq *= HermiteTable::global().norm_sq(mult);
  }
  LogSum acc;
  std::vector<std::pair<int, int>> powers;  // (var, power) stack
  auto rec = [&](auto&& self, std::size_t vi, const BigInt& coeff) -> void {
    if (coeff == 0) return;
    if (vi == vars.size()) {
      std::vector<MultisetIndex::Entry> e;
      for (const auto& [var, p] : powers)
        if (p > 0) e.push_back({var, p});
      acc.add_scaled(Rational(coeff), pe.value(MultisetIndex(e)));
      return;
    }
    const auto& cs = *vars[vi].coeffs;
    for (int p = 0; p < static_cast<int>(cs.size()); ++p) {
      if (cs[p] == 0) continue;
      powers.push_back({vars[vi].var, p});
      self(self, vi + 1, coeff * cs[p]);
      powers.pop_back();
    }
  };
  rec(rec, 0, BigInt(1));
  LogSigned total = acc.reduce();
  if (total.is_zero()) return total;
  // multiply by (prod I_k!)^{-1/2}
  return total * LogSigned::from_power_product(1, 1, {{norm_sq, Rational(-1, 2)}});
}

/// Moment matrix of the two-variable ladder: indexed by monomials x^a y^b
/// with a+b <= half_degree, entries E~[x^{a1+a2} y^{b1+b2}].  The full
/// n-variable moment matrix is a principal submatrix of this block tensored
/// with the Gaussian moment matrix of the remaining variables.
struct MotzkinMomentMatrix {
  std::vector<std::pair<int, int>> index;
  std::vector<std::vector<LogSigned>> entries;

  /// S_{uv} = M_{uv} / sqrt(M_uu M_vv), evaluated from the 200-bit logs.
  Eigen::MatrixXd scaled() const {
    const int N = static_cast<int>(index.size());
    Eigen::MatrixXd S(N, N);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        if (entries[i][j].is_zero()) {
          S(i, j) = 0.0;
          continue;
        }
        Real200 l = entries[i][j].log2() -
                    (entries[i][i].log2() + entries[j][j].log2()) / 2;
        S(i, j) = entries[i][j].sign() * std::exp2(static_cast<double>(l));
      }
    }
    return S;
  }
};

inline MotzkinMomentMatrix moment_matrix(const MotzkinPE& pe) {
  MotzkinMomentMatrix M;
  const int half = pe.half_degree();
  for (int s = 0; s <= half; ++s)
    for (int a = 0; a <= s; ++a) M.index.push_back({a, s - a});
  const int N = static_cast<int>(M.index.size());
  M.entries.assign(N, std::vector<LogSigned>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      M.entries[i][j] =
          pe.xy_value(M.index[i].first + M.index[j].first,
                      M.index[i].second + M.index[j].second);
  return M;
}

// ---------------------------------------------------------------------------
// 4-XOR certificates
// ---------------------------------------------------------------------------

struct XorEquation {
  std::uint64_t mask = 0;  // 4 distinct variables as a bitmask over 0..n-1
  int sign = 1;            // b_I in {-1, +1}
};

/// Random 4-XOR instance.  Signs are taken consistent with a hidden +-1
/// assignment drawn from the seed, so the parity closure below never
/// self-contradicts; contradiction handling is exercised through explicitly
/// supplied equation lists.
inline std::vector<XorEquation> xor_instance(int n, int m, std::uint64_t seed) {
  if (n < 4 || n > 63) throw std::invalid_argument("xor_instance: need 4 <= n <= 63");
  if (m < 0) throw std::invalid_argument("xor_instance: negative m");
  std::vector<int> sigma(n);
  {
    SplitMix64 g = SplitMix64::stream(seed, 0);
    for (int i = 0; i < n; ++i) sigma[i] = (g.next() & 1) ? 1 : -1;
  }
  std::vector<XorEquation> eqs;
  for (int e = 0; e < m; ++e) {
    SplitMix64 g = SplitMix64::stream(seed, static_cast<std::uint64_t>(e) + 1);
    std::uint64_t mask = 0;
    int picked = 0;
    while (picked < 4) {
      int v = static_cast<int>(g.next() % n);
      std::uint64_t bit = 1ull << v;
      if (mask & bit) continue;
      mask |= bit;
      ++picked;
    }
    int s = 1;
    for (int i = 0; i < n; ++i)
      if (mask & (1ull << i)) s *= sigma[i];
    eqs.push_back({mask, s});
  }
  return eqs;
}

/// Fixpoint of b_{I xor J} = b_I b_J over sets of size <= width with
/// |I xor J| <= width.  Worklist with canonical bitmask encoding; the fixpoint
/// is order-independent, the trace is deterministic.  Assignments live in a
/// dense sign table for small n (the hot path) and a hash map otherwise.
struct XorClosure {
  int n = 0;
  int width = 0;
  bool contradiction = false;
  std::uint64_t conflict_mask = 0;
  std::vector<std::uint64_t> members;  // insertion order, starts with {}
  std::vector<std::int8_t> table;      // dense mask -> sign, 0 = unset (n <= 24)
  std::unordered_map<std::uint64_t, int> sparse;

  int lookup(std::uint64_t mask) const {
    if (!table.empty()) return mask < table.size() ? table[mask] : 0;
    auto it = sparse.find(mask);
    return it == sparse.end() ? 0 : it->second;
  }
};

inline XorClosure xor_closure(const std::vector<XorEquation>& equations, int width) {
  XorClosure cl;
  cl.width = width;
  for (const auto& eq : equations) {
    int bits = std::popcount(eq.mask);
    if (bits == 0 || bits > width)
      throw std::invalid_argument("xor_closure: equation support outside width");
    cl.n = std::max(cl.n, 64 - std::countl_zero(eq.mask));
  }
  const bool dense = cl.n <= 24;
  if (dense) cl.table.assign(std::size_t(1) << cl.n, 0);

  auto assign = [&](std::uint64_t mask, int s) -> bool {
    int existing;
    if (dense) {
      existing = cl.table[mask];
      if (existing == 0) cl.table[mask] = static_cast<std::int8_t>(s);
    } else {
      auto [it, fresh] = cl.sparse.emplace(mask, s);
      existing = fresh ? 0 : it->second;
    }
    if (existing != 0) {
      if (existing != s) {
        cl.contradiction = true;
        cl.conflict_mask = mask;
        return false;
      }
      return true;
    }
    cl.members.push_back(mask);
    return true;
  };
  assign(0, 1);
  for (const auto& eq : equations)
    if (!assign(eq.mask, eq.sign)) return cl;
  // each member pairs with everything before it; pairs with later arrivals
  // are handled on the later member's own turn
  for (std::size_t qi = 1; qi < cl.members.size(); ++qi) {
    std::uint64_t cur = cl.members[qi];
    int scur = cl.lookup(cur);
    for (std::size_t mi = 0; mi <= qi; ++mi) {
      std::uint64_t x = cur ^ cl.members[mi];
      if (std::popcount(x) > width) continue;
      if (!assign(x, scur * cl.lookup(cl.members[mi]))) return cl;
    }
  }
  return cl;
}

/// p = sum_I -b_I x_I over the instance equations.
inline MonomialPoly xor_polynomial(const std::vector<XorEquation>& equations, int n) {
  MonomialPoly p(n);
  for (const auto& eq : equations) {
    std::vector<MultisetIndex::Entry> e;
    for (int v = 0; v < n; ++v)
      if (eq.mask & (1ull << v)) e.push_back({v + 1, 1});
    p.add_term(MultisetIndex(e), -static_cast<double>(eq.sign));
  }
  p.prune();
  return p;
}

/// Degree-2d pseudo-expectation from a successful closure of width 2d:
/// E~[x_I] reduces repeated variables mod 2, then reads the closure assignment
/// (any derived set up to size 2d), with unset sets mapped to 0.
class XorPE {
 public:
  XorPE(XorClosure closure, int d) : closure_(std::move(closure)), d_(d) {
    if (closure_.contradiction)
      throw CertificateError("xor_pe: closure ended in contradiction");
    if (closure_.width < 2 * d)
      throw std::invalid_argument("xor_pe: closure width below 2 * half_degree");
  }

  int half_degree() const { return d_; }
  const XorClosure& closure() const { return closure_; }

  LogSigned value(const MultisetIndex& I) const {
    std::uint64_t mask = 0;
    for (const auto& [var, mult] : I.entries())
      if (mult % 2 == 1) mask ^= 1ull << (var - 1);
    if (std::popcount(mask) > 2 * d_) return LogSigned::zero();
    return LogSigned::from_rational(closure_.lookup(mask));
  }

 private:
  XorClosure closure_;
  int d_;
};

/// Moment matrix over sets |I| <= d: M_{IJ} = E~[x_{I xor J}], integer entries.
struct XorMomentMatrix {
  int n = 0;
  int d = 0;
  std::vector<std::uint64_t> masks;
  Eigen::MatrixXi entries;
};

inline XorMomentMatrix moment_matrix(const XorPE& pe, int n) {
  XorMomentMatrix M;
  M.n = n;
  M.d = pe.half_degree();
  std::vector<std::uint64_t> cur{0};
  M.masks.push_back(0);
  // enumerate sets by size, lexicographic within size
  for (int size = 1; size <= M.d; ++size) {
    std::vector<int> comb(size);
    for (int i = 0; i < size; ++i) comb[i] = i;
    while (true) {
      std::uint64_t mask = 0;
      for (int v : comb) mask |= 1ull << v;
      M.masks.push_back(mask);
      int i = size - 1;
      while (i >= 0 && comb[i] == n - size + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  const int N = static_cast<int>(M.masks.size());
  M.entries.resize(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      M.entries(i, j) = pe.closure().lookup(M.masks[i] ^ M.masks[j]);
  return M;
}

struct PsdReport {
  double min_scaled_eig = 0.0;
  std::optional<double> dominance_margin;  // 1 - max row sum of |off-diagonal|
  bool pass = false;
};

/// PSD check of an already-scaled symmetric matrix by dense eigendecomposition.
inline PsdReport psd_check_scaled(const Eigen::MatrixXd& S, double psd_tol = 1e-8) {
  if (S.rows() != S.cols() || !S.isApprox(S.transpose(), 1e-12))
    throw std::invalid_argument("psd_check: matrix is not symmetric");
  PsdReport rep;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  rep.min_scaled_eig = eig.eigenvalues().minCoeff();
  double worst = 0.0;
  for (int i = 0; i < S.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < S.cols(); ++j)
      if (j != i) row += std::abs(S(i, j));
    worst = std::max(worst, row);
  }
  rep.dominance_margin = 1.0 - worst;
  rep.pass = rep.min_scaled_eig >= -psd_tol;
  return rep;
}

inline PsdReport psd_check(const MotzkinMomentMatrix& M, double psd_tol = 1e-8) {
  return psd_check_scaled(M.scaled(), psd_tol);
}

/// For the XOR matrix the diagonal is already unit.  The matrix is block
/// diagonal across connected components of the nonzero pattern; a successful
/// width-2d closure makes every block an exact +-1 rank-one outer product
/// (checked in integer arithmetic, which pins its spectrum to {block size, 0}),
/// and anything that fails the structure check goes through the dense
/// eigensolver.
inline PsdReport psd_check(const XorMomentMatrix& M, double psd_tol = 1e-8) {
  const int N = static_cast<int>(M.masks.size());
  PsdReport rep;
  rep.min_scaled_eig = std::numeric_limits<double>::infinity();
  std::vector<int> comp(N, -1);
  int ncomp = 0;
  for (int s = 0; s < N; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s}, nodes;
    comp[s] = ncomp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      nodes.push_back(u);
      for (int v = 0; v < N; ++v)
        if (comp[v] < 0 && M.entries(u, v) != 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
    }
    const int B = static_cast<int>(nodes.size());
    bool rank_one = true;
    for (int i = 0; i < B && rank_one; ++i)
      for (int j = 0; j < B; ++j) {
        int expect = M.entries(nodes[i], nodes[0]) * M.entries(nodes[0], nodes[j]);
        if (M.entries(nodes[i], nodes[j]) != expect) {
          rank_one = false;
          break;
        }
      }
    if (rank_one) {
      rep.min_scaled_eig = std::min(rep.min_scaled_eig, B > 1 ? 0.0 : 1.0);
    } else {
      Eigen::MatrixXd block(B, B);
      for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j) block(i, j) = M.entries(nodes[i], nodes[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block, Eigen::EigenvaluesOnly);
      rep.min_scaled_eig = std::min(rep.min_scaled_eig, eig.eigenvalues().minCoeff());
    }
    ++ncomp;
  }
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    double row = 0.0;
    for (int j = 0; j < N; ++j)
      if (j != i) row += std::abs(static_cast<double>(M.entries(i, j)));
    worst = std::max(worst, row);
  }
  rep.dominance_margin = 1.0 - worst;
  rep.pass = rep.min_scaled_eig >= -psd_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Distance lower bound:  ||f - g||^2 >= E~[f]^2 / sum_{|I| <= 2d} E~[h_I]^2
// for every SOS g of degree <= 2d, whenever E~[f] < 0.
// ---------------------------------------------------------------------------

struct DistanceReport {
  LogSigned ef;              // E~[f]
  double log2_numerator = 0;
  double log2_denominator = 0;
  double log2_bound = 0;     // log2 of the certified squared-distance bound
  std::optional<double> log2_closed_form_floor;  // the ladder's closed-form floor
  bool floor_holds = false;
};

namespace detail {

/// Brute-force sum of E~[h_I]^2 over all multisets |I| <= degree on nvars
/// variables; exact through LogSum.
template <class PE>
LogSigned hermite_square_sum(const PE& pe, int nvars, int degree) {
  LogSum acc;
  struct Walker {
    int nvars, degree;
    LogSum& acc;
    const PE& pe;
    std::vector<MultisetIndex::Entry> cur;
    void walk(int min_var, int remaining) {
      acc.add(pe_hermite(pe, MultisetIndex(cur)).squared());
      for (int v = min_var; v <= nvars; ++v)
        for (int m = 1; m <= remaining; ++m) {
          cur.push_back({v, m});
          walk(v + 1, remaining - m);
          cur.pop_back();
        }
    }
  } w{nvars, degree, acc, pe, {}};
  w.walk(1, degree);
  return acc.reduce();
}

}  // namespace detail

/// Motzkin family: only multisets supported on the two distinguished
/// variables contribute (third variables kill E~[h_I] exactly), so the sum
/// runs over the 2-variable multisets of degree <= 2*half.
inline LogSigned hermite_square_sum(const MotzkinPE& pe) {
  return detail::hermite_square_sum(pe, 2, 2 * pe.half_degree());
}

/// XOR family: E~[h_I] factors as (prod_k h_{I_k}(1)) * b_{S(I)} where S(I)
/// keeps the odd-multiplicity variables, so the sum collapses to
/// sum_{S assigned} W_{|S|} with combinatorial weights from a truncated
/// generating polynomial.  Exact rational throughout.
inline LogSigned hermite_square_sum(const XorPE& pe, int n) {
  const int deg = 2 * pe.half_degree();
  // q_a = h_a(1)^2 = He_a(1)^2 / a!
  std::vector<Rational> q(deg + 1);
  for (int a = 0; a <= deg; ++a) {
    const auto& cs = HermiteTable::global().monic_coefficients(a);
    BigInt at1 = 0;
    for (const auto& cf : cs) at1 += cf;
    q[a] = Rational(at1 * at1) / Rational(HermiteTable::global().norm_sq(a));
  }
  auto truncated_mul = [&](const std::vector<Rational>& A, const std::vector<Rational>& B) {
    std::vector<Rational> C(deg + 1);
    for (int i = 0; i <= deg; ++i) {
      if (A[i] == 0) continue;
      for (int j = 0; i + j <= deg; ++j) {
        if (B[j] == 0) continue;
        C[i + j] += A[i] * B[j];
      }
    }
    return C;
  };
  std::vector<Rational> even(deg + 1), odd(deg + 1);
  for (int a = 0; a <= deg; ++a) (a % 2 == 0 ? even : odd)[a] = q[a];
  // powers of the even-variable series: even^(n-s) for s = 0..min(deg, n)
  std::vector<std::vector<Rational>> even_pow(n + 1);
  even_pow[0] = std::vector<Rational>(deg + 1);
  even_pow[0][0] = 1;
  for (int t = 1; t <= n; ++t) even_pow[t] = truncated_mul(even_pow[t - 1], even);
  std::vector<Rational> odd_pow_cur(deg + 1);
  odd_pow_cur[0] = 1;
  // weight for |S| = s: sum of coefficients of t^{<=deg} in odd^s * even^{n-s}
  std::vector<Rational> weight_by_size(deg + 1);
  for (int s = 0; s <= deg && s <= n; ++s) {
    auto mixed = truncated_mul(odd_pow_cur, even_pow[n - s]);
    Rational total = 0;
    for (int t = 0; t <= deg; ++t) total += mixed[t];
    weight_by_size[s] = total;
    odd_pow_cur = truncated_mul(odd_pow_cur, odd);
  }
  Rational sum = 0;
  for (std::uint64_t mask : pe.closure().members) {
    int sz = std::popcount(mask);
    if (sz <= deg) sum += weight_by_size[sz];
  }
  return LogSigned::from_rational(sum);
}

inline DistanceReport finish_distance_report(const LogSigned& ef, const LogSigned& denom) {
  if (ef.sign() >= 0) throw CertificateError("certificate does not refute f");
  DistanceReport rep;
  rep.ef = ef;
  LogSigned num = ef.squared();
  LogSigned bound = num / denom;
  rep.log2_numerator = num.log2_double();
  rep.log2_denominator = denom.log2_double();
  rep.log2_bound = bound.log2_double();
  return rep;
}

/// Distance bound for the Motzkin certificate, with the ladder's closed-form
/// floor (k d^3)^{-2 d^4} reported alongside for comparison in log domain.
inline DistanceReport distance_lower_bound(const MotzkinPE& pe, const MonomialPoly& f) {
  DistanceReport rep = finish_distance_report(pe_apply(pe, f), hermite_square_sum(pe));
  const int d = pe.degree();
  Real200 floor = -2 * Real200(d) * d * d * d * pe.log2_kd3();
  rep.log2_closed_form_floor = static_cast<double>(floor);
  rep.floor_holds = rep.log2_bound >= *rep.log2_closed_form_floor;
  return rep;
}

inline DistanceReport distance_lower_bound(const XorPE& pe, const MonomialPoly& f, int n) {
  return finish_distance_report(pe_apply(pe, f), hermite_square_sum(pe, n));
}

/// Generic form used by reference/oracle checks (brute-force denominator).
template <class PE>
DistanceReport distance_lower_bound_bruteforce(const PE& pe, const MonomialPoly& f, int nvars) {
  return finish_distance_report(
      pe_apply(pe, f), detail::hermite_square_sum(pe, nvars, 2 * pe.half_degree()));
}

}  // namespace sostest
