#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sostest/poly.hpp"

namespace sostest {

/// Symmetric coefficient matrix indexed by multisets |I| <= d in canonical
/// order (degree, then lexicographic).  A PSD Gram matrix certifies that f_M
/// is a sum of squares.
struct GramMatrix {
  int n = 0;
  int d = 0;
  std::vector<MultisetIndex> index;
  Eigen::MatrixXd entries;
};

/// All multisets with |I| <= d over variables 1..n, canonical order, incl. the
/// empty multiset.
inline std::vector<MultisetIndex> gram_basis(int n, int d) {
  std::vector<MultisetIndex> out{MultisetIndex{}};
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, int min_var, int remaining) -> void {
    for (int v = min_var; v <= n; ++v)
      for (int m = 1; m <= remaining; ++m) {
        cur.push_back({v, m});
        out.push_back(MultisetIndex(cur));
        if (remaining - m > 0) self(self, v + 1, remaining - m);
        cur.pop_back();
      }
  };
  rec(rec, 1, d);
  std::sort(out.begin(), out.end());
  return out;
}

/// f_M: the coefficient of x_J collects M_{II'} over all pairs with I+I' = J.
inline MonomialPoly f_from_gram(const GramMatrix& M) {
  MonomialPoly f(M.n);
  const int N = static_cast<int>(M.index.size());
  for (int i = 0; i < N; ++i) {
    f.add_term(M.index[i].merged(M.index[i]), M.entries(i, i));
    for (int j = i + 1; j < N; ++j) {
      double c = M.entries(i, j) + M.entries(j, i);
      if (c != 0.0) f.add_term(M.index[i].merged(M.index[j]), c);
    }
  }
  f.prune();
  return f;
}

/// Rank-1 PSD witness c c^T from the coefficient vector of g; f_M = g^2.
inline GramMatrix gram_from_square(const MonomialPoly& g, int d) {
  if (g.degree() > d)
    throw std::invalid_argument("gram_from_square: polynomial degree exceeds half-degree");
  GramMatrix M;
  M.n = g.n;
  M.d = d;
  M.index = gram_basis(g.n, d);
  const int N = static_cast<int>(M.index.size());
  Eigen::VectorXd c(N);
  for (int i = 0; i < N; ++i) c(i) = g.coeff(M.index[i]);
  M.entries = c * c.transpose();
  return M;
}

struct Tolerances {
  double eval_tol = 1e-6;
  double psd_tol = 1e-8;
  double norm_tol = 1e-6;
};

/// Convex feasibility query over {evaluation constraints} ∩ {norm ball} ∩
/// {PSD cone}.  Exactly one of point_constraints / target must be set.
struct FeasibilityProblem {
  int n = 0;
  int half_degree = 0;
  std::vector<std::pair<Eigen::VectorXd, double>> point_constraints;
  std::optional<MonomialPoly> target;
  std::optional<double> norm_bound;
  Tolerances tol;
  int max_iterations = 100000;
  std::optional<GramMatrix> warm_start;
};

struct FeasibilityReport {
  bool feasible = false;
  int iterations = 0;
  double eval_violation = 0.0;
  double psd_violation = 0.0;
  double norm_excess = 0.0;
  bool non_converged = false;
};

struct FeasibilityOutcome {
  std::optional<GramMatrix> gram;  // present iff report.feasible
  FeasibilityReport report;
};

namespace detail {

/// Monomial value vector over the Gram index at a point.
inline Eigen::VectorXd monomial_values(const std::vector<MultisetIndex>& index,
                                       const Eigen::VectorXd& p) {
  Eigen::VectorXd m(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) {
    double t = 1.0;
    for (const auto& [var, mult] : index[r].entries()) t *= std::pow(p(var - 1), mult);
    m(r) = t;
  }
  return m;
}

/// Hermite coefficient list of f_M for the norm constraint and reports.
inline double hermite_norm_of_gram(const GramMatrix& M) {
  return norm(to_hermite(f_from_gram(M)));
}

struct TargetGroups {
  // cells grouped by the monomial J = I_i + I_j; ordered pairs, so symmetric
  std::vector<std::vector<std::pair<int, int>>> cells;
  std::vector<double> target_coeff;
};

inline TargetGroups build_groups(const std::vector<MultisetIndex>& index,
                                 const MonomialPoly& target) {
  std::map<MultisetIndex, std::vector<std::pair<int, int>>> groups;
  const int N = static_cast<int>(index.size());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) groups[index[i].merged(index[j])].push_back({i, j});
  TargetGroups out;
  for (auto& [J, cells] : groups) {
    out.cells.push_back(std::move(cells));
    out.target_coeff.push_back(target.coeff(J));
  }
  return out;
}

/// Exact projection machinery for the norm ball {M : ||to_hermite(f_M)|| <= b}
/// in the isometric sym-vec coordinates.  Feasible to precompute only for
/// moderate Gram sizes; callers gate on dimension.
class NormBallProjector {
 public:
  NormBallProjector(const std::vector<MultisetIndex>& index, int n, double bound)
      : bound_(bound) {
    const int N = static_cast<int>(index.size());
    dim_ = N * (N + 1) / 2;
    // map sym-vec coordinate -> hermite coefficients of f_M
    std::map<MultisetIndex, int> hermite_rows;
    std::vector<std::map<int, double>> cols(dim_);
    int col = 0;
    for (int i = 0; i < N; ++i) {
      for (int j = i; j < N; ++j, ++col) {
        MonomialPoly mono(n);
        mono.add_term(index[i].merged(index[j]), j == i ? 1.0 : std::numbers::sqrt2);
        HermitePoly h = to_hermite(mono);
        for (const auto& [K, c] : h.terms) {
          auto [it, fresh] = hermite_rows.emplace(K, static_cast<int>(hermite_rows.size()));
          cols[col][it->second] = c;
        }
      }
    }
    W_ = Eigen::MatrixXd::Zero(hermite_rows.size(), dim_);
    for (int c2 = 0; c2 < dim_; ++c2)
      for (const auto& [r, v] : cols[c2]) W_(r, c2) = v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W_.transpose() * W_);
    V_ = eig.eigenvectors();
    S_ = eig.eigenvalues().cwiseMax(0.0);
  }

  /// Project vec(M) onto the ball: min ||y - y0|| s.t. ||W y|| <= b, via the
  /// 1-D secular equation in the eigenbasis of W^T W.
  void project(Eigen::VectorXd& y) const {
    Eigen::VectorXd z = V_.transpose() * y;
    auto normc = [&](double lambda) {
      double s = 0;
      for (int i = 0; i < z.size(); ++i) {
        double zi = z(i) / (1.0 + lambda * S_(i));
        s += S_(i) * zi * zi;
      }
      return std::sqrt(s);
    };
    if (normc(0.0) <= bound_) return;
    double lo = 0.0, hi = 1.0;
    while (normc(hi) > bound_ && hi < 1e18) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (normc(mid) > bound_ ? lo : hi) = mid;
    }
    double lambda = 0.5 * (lo + hi);
    for (int i = 0; i < z.size(); ++i) z(i) /= (1.0 + lambda * S_(i));
    y = V_ * z;
  }

  double norm_of(const Eigen::VectorXd& y) const { return (W_ * y).norm(); }

 private:
  double bound_;
  int dim_;
  Eigen::MatrixXd W_;
  Eigen::MatrixXd V_;
  Eigen::VectorXd S_;
};

inline Eigen::VectorXd sym_to_vec(const Eigen::MatrixXd& M) {
  const int N = static_cast<int>(M.rows());
  Eigen::VectorXd y(N * (N + 1) / 2);
  int c = 0;
  for (int i = 0; i < N; ++i) {
    y(c++) = M(i, i);
    for (int j = i + 1; j < N; ++j) y(c++) = std::numbers::sqrt2 * M(i, j);
  }
  return y;
}

inline Eigen::MatrixXd vec_to_sym(const Eigen::VectorXd& y, int N) {
  Eigen::MatrixXd M(N, N);
  int c = 0;
  for (int i = 0; i < N; ++i) {
    M(i, i) = y(c++);
    for (int j = i + 1; j < N; ++j) {
      M(i, j) = M(j, i) = y(c++) / std::numbers::sqrt2;
    }
  }
  return M;
}

}  // namespace detail

/// Dykstra-corrected cyclic alternating projections over the affine evaluation
/// set, the Hermite-norm ball (when bounded) and the PSD cone.  Feasible is
/// returned only after all three families verify from scratch at the given
/// tolerances; Infeasible means no feasible point was found within
/// max_iterations at these tolerances, and is not on its own a proof of
/// infeasibility.
inline FeasibilityOutcome feasibility_search(const FeasibilityProblem& problem) {
  const bool sample_mode = !problem.point_constraints.empty();
  if (!sample_mode && !problem.target.has_value())
    throw std::invalid_argument("feasibility_search: no constraints given");
  const int n = problem.n;
  const int d = problem.half_degree;
  if (n < 1 || d < 0) throw std::invalid_argument("feasibility_search: bad dimensions");

  auto index = gram_basis(n, d);
  const int N = static_cast<int>(index.size());
  const auto& tol = problem.tol;

  FeasibilityOutcome out;

  // structural degree check in target mode
  if (!sample_mode) {
    if (problem.target->n != n)
      throw std::invalid_argument("feasibility_search: target variable count mismatch");
    if (problem.target->degree() > 2 * d) {
      out.report.eval_violation = std::numeric_limits<double>::infinity();
      return out;
    }
  }

  // affine machinery
  std::vector<Eigen::VectorXd> mono_vecs;
  Eigen::MatrixXd constraint_gram;
  Eigen::LDLT<Eigen::MatrixXd> constraint_solver;
  Eigen::VectorXd values;
  detail::TargetGroups groups;
  if (sample_mode) {
    const int m = static_cast<int>(problem.point_constraints.size());
    values.resize(m);
    for (int s = 0; s < m; ++s) {
      const auto& [p, v] = problem.point_constraints[s];
      if (p.size() != n)
        throw std::invalid_argument("feasibility_search: point dimension mismatch");
      mono_vecs.push_back(detail::monomial_values(index, p));
      values(s) = v;
    }
    constraint_gram.resize(m, m);
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) {
        double ip = mono_vecs[s].dot(mono_vecs[t]);
        constraint_gram(s, t) = ip * ip;
      }
    constraint_solver.compute(constraint_gram);
  } else {
    groups = detail::build_groups(index, *problem.target);
  }

  auto eval_violation = [&](const Eigen::MatrixXd& M) {
    double worst = 0.0;
    if (sample_mode) {
      for (std::size_t s = 0; s < mono_vecs.size(); ++s) {
        double e = mono_vecs[s].dot(M * mono_vecs[s]) - values(s);
        worst = std::max(worst, std::abs(e) / (1.0 + std::abs(values(s))));
      }
    } else {
      for (std::size_t gi = 0; gi < groups.cells.size(); ++gi) {
        double sum = 0.0;
        for (const auto& [i, j] : groups.cells[gi]) sum += M(i, j);
        worst = std::max(worst, std::abs(sum - groups.target_coeff[gi]));
      }
    }
    return worst;
  };

  auto project_affine = [&](Eigen::MatrixXd& M) {
    if (sample_mode) {
      const int m = static_cast<int>(mono_vecs.size());
      Eigen::VectorXd resid(m);
      for (int s = 0; s < m; ++s) resid(s) = mono_vecs[s].dot(M * mono_vecs[s]) - values(s);
      Eigen::VectorXd lambda = constraint_solver.solve(resid);
      for (int s = 0; s < m; ++s)
        M.noalias() -= lambda(s) * (mono_vecs[s] * mono_vecs[s].transpose());
    } else {
      for (std::size_t gi = 0; gi < groups.cells.size(); ++gi) {
        double sum = 0.0;
        for (const auto& [i, j] : groups.cells[gi]) sum += M(i, j);
        double delta = (groups.target_coeff[gi] - sum) / groups.cells[gi].size();
        for (const auto& [i, j] : groups.cells[gi]) M(i, j) += delta;
      }
    }
  };

  // norm-ball machinery: exact projector for moderate sizes, conservative
  // rescale step above the gate
  static constexpr int kExactBallLimit = 1500;
  const int vecdim = N * (N + 1) / 2;
  std::optional<detail::NormBallProjector> ball;
  if (problem.norm_bound && vecdim <= kExactBallLimit)
    ball.emplace(index, n, *problem.norm_bound);

  auto norm_excess = [&](const GramMatrix& G) {
    if (!problem.norm_bound) return 0.0;
    return std::max(0.0, detail::hermite_norm_of_gram(G) - *problem.norm_bound);
  };

  auto make_gram = [&](const Eigen::MatrixXd& M) {
    GramMatrix G;
    G.n = n;
    G.d = d;
    G.index = index;
    G.entries = (M + M.transpose()) / 2.0;
    return G;
  };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  if (problem.warm_start) {
    if (problem.warm_start->entries.rows() != N)
      throw std::invalid_argument("feasibility_search: warm start has wrong Gram size");
    M = (problem.warm_start->entries + problem.warm_start->entries.transpose()) / 2.0;
  }

  Eigen::MatrixXd corr_affine = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd corr_ball = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd corr_psd = Eigen::MatrixXd::Zero(N, N);

  auto check_feasible = [&](const Eigen::MatrixXd& X, int iters) -> bool {
    GramMatrix G = make_gram(X);
    double ev = eval_violation(G.entries);
    if (ev > tol.eval_tol) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G.entries);
    double psd_v = std::max(0.0, -eig.eigenvalues().minCoeff());
    if (psd_v > tol.psd_tol) return false;
    double nx = norm_excess(G);
    if (nx > tol.norm_tol) return false;
    out.gram = std::move(G);
    out.report = {true, iters, ev, psd_v, nx, false};
    return true;
  };

  if (check_feasible(M, 0)) return out;

  constexpr int kCheckEvery = 25;
  double window_best = std::numeric_limits<double>::infinity();
  double prev_window_best = std::numeric_limits<double>::infinity();
  const int window = std::max(kCheckEvery * 8, problem.max_iterations / 20);
  double last_ev = std::numeric_limits<double>::infinity();

  int it = 1;
  for (; it <= problem.max_iterations; ++it) {
    // affine
    Eigen::MatrixXd y = M + corr_affine;
    Eigen::MatrixXd x = y;
    project_affine(x);
    corr_affine = y - x;
    M = std::move(x);

    // norm ball
    if (problem.norm_bound) {
      if (ball) {
        y = M + corr_ball;
        Eigen::VectorXd v = detail::sym_to_vec(y);
        ball->project(v);
        Eigen::MatrixXd xb = detail::vec_to_sym(v, N);
        corr_ball = y - xb;
        M = std::move(xb);
      } else {
        // dimension above the exact-projector gate: rescale into the ball
        double nrm = detail::hermite_norm_of_gram(make_gram(M));
        if (nrm > *problem.norm_bound) M *= *problem.norm_bound / nrm;
      }
    }

    // PSD cone
    y = M + corr_psd;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig((y + y.transpose()) / 2.0);
    Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd xp = eig.eigenvectors() * clipped.asDiagonal() *
                         eig.eigenvectors().transpose();
    corr_psd = y - xp;
    M = std::move(xp);

    if (it % kCheckEvery == 0 || it == problem.max_iterations) {
      if (check_feasible(M, it)) return out;
      last_ev = eval_violation(M);
      window_best = std::min(window_best, last_ev);
      if (it % window == 0) {
        prev_window_best = window_best;
        window_best = std::numeric_limits<double>::infinity();
      }
    }
  }

  GramMatrix G = make_gram(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G.entries);
  out.report.feasible = false;
  out.report.iterations = problem.max_iterations;
  out.report.eval_violation = eval_violation(G.entries);
  out.report.psd_violation = std::max(0.0, -eig.eigenvalues().minCoeff());
  out.report.norm_excess = norm_excess(G);
  // stalled at a positive gap reads as evidence of an empty intersection;
  // still-moving violations mean the run was inconclusive
  double recent = std::min(window_best, out.report.eval_violation);
  if (std::isfinite(prev_window_best) && prev_window_best > 0) {
    double rel_change = std::abs(recent - prev_window_best) / prev_window_best;
    out.report.non_converged = rel_change > 0.05;
  } else {
    out.report.non_converged = true;
  }
  return out;
}

/// Spectral sum-of-squares extraction: f_M = sum_k g_k^2 with
/// g_k = sqrt(lambda_k) (eigenvector read as a polynomial).  Eigenvalues in
/// [-psd_tol, 0) are clipped to zero; anything lower is an error.
inline std::vector<MonomialPoly> extract_squares(const GramMatrix& M, double psd_tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (M.entries + M.entries.transpose()) / 2.0);
  if (eig.eigenvalues().minCoeff() < -psd_tol)
    throw std::domain_error("extract_squares: matrix is not PSD within tolerance");
  std::vector<MonomialPoly> out;
  for (int k = 0; k < eig.eigenvalues().size(); ++k) {
    double lam = eig.eigenvalues()(k);
    if (lam <= 0.0) continue;
    MonomialPoly g(M.n);
    double s = std::sqrt(lam);
    for (std::size_t r = 0; r < M.index.size(); ++r)
      g.add_term(M.index[r], s * eig.eigenvectors()(r, k));
    g.prune();
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace sostest
