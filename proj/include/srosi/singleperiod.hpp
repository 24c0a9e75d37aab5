#pragma once

// Single-period distributionally robust mean-cVaR portfolio selection with
// per-sample Wasserstein balls around weighted return samples.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "srosi/data.hpp"
#include "srosi/error.hpp"
#include "srosi/lp.hpp"
#include "srosi/norm.hpp"
#include "srosi/weights.hpp"

namespace srosi {

/// Loss of portfolio x under return r:  cVaR_alpha(-x.r) - lambda x.r,
/// written with the auxiliary threshold beta as
///   beta + (1/alpha) max(0, -x.r - beta) - lambda x.r.
struct PortfolioProblem {
  int n = 1;
  double alpha = 0.05;
  double lambda = 1.0;

  void validate() const {
    if (n < 1) throw InvalidParameter("portfolio: need at least one asset");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("portfolio: alpha must lie in (0, 1)");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("portfolio: lambda must be nonnegative");
  }
};

struct PortfolioSolution {
  double value = 0.0;
  Eigen::VectorXd x;
  double beta = 0.0;
  lp::Result lp_result;
};

namespace detail {

inline void check_portfolio(const PortfolioProblem& p, const Dataset& data, const WeightVector& w, double eps,
                            Norm norm) {
  p.validate();
  if (data.dim_xi() != p.n) throw InvalidParameter("portfolio: return dimension must equal the asset count");
  if (w.size() != data.size()) throw InvalidParameter("portfolio: weight length mismatch");
  if (w.size() == 0 || w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-8)
    throw InvalidParameter("portfolio: weights must be nonnegative and sum to one");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidParameter("portfolio: eps must be finite and nonnegative");
  if (norm == Norm::L2) throw UnsupportedNorm("portfolio: l2 balls need second-order cones; use l1 or linf");
}

}  // namespace detail

/// Dual norm of a nonnegative portfolio for the ball norm `norm`.
inline double portfolio_dual_norm(const Eigen::VectorXd& x, Norm norm) { return norm_of(x, dual_norm(norm)); }

/// Worst case over the per-sample balls of the two affine loss pieces at a
/// fixed (x, beta), weighted by w.
inline double dro_value_fixed_decision(const Eigen::VectorXd& x, double beta, const PortfolioProblem& p,
                                       const Dataset& data, const WeightVector& w, double eps, Norm norm) {
  detail::check_portfolio(p, data, w, eps, norm);
  if (x.size() != p.n) throw InvalidParameter("portfolio: decision length mismatch");
  const double xn = portfolio_dual_norm(x, norm);
  const double ia = 1.0 / p.alpha;
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double ret = x.dot(data.xis.row(i).transpose());
    const double first = beta - p.lambda * ret + eps * p.lambda * xn;
    const double second = (1.0 - ia) * beta - (ia + p.lambda) * ret + eps * (ia + p.lambda) * xn;
    total += w[i] * std::max(first, second);
  }
  return total;
}

/// Minimizes dro_value_fixed_decision over the unit simplex and beta.
inline PortfolioSolution solve_cvar_portfolio(const PortfolioProblem& p, const Dataset& data, const WeightVector& w,
                                              double eps, Norm norm, const lp::Options& opts = {}) {
  detail::check_portfolio(p, data, w, eps, norm);
  const int n = p.n;
  const double ia = 1.0 / p.alpha;
  lp::Model m;
  std::vector<int> x(n);
  for (int j = 0; j < n; ++j) x[j] = m.add_variable(0.0, lp::kInf, 0.0);
  const int beta = m.add_variable(-lp::kInf, lp::kInf, 0.0);
  std::vector<lp::Term> row;
  for (int j = 0; j < n; ++j) row.push_back({x[j], 1.0});
  m.add_row(row, lp::Sense::Equal, 1.0);

  // ||x||_* as a variable for l1 balls; on the simplex the l1 norm is 1.
  int t = -1;
  double norm_const = 0.0;
  if (eps > 0.0) {
    if (norm == Norm::L1) {
      t = m.add_variable(0.0, lp::kInf, 0.0);
      for (int j = 0; j < n; ++j) m.add_row({{t, 1.0}, {x[j], -1.0}}, lp::Sense::Greater, 0.0);
    } else {
      norm_const = 1.0;
    }
  }
  for (int i = 0; i < data.size(); ++i) {
    if (w[i] == 0.0) continue;
    const int v = m.add_variable(-lp::kInf, lp::kInf, w[i]);
    for (int piece = 0; piece < 2; ++piece) {
      const double bcoef = piece == 0 ? 1.0 : 1.0 - ia;
      const double rcoef = piece == 0 ? p.lambda : ia + p.lambda;
      // v >= bcoef beta - rcoef x.xi + eps rcoef ||x||_*
      row.assign({{v, 1.0}, {beta, -bcoef}});
      for (int j = 0; j < n; ++j) row.push_back({x[j], rcoef * data.xis(i, j)});
      if (t >= 0) row.push_back({t, -eps * rcoef});
      m.add_row(row, lp::Sense::Greater, eps * rcoef * norm_const);
    }
  }
  PortfolioSolution sol;
  sol.lp_result = lp::solve(m, opts);
  if (!sol.lp_result.optimal())
    throw SolveFailure(std::string("portfolio: LP not solved: ") + lp::to_string(sol.lp_result.status) + " " +
                       sol.lp_result.message);
  sol.x.resize(n);
  for (int j = 0; j < n; ++j) sol.x[j] = sol.lp_result.x[x[j]];
  sol.beta = sol.lp_result.x[beta];
  sol.value = sol.lp_result.value;
  return sol;
}

}  // namespace srosi
