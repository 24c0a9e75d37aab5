#pragma once

// Finite-support measures and type-1 Wasserstein computations.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "srosi/data.hpp"
#include "srosi/error.hpp"
#include "srosi/lp.hpp"
#include "srosi/norm.hpp"
#include "srosi/weights.hpp"

namespace srosi {

/// sum_j probs[j] * delta(atoms.row(j)).  Zero-probability atoms are kept.
struct DiscreteMeasure {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd probs;

  [[nodiscard]] int size() const { return static_cast<int>(atoms.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(atoms.cols()); }

  void validate() const {
    if (atoms.rows() < 1) throw InvalidParameter("measure: need at least one atom");
    if (probs.size() != atoms.rows()) throw InvalidParameter("measure: probs/atoms size mismatch");
    if (probs.minCoeff() < 0.0) throw InvalidParameter("measure: negative probability");
    if (std::abs(probs.sum() - 1.0) > 1e-9) throw InvalidParameter("measure: probabilities must sum to one");
  }
};

inline DiscreteMeasure empirical_conditional(const Dataset& data, const WeightVector& w) {
  if (w.size() != data.size()) throw InvalidParameter("empirical_conditional: weight length mismatch");
  DiscreteMeasure m{data.xis, w};
  m.validate();
  return m;
}

/// Optimal transport plan with Kantorovich potentials: u_j + v_k <= cost_jk,
/// dual_value = sum mu_j u_j + sum nu_k v_k.
struct TransportSolution {
  double value = 0.0;
  double dual_value = 0.0;
  Eigen::MatrixXd plan;
  Eigen::VectorXd u, v;
  Eigen::MatrixXd cost;
};

inline TransportSolution wasserstein1_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Norm norm) {
  mu.validate();
  nu.validate();
  if (mu.dim() != nu.dim()) throw InvalidParameter("wasserstein1: dimension mismatch");
  const int m = mu.size(), k = nu.size();
  TransportSolution sol;
  sol.cost.resize(m, k);
  lp::Model model;
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < k; ++l) {
      sol.cost(j, l) = norm_of((mu.atoms.row(j) - nu.atoms.row(l)).transpose(), norm);
      model.add_variable(0.0, lp::kInf, sol.cost(j, l));
    }
  }
  std::vector<lp::Term> row;
  for (int j = 0; j < m; ++j) {
    row.clear();
    for (int l = 0; l < k; ++l) row.push_back({j * k + l, 1.0});
    model.add_row(row, lp::Sense::Equal, mu.probs[j]);
  }
  for (int l = 0; l < k; ++l) {
    row.clear();
    for (int j = 0; j < m; ++j) row.push_back({j * k + l, 1.0});
    model.add_row(row, lp::Sense::Equal, nu.probs[l]);
  }
  const lp::Result res = lp::solve(model);
  if (!res.optimal()) throw SolveFailure("wasserstein1: transport LP not solved: " + res.message);
  sol.value = res.value;
  sol.plan.resize(m, k);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < k; ++l) sol.plan(j, l) = res.x[j * k + l];
  sol.u = Eigen::Map<const Eigen::VectorXd>(res.duals.data(), m);
  sol.v = Eigen::Map<const Eigen::VectorXd>(res.duals.data() + m, k);
  sol.dual_value = mu.probs.dot(sol.u) + nu.probs.dot(sol.v);
  return sol;
}

inline double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Norm norm = Norm::L2) {
  return wasserstein1_solve(mu, nu, norm).value;
}

namespace detail {

// Integral of |c - (a0 + a1 t)| over [l, r].
inline double abs_linear_integral(double c, double a0, double a1, double l, double r) {
  if (!(r > l)) return 0.0;
  const double gl = c - (a0 + a1 * l), gr = c - (a0 + a1 * r);
  if (gl * gr >= 0.0) return 0.5 * (std::abs(gl) + std::abs(gr)) * (r - l);
  const double root = l + (r - l) * gl / (gl - gr);
  return 0.5 * std::abs(gl) * (root - l) + 0.5 * std::abs(gr) * (r - root);
}

}  // namespace detail

/// Exact W1 between a measure on the line and U[a, b], as the integral of the
/// absolute CDF difference.
inline double wasserstein1_1d_vs_uniform(const DiscreteMeasure& mu, double a, double b) {
  mu.validate();
  if (mu.dim() != 1) throw InvalidParameter("wasserstein1_1d_vs_uniform: measure must be one-dimensional");
  if (!(a < b)) throw InvalidParameter("wasserstein1_1d_vs_uniform: need a < b");
  std::vector<std::pair<double, double>> pts;
  for (int j = 0; j < mu.size(); ++j) pts.emplace_back(mu.atoms(j, 0), mu.probs[j]);
  std::sort(pts.begin(), pts.end());
  std::vector<double> knots{a, b};
  for (const auto& p : pts) knots.push_back(p.first);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const double slope = 1.0 / (b - a);
  double total = 0.0, cdf = 0.0;
  std::size_t next = 0;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double l = knots[s], r = knots[s + 1];
    while (next < pts.size() && pts[next].first <= l) cdf += pts[next++].second;
    // F_U on [l, r] is 0, 1, or (t - a) / (b - a).
    if (r <= a) total += cdf * (r - l);
    else if (l >= b) total += std::abs(cdf - 1.0) * (r - l);
    else total += detail::abs_linear_integral(cdf, -a * slope, slope, l, r);
  }
  return total;
}

/// max sum_k q_k f_k over measures q on the rows of `support` whose transport
/// distance to `center` is at most theta.  One LP over couplings.
inline double w1_dro_sup_finite(const DiscreteMeasure& center, const Eigen::MatrixXd& support,
                                const Eigen::VectorXd& f, double theta, Norm norm = Norm::L2) {
  center.validate();
  if (support.cols() != center.dim()) throw InvalidParameter("w1_dro_sup_finite: dimension mismatch");
  if (f.size() != support.rows()) throw InvalidParameter("w1_dro_sup_finite: f length mismatch");
  if (!(theta >= 0.0)) throw InvalidParameter("w1_dro_sup_finite: theta must be nonnegative");
  const int m = center.size(), k = static_cast<int>(support.rows());
  for (int i = 0; i < m; ++i) {
    if (center.probs[i] == 0.0) continue;
    bool found = false;
    for (int l = 0; l < k && !found; ++l) found = (support.row(l) == center.atoms.row(i));
    if (!found) throw InvalidParameter("w1_dro_sup_finite: center atom missing from support");
  }
  lp::Model model;
  std::vector<lp::Term> budget;
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      const int col = model.add_variable(0.0, lp::kInf, -f[l]);
      const double c = norm_of((center.atoms.row(i) - support.row(l)).transpose(), norm);
      if (c != 0.0) budget.push_back({col, c});
    }
  }
  std::vector<lp::Term> row;
  for (int i = 0; i < m; ++i) {
    row.clear();
    for (int l = 0; l < k; ++l) row.push_back({i * k + l, 1.0});
    model.add_row(row, lp::Sense::Equal, center.probs[i]);
  }
  model.add_row(budget, lp::Sense::Less, theta);
  const lp::Result res = lp::solve(model);
  if (!res.optimal()) throw SolveFailure("w1_dro_sup_finite: LP not solved: " + res.message);
  return -res.value;
}

}  // namespace srosi
