#pragma once

// Multi-period sample robust optimization with side information.
//
// The cost of a trajectory is
//   sum_t f_t.x_t + g_t.xi_t + min_{y_t} { h_t.y_t : sum_{s<=t} A_ts x_s + B_ts xi_s + C_t y_t <= d_t }
// and x follows a linear decision rule x = x0 + X zeta that only reads
// earlier stages.  `build_multipolicy_lp` compiles the weighted worst case
// over norm balls around each sample path into one LP, giving each ball its
// own auxiliary recourse rule y = y0^i + Y^i zeta.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "srosi/data.hpp"
#include "srosi/error.hpp"
#include "srosi/lp.hpp"
#include "srosi/norm.hpp"
#include "srosi/weights.hpp"

namespace srosi {

/// Stage-structured problem data.  Stage dimensions are given per stage;
/// vectors and matrices use the concatenated stage layout.  Rows of A, B, C
/// belonging to stage t may only touch x and xi of stages <= t and y of
/// stage t.  Optional bounds on x are enforced robustly on every ball.
struct DynamicProblem {
  std::vector<int> dim_x, dim_xi, dim_y, rows;
  Eigen::VectorXd f, g, h, d;
  Eigen::MatrixXd A, B, C;
  Eigen::VectorXd x_lower, x_upper;  // empty: unbounded
  Eigen::MatrixXd y_mask;            // empty: full; else ny x nxi, 0 keeps Y(l, j) at zero

  [[nodiscard]] int stages() const { return static_cast<int>(dim_x.size()); }
  [[nodiscard]] int nx() const { return static_cast<int>(f.size()); }
  [[nodiscard]] int nxi() const { return static_cast<int>(g.size()); }
  [[nodiscard]] int ny() const { return static_cast<int>(h.size()); }
  [[nodiscard]] int nrows() const { return static_cast<int>(d.size()); }

  [[nodiscard]] double lower(int k) const { return x_lower.size() ? x_lower[k] : -lp::kInf; }
  [[nodiscard]] double upper(int k) const { return x_upper.size() ? x_upper[k] : lp::kInf; }

  /// Stage index (0-based) of each coordinate of a per-stage layout.
  static std::vector<int> stage_map(const std::vector<int>& dims) {
    std::vector<int> out;
    for (std::size_t t = 0; t < dims.size(); ++t) out.insert(out.end(), dims[t], static_cast<int>(t));
    return out;
  }
  [[nodiscard]] std::vector<int> x_stage() const { return stage_map(dim_x); }
  [[nodiscard]] std::vector<int> xi_stage() const { return stage_map(dim_xi); }
  [[nodiscard]] std::vector<int> y_stage() const { return stage_map(dim_y); }
  [[nodiscard]] std::vector<int> row_stage() const { return stage_map(rows); }

  /// X(k, j) may be nonzero only when x_k is decided after xi_j is revealed.
  [[nodiscard]] bool x_depends(int k, int j) const { return x_stage()[k] > xi_stage()[j]; }

  /// Y(l, j) may be nonzero when xi_j is revealed by y_l's stage and the mask allows it.
  [[nodiscard]] bool y_allowed(int l, int j) const { return y_mask.size() == 0 || y_mask(l, j) != 0.0; }

  void validate() const {
    const std::size_t T = dim_x.size();
    if (T == 0) throw InvalidParameter("problem: need at least one stage");
    if (dim_xi.size() != T || dim_y.size() != T || rows.size() != T)
      throw InvalidParameter("problem: per-stage dimension lists differ in length");
    auto sum = [](const std::vector<int>& v) {
      int s = 0;
      for (int x : v) {
        if (x < 0) throw InvalidParameter("problem: negative dimension");
        s += x;
      }
      return s;
    };
    const int nx_ = sum(dim_x), nxi_ = sum(dim_xi), ny_ = sum(dim_y), m = sum(rows);
    if (f.size() != nx_ || g.size() != nxi_ || h.size() != ny_ || d.size() != m)
      throw InvalidParameter("problem: cost/rhs vector sizes do not match stage dimensions");
    if (A.rows() != m || A.cols() != nx_ || B.rows() != m || B.cols() != nxi_ || C.rows() != m || C.cols() != ny_)
      throw InvalidParameter("problem: matrix shapes do not match stage dimensions");
    if (x_lower.size() && x_lower.size() != nx_) throw InvalidParameter("problem: x_lower size");
    if (x_upper.size() && x_upper.size() != nx_) throw InvalidParameter("problem: x_upper size");
    for (int k = 0; k < nx_; ++k)
      if (lower(k) > upper(k)) throw InvalidParameter("problem: x_lower > x_upper");
    if (y_mask.size() && (y_mask.rows() != ny_ || y_mask.cols() != nxi_))
      throw InvalidParameter("problem: y_mask shape");
    const auto rs = row_stage(), xs = x_stage(), zs = xi_stage(), ys = y_stage();
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < nx_; ++k)
        if (A(r, k) != 0.0 && xs[k] > rs[r]) throw InvalidParameter("problem: A is not block lower-triangular");
      for (int j = 0; j < nxi_; ++j)
        if (B(r, j) != 0.0 && zs[j] > rs[r]) throw InvalidParameter("problem: B is not block lower-triangular");
      for (int l = 0; l < ny_; ++l)
        if (C(r, l) != 0.0 && ys[l] != rs[r]) throw InvalidParameter("problem: C is not block diagonal");
    }
    if (!f.allFinite() || !g.allFinite() || !h.allFinite() || !d.allFinite() || !A.allFinite() ||
        !B.allFinite() || !C.allFinite())
      throw InvalidParameter("problem: non-finite data");
  }
};

enum class Support { NonnegOrthant, Free };

struct UncertaintySpec {
  double eps = 0.0;
  Norm norm = Norm::LInf;
  Support support = Support::NonnegOrthant;
};

/// x = x0 + X zeta.
struct PrimaryPolicy {
  Eigen::VectorXd x0;
  Eigen::MatrixXd X;

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& zeta) const { return x0 + X * zeta; }
};

/// Primary rule plus one auxiliary recourse rule y = y0[i] + Y[i] zeta per
/// sample.  Samples without weight keep all-zero rules.
struct MultiPolicy {
  PrimaryPolicy primary;
  std::vector<Eigen::VectorXd> y0;
  std::vector<Eigen::MatrixXd> Y;
};

/// Sizes of the variable and row groups of a built LP.
struct LpCounts {
  int x0 = 0, X = 0, shared = 0, y0 = 0, Y = 0, lambda = 0, s = 0, epigraph = 0;
  int definition_rows = 0, robust_rows = 0, epigraph_rows = 0;
  [[nodiscard]] int variables() const { return x0 + X + shared + y0 + Y + lambda + s + epigraph; }
  [[nodiscard]] int rows() const { return definition_rows + robust_rows + epigraph_rows; }
};

/// Built LP plus the index maps needed to read a policy back.  `offset` is
/// the policy-independent part of the objective.
struct SroLp {
  lp::Model model;
  double offset = 0.0;
  std::vector<int> active;                 // samples with positive weight
  std::vector<int> x0_var;
  Eigen::MatrixXi X_var;                   // -1 where the rule may not read xi_j
  std::vector<std::vector<int>> y0_var;    // per active sample
  std::vector<Eigen::MatrixXi> Y_var;      // per active sample, empty at eps = 0
  std::vector<std::vector<int>> s_var;     // per active sample, -1 where pruned
  LpCounts counts;
};

namespace detail {

struct LinExpr {
  std::vector<lp::Term> terms;
  double constant = 0.0;
  [[nodiscard]] bool structurally_zero() const { return terms.empty() && constant == 0.0; }
};

class SroBuilder {
 public:
  SroBuilder(const DynamicProblem& prob, const Dataset& data, const WeightVector& w,
             const UncertaintySpec& u, bool shared)
      : p_(prob), data_(data), w_(w), u_(u), shared_(shared) {}

  SroLp build() {
    check();
    const int nx = p_.nx(), nxi = p_.nxi(), ny = p_.ny(), m = p_.nrows();
    const bool robust = u_.eps > 0.0;

    for (int i = 0; i < data_.size(); ++i)
      if (w_[i] > 0.0) out_.active.push_back(i);

    // Primary rule.
    out_.X_var = Eigen::MatrixXi::Constant(nx, nxi, -1);
    std::vector<bool> x_static(nx, true);
    for (int k = 0; k < nx; ++k)
      for (int j = 0; j < nxi; ++j)
        if (p_.x_depends(k, j)) x_static[k] = false;
    for (int k = 0; k < nx; ++k) {
      const double lo = x_static[k] ? p_.lower(k) : -lp::kInf, hi = x_static[k] ? p_.upper(k) : lp::kInf;
      out_.x0_var.push_back(var(lo, hi, out_.counts.x0));
    }
    for (int k = 0; k < nx; ++k)
      for (int j = 0; j < nxi; ++j)
        if (p_.x_depends(k, j)) out_.X_var(k, j) = var(-lp::kInf, lp::kInf, out_.counts.X);

    // Shared expressions (A X)_{r,j} and (X^T f)_j, named once so the
    // per-sample rows stay short.
    std::vector<std::vector<LinExpr>> ax(m, std::vector<LinExpr>(nxi));
    std::vector<LinExpr> xf(nxi);
    for (int j = 0; j < nxi; ++j) {
      for (int r = 0; r < m; ++r) {
        LinExpr e;
        for (int k = 0; k < nx; ++k)
          if (out_.X_var(k, j) >= 0 && p_.A(r, k) != 0.0) e.terms.push_back({out_.X_var(k, j), p_.A(r, k)});
        ax[r][j] = name(std::move(e));
      }
      LinExpr e;
      for (int k = 0; k < nx; ++k)
        if (out_.X_var(k, j) >= 0 && p_.f[k] != 0.0) e.terms.push_back({out_.X_var(k, j), p_.f[k]});
      xf[j] = name(std::move(e));
    }

    const auto ys = p_.y_stage(), zs = p_.xi_stage();
    std::vector<int> shared_y0;
    Eigen::MatrixXi shared_Y;
    for (std::size_t a = 0; a < out_.active.size(); ++a) {
      const int i = out_.active[a];
      const Eigen::VectorXd xi = data_.xis.row(i).transpose();
      const double wi = w_[i];

      std::vector<int> y0;
      Eigen::MatrixXi Y = robust ? Eigen::MatrixXi::Constant(ny, nxi, -1) : Eigen::MatrixXi();
      if (shared_ && a > 0) {
        y0 = shared_y0;
        Y = shared_Y;
      } else {
        for (int l = 0; l < ny; ++l) y0.push_back(var(-lp::kInf, lp::kInf, out_.counts.y0));
        if (robust)
          for (int l = 0; l < ny; ++l)
            for (int j = 0; j < nxi; ++j)
              if (ys[l] >= zs[j] && p_.y_allowed(l, j)) Y(l, j) = var(-lp::kInf, lp::kInf, out_.counts.Y);
        if (shared_) {
          shared_y0 = y0;
          shared_Y = Y;
        }
      }

      // Constraint rows.
      for (int r = 0; r < m; ++r) {
        std::vector<lp::Term> fixed;
        for (int k = 0; k < nx; ++k)
          if (p_.A(r, k) != 0.0) fixed.push_back({out_.x0_var[k], p_.A(r, k)});
        for (int l = 0; l < ny; ++l)
          if (p_.C(r, l) != 0.0) fixed.push_back({y0[l], p_.C(r, l)});
        std::vector<LinExpr> q(nxi);
        for (int j = 0; j < nxi; ++j) {
          q[j] = ax[r][j];
          q[j].constant += p_.B(r, j);
          if (robust)
            for (int l = 0; l < ny; ++l)
              if (p_.C(r, l) != 0.0 && Y(l, j) >= 0) q[j].terms.push_back({Y(l, j), p_.C(r, l)});
        }
        robust_row(std::move(fixed), std::move(q), p_.d[r], xi);
      }
      // Robust bounds on decision-rule outputs.
      for (int k = 0; k < nx; ++k) {
        if (x_static[k]) continue;
        for (int sign : {1, -1}) {
          const double bound = sign > 0 ? p_.upper(k) : -p_.lower(k);
          if (!std::isfinite(bound)) continue;
          std::vector<LinExpr> q(nxi);
          for (int j = 0; j < nxi; ++j)
            if (out_.X_var(k, j) >= 0) q[j].terms.push_back({out_.X_var(k, j), static_cast<double>(sign)});
          robust_row({{out_.x0_var[k], static_cast<double>(sign)}}, std::move(q), bound, xi);
        }
      }
      // Objective: f.x0 + h.y0 + sup over the ball of (X^T f + g + Y^T h).zeta.
      for (int k = 0; k < nx; ++k) out_.model.cost[out_.x0_var[k]] += wi * p_.f[k];
      for (int l = 0; l < ny; ++l) out_.model.cost[y0[l]] += wi * p_.h[l];
      std::vector<LinExpr> q(nxi);
      for (int j = 0; j < nxi; ++j) {
        q[j] = xf[j];
        q[j].constant += p_.g[j];
        if (robust)
          for (int l = 0; l < ny; ++l)
            if (p_.h[l] != 0.0 && Y(l, j) >= 0) q[j].terms.push_back({Y(l, j), p_.h[l]});
      }
      out_.s_var.push_back(robust_objective(std::move(q), xi, wi));
      out_.y0_var.push_back(std::move(y0));
      out_.Y_var.push_back(std::move(Y));
    }
    return std::move(out_);
  }

 private:
  const DynamicProblem& p_;
  const Dataset& data_;
  const WeightVector& w_;
  UncertaintySpec u_;
  bool shared_;
  SroLp out_;

  void check() const {
    p_.validate();
    data_.validate();
    // Stages without uncertainty may be omitted from the dataset layout.
    std::vector<int> nonempty;
    for (int d : p_.dim_xi)
      if (d > 0) nonempty.push_back(d);
    if (data_.stage_dims != p_.dim_xi && data_.stage_dims != nonempty)
      throw InvalidParameter("sro: dataset stage dimensions do not match the problem");
    if (data_.dim_xi() != p_.nxi()) throw InvalidParameter("sro: dataset d_xi does not match the problem");
    if (w_.size() != data_.size()) throw InvalidParameter("sro: weight length mismatch");
    if (w_.size() > 0 && (w_.minCoeff() < 0.0 || std::abs(w_.sum() - 1.0) > 1e-8))
      throw InvalidParameter("sro: weights must be nonnegative and sum to one");
    if (u_.norm == Norm::L2) throw UnsupportedNorm("sro: l2 balls need second-order cones; use l1 or linf");
    if (!(u_.eps >= 0.0) || !std::isfinite(u_.eps)) throw InvalidParameter("sro: eps must be finite and nonnegative");
    if (u_.support == Support::NonnegOrthant && data_.xis.size() && data_.xis.minCoeff() < 0.0)
      throw InvalidParameter("sro: sample paths must be nonnegative under orthant support");
  }

  int var(double lo, double hi, int& counter, double cost = 0.0) {
    ++counter;
    return out_.model.add_variable(lo, hi, cost);
  }

  // Replaces a multi-term expression by a fresh free variable tied to it.
  LinExpr name(LinExpr e) {
    if (e.terms.size() < 2) return e;
    const int z = var(-lp::kInf, lp::kInf, out_.counts.shared);
    e.terms.push_back({z, -1.0});
    out_.model.add_row(e.terms, lp::Sense::Equal, 0.0);
    ++out_.counts.definition_rows;
    return LinExpr{{{z, 1.0}}, 0.0};
  }

  // Adds the orthant multiplier to every entry that can carry one and
  // returns the multiplier indices (-1 where pruned).
  std::vector<int> add_multipliers(std::vector<LinExpr>& q, int& counter) {
    std::vector<int> idx(q.size(), -1);
    if (u_.eps == 0.0 || u_.support != Support::NonnegOrthant) return idx;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j].structurally_zero()) continue;
      idx[j] = var(0.0, lp::kInf, counter);
      q[j].terms.push_back({idx[j], 1.0});
    }
    return idx;
  }

  // eps * ||q||_* as (terms, constant) with epigraph variables and rows.
  LinExpr dual_norm_epigraph(const std::vector<LinExpr>& q) {
    LinExpr out;
    if (u_.eps == 0.0) return out;
    auto bound_rows = [&](int t, const LinExpr& e) {
      // t >= e  and  t >= -e
      std::vector<lp::Term> row{{t, 1.0}};
      for (const auto& term : e.terms) row.push_back({term.col, -term.coef});
      out_.model.add_row(row, lp::Sense::Greater, e.constant);
      row.assign(1, {t, 1.0});
      for (const auto& term : e.terms) row.push_back(term);
      out_.model.add_row(row, lp::Sense::Greater, -e.constant);
      out_.counts.epigraph_rows += 2;
    };
    if (u_.norm == Norm::L1) {
      // l-infinity dual: one epigraph variable per expression.
      double floor = 0.0;
      bool any_terms = false;
      for (const auto& e : q) {
        if (e.terms.empty()) floor = std::max(floor, std::abs(e.constant));
        else any_terms = true;
      }
      if (!any_terms) {
        out.constant = u_.eps * floor;
        return out;
      }
      const int t = var(floor, lp::kInf, out_.counts.epigraph);
      for (const auto& e : q)
        if (!e.terms.empty()) bound_rows(t, e);
      out.terms.push_back({t, u_.eps});
    } else {
      // l1 dual: one epigraph variable per entry.
      for (const auto& e : q) {
        if (e.terms.empty()) {
          out.constant += u_.eps * std::abs(e.constant);
          continue;
        }
        const int t = var(0.0, lp::kInf, out_.counts.epigraph);
        bound_rows(t, e);
        out.terms.push_back({t, u_.eps});
      }
    }
    return out;
  }

  // sup_{zeta in ball} fixed + q.zeta <= rhs.
  void robust_row(std::vector<lp::Term> fixed, std::vector<LinExpr> q, double rhs, const Eigen::VectorXd& xi) {
    add_multipliers(q, out_.counts.lambda);
    const LinExpr norm = dual_norm_epigraph(q);
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (xi[j] == 0.0) continue;
      for (const auto& t : q[j].terms) fixed.push_back({t.col, t.coef * xi[j]});
      rhs -= q[j].constant * xi[j];
    }
    fixed.insert(fixed.end(), norm.terms.begin(), norm.terms.end());
    rhs -= norm.constant;
    out_.model.add_row(fixed, lp::Sense::Less, rhs);
    ++out_.counts.robust_rows;
  }

  std::vector<int> robust_objective(std::vector<LinExpr> q, const Eigen::VectorXd& xi, double weight) {
    std::vector<int> s = add_multipliers(q, out_.counts.s);
    const LinExpr norm = dual_norm_epigraph(q);
    for (std::size_t j = 0; j < q.size(); ++j) {
      for (const auto& t : q[j].terms) out_.model.cost[t.col] += weight * xi[j] * t.coef;
      out_.offset += weight * xi[j] * q[j].constant;
    }
    for (const auto& t : norm.terms) out_.model.cost[t.col] += weight * t.coef;
    out_.offset += weight * norm.constant;
    return s;
  }
};

}  // namespace detail

/// LP whose optimum is the weighted worst-case cost over the primary rule and
/// per-sample auxiliary rules.  Samples with zero weight are left out; with
/// `shared_recourse` every sample uses the same auxiliary rule.
inline SroLp build_multipolicy_lp(const DynamicProblem& prob, const Dataset& data, const WeightVector& w,
                                  const UncertaintySpec& u, bool shared_recourse = false) {
  return detail::SroBuilder(prob, data, w, u, shared_recourse).build();
}

struct SroSolution {
  double objective = 0.0;
  MultiPolicy policy;
  lp::Result lp_result;
  Eigen::VectorXd contributions;  // worst-case cost per sample (0 without weight)
  LpCounts counts;
};

inline SroSolution solve_sro(const DynamicProblem& prob, const Dataset& data, const WeightVector& w,
                             const UncertaintySpec& u, bool shared_recourse = false,
                             const lp::Options& opts = {}) {
  SroLp built = build_multipolicy_lp(prob, data, w, u, shared_recourse);
  SroSolution sol;
  sol.counts = built.counts;
  sol.lp_result = lp::solve(built.model, opts);
  if (!sol.lp_result.optimal()) {
    throw SolveFailure(std::string("sro: LP ") + lp::to_string(sol.lp_result.status) +
                       (sol.lp_result.message.empty() ? "" : ": " + sol.lp_result.message));
  }
  const auto& x = sol.lp_result.x;
  const int nx = prob.nx(), nxi = prob.nxi(), ny = prob.ny();
  auto& pol = sol.policy;
  pol.primary.x0.resize(nx);
  pol.primary.X = Eigen::MatrixXd::Zero(nx, nxi);
  for (int k = 0; k < nx; ++k) {
    pol.primary.x0[k] = x[built.x0_var[k]];
    for (int j = 0; j < nxi; ++j)
      if (built.X_var(k, j) >= 0) pol.primary.X(k, j) = x[built.X_var(k, j)];
  }
  pol.y0.assign(data.size(), Eigen::VectorXd::Zero(ny));
  pol.Y.assign(data.size(), Eigen::MatrixXd::Zero(ny, nxi));
  sol.contributions = Eigen::VectorXd::Zero(data.size());
  const Norm dn = dual_norm(u.norm);
  for (std::size_t a = 0; a < built.active.size(); ++a) {
    const int i = built.active[a];
    for (int l = 0; l < ny; ++l) pol.y0[i][l] = x[built.y0_var[a][l]];
    const auto& Yv = built.Y_var[a];
    if (Yv.size())
      for (int l = 0; l < ny; ++l)
        for (int j = 0; j < nxi; ++j)
          if (Yv(l, j) >= 0) pol.Y[i](l, j) = x[Yv(l, j)];
    Eigen::VectorXd coef = pol.primary.X.transpose() * prob.f + prob.g + pol.Y[i].transpose() * prob.h;
    for (int j = 0; j < nxi; ++j)
      if (built.s_var[a][j] >= 0) coef[j] += x[built.s_var[a][j]];
    const Eigen::VectorXd xi = data.xis.row(i).transpose();
    sol.contributions[i] = prob.f.dot(pol.primary.x0) + prob.h.dot(pol.y0[i]) + coef.dot(xi) +
                           u.eps * norm_of(coef, dn);
  }
  sol.objective = sol.lp_result.value + built.offset;
  return sol;
}

/// Realized cost of the primary rule on one trajectory, with each stage's
/// recourse solved exactly.
inline double evaluate_policy(const DynamicProblem& prob, const PrimaryPolicy& pol, const Eigen::VectorXd& zeta) {
  if (zeta.size() != prob.nxi()) throw InvalidParameter("evaluate_policy: scenario dimension mismatch");
  const Eigen::VectorXd x = pol.apply(zeta);
  const Eigen::VectorXd slack = prob.d - prob.A * x - prob.B * zeta;
  double cost = prob.f.dot(x) + prob.g.dot(zeta);
  int row0 = 0, y0 = 0;
  for (int t = 0; t < prob.stages(); ++t) {
    const int mt = prob.rows[t], dy = prob.dim_y[t];
    if (dy == 0) {
      for (int r = row0; r < row0 + mt; ++r)
        if (slack[r] < -1e-9 * (1.0 + std::abs(prob.d[r])))
          throw InnerInfeasible("evaluate_policy: stage " + std::to_string(t + 1) + " row violated");
    } else if (mt == 0) {
      for (int l = y0; l < y0 + dy; ++l)
        if (prob.h[l] != 0.0) throw InnerUnbounded("evaluate_policy: unconstrained recourse with nonzero cost");
    } else {
      lp::Model stage;
      for (int l = y0; l < y0 + dy; ++l) stage.add_variable(-lp::kInf, lp::kInf, prob.h[l]);
      std::vector<lp::Term> row;
      for (int r = row0; r < row0 + mt; ++r) {
        row.clear();
        for (int l = y0; l < y0 + dy; ++l)
          if (prob.C(r, l) != 0.0) row.push_back({l - y0, prob.C(r, l)});
        stage.add_row(row, lp::Sense::Less, slack[r]);
      }
      const lp::Result res = lp::solve(stage);
      switch (res.status) {
        case lp::Status::Optimal: cost += res.value; break;
        case lp::Status::Infeasible:
          throw InnerInfeasible("evaluate_policy: no feasible recourse at stage " + std::to_string(t + 1));
        case lp::Status::Unbounded:
          throw InnerUnbounded("evaluate_policy: recourse unbounded at stage " + std::to_string(t + 1));
        case lp::Status::IterLimit: throw SolveFailure("evaluate_policy: " + res.message);
      }
    }
    row0 += mt;
    y0 += dy;
  }
  return cost;
}

/// sum_i w_i max over the corners of the (clipped) l-infinity box around xi^i
/// of the realized cost.  The cost is convex in the scenario, so the corners
/// attain the supremum.
inline double exact_sro_objective(const DynamicProblem& prob, const PrimaryPolicy& pol, const Dataset& data,
                                  const WeightVector& w, const UncertaintySpec& u) {
  if (u.norm != Norm::LInf) throw UnsupportedNorm("exact_sro_objective: only l-infinity balls are enumerated");
  const int nxi = prob.nxi();
  if (nxi > 16) throw TooLarge("exact_sro_objective: d_xi > 16");
  if (w.size() != data.size()) throw InvalidParameter("exact_sro_objective: weight length mismatch");
  double total = 0.0;
  const std::uint32_t corners = u.eps > 0.0 ? (1u << nxi) : 1u;
  for (int i = 0; i < data.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Eigen::VectorXd xi = data.xis.row(i).transpose();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < corners; ++c) {
      Eigen::VectorXd z = xi;
      if (u.eps > 0.0) {
        for (int j = 0; j < nxi; ++j) {
          z[j] += ((c >> j) & 1u) ? u.eps : -u.eps;
          if (u.support == Support::NonnegOrthant) z[j] = std::max(z[j], 0.0);
        }
      }
      worst = std::max(worst, evaluate_policy(prob, pol, z));
    }
    total += w[i] * worst;
  }
  return total;
}

// ---------------------------------------------------------------- JSON
//
//   {"format": "srosi-problem", "version": 1,
//    "stages": [{"dx": .., "dxi": .., "dy": .., "rows": ..}, ...],
//    "f": [..], "g": [..], "h": [..], "d": [..],
//    "A": [[..], ..], "B": [[..], ..], "C": [[..], ..],
//    "x_lower": [..], "x_upper": [..],        (bounds optional; null = infinite)
//    "y_mask": [[..], ..]}                    (optional, ny x nxi of 0/1)

namespace detail {

inline nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json());
  return a;
}

inline nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

inline Eigen::VectorXd json_vec(const nlohmann::json& j, double null_value) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].is_null() ? null_value : j[k].get<double>();
  return v;
}

inline Eigen::MatrixXd json_mat(const nlohmann::json& j, int rows, int cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (static_cast<int>(j.size()) != rows) throw InvalidParameter("problem json: matrix row count");
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) throw InvalidParameter("problem json: matrix column count");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const DynamicProblem& p) {
  nlohmann::json stages = nlohmann::json::array();
  for (int t = 0; t < p.stages(); ++t)
    stages.push_back({{"dx", p.dim_x[t]}, {"dxi", p.dim_xi[t]}, {"dy", p.dim_y[t]}, {"rows", p.rows[t]}});
  nlohmann::json j = {{"format", "srosi-problem"}, {"version", 1}, {"stages", stages},
                      {"f", detail::vec_json(p.f)}, {"g", detail::vec_json(p.g)},
                      {"h", detail::vec_json(p.h)}, {"d", detail::vec_json(p.d)},
                      {"A", detail::mat_json(p.A)}, {"B", detail::mat_json(p.B)}, {"C", detail::mat_json(p.C)}};
  if (p.x_lower.size()) j["x_lower"] = detail::vec_json(p.x_lower);
  if (p.x_upper.size()) j["x_upper"] = detail::vec_json(p.x_upper);
  if (p.y_mask.size()) j["y_mask"] = detail::mat_json(p.y_mask);
  return j;
}

inline DynamicProblem problem_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "srosi-problem" || j.value("version", 0) != 1)
    throw InvalidParameter("problem json: unsupported format or version");
  DynamicProblem p;
  for (const auto& s : j.at("stages")) {
    p.dim_x.push_back(s.at("dx").get<int>());
    p.dim_xi.push_back(s.at("dxi").get<int>());
    p.dim_y.push_back(s.at("dy").get<int>());
    p.rows.push_back(s.at("rows").get<int>());
  }
  p.f = detail::json_vec(j.at("f"), 0.0);
  p.g = detail::json_vec(j.at("g"), 0.0);
  p.h = detail::json_vec(j.at("h"), 0.0);
  p.d = detail::json_vec(j.at("d"), 0.0);
  const int m = static_cast<int>(p.d.size());
  p.A = detail::json_mat(j.at("A"), m, static_cast<int>(p.f.size()));
  p.B = detail::json_mat(j.at("B"), m, static_cast<int>(p.g.size()));
  p.C = detail::json_mat(j.at("C"), m, static_cast<int>(p.h.size()));
  if (j.contains("x_lower")) p.x_lower = detail::json_vec(j["x_lower"], -lp::kInf);
  if (j.contains("x_upper")) p.x_upper = detail::json_vec(j["x_upper"], lp::kInf);
  if (j.contains("y_mask"))
    p.y_mask = detail::json_mat(j["y_mask"], static_cast<int>(p.h.size()), static_cast<int>(p.g.size()));
  p.validate();
  return p;
}

inline DynamicProblem read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path);
  return problem_from_json(nlohmann::json::parse(in));
}

}  // namespace srosi
