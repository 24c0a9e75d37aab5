#pragma once

// Sparse bounded-variable revised simplex.
//
// Rows are stored as `lower <= a.x <= upper` internally through one logical
// column per row (a.x - r = 0, r bounded), so an all-logical basis always
// exists.  Rows whose activity at the starting point falls outside their range
// get an explicit artificial column and are driven to zero in phase one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "srosi/error.hpp"

namespace srosi::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Less, Equal, Greater };

struct Term {
  int col;
  double coef;
};

/// Linear program `min c.x  s.t.  rows (<=,=,>=) rhs,  lower <= x <= upper`.
///
/// Rows are appended in compressed-row form; duplicate column entries within
/// a row are summed.
class Model {
 public:
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Sense> sense;
  std::vector<double> rhs;
  std::vector<int> row_start{0};
  std::vector<Term> terms;

  int add_variable(double lo, double hi, double c = 0.0) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(cost.size()) - 1;
  }

  int add_row(std::span<const Term> row, Sense s, double b) {
    for (const Term& t : row) {
      if (t.coef != 0.0) terms.push_back(t);
    }
    row_start.push_back(static_cast<int>(terms.size()));
    sense.push_back(s);
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  }
  int add_row(std::initializer_list<Term> row, Sense s, double b) {
    return add_row(std::span<const Term>(row.begin(), row.size()), s, b);
  }

  [[nodiscard]] int num_vars() const { return static_cast<int>(cost.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rhs.size()); }
  [[nodiscard]] std::size_t num_nonzeros() const { return terms.size(); }

  [[nodiscard]] std::span<const Term> row(int r) const {
    return {terms.data() + row_start[r],
            static_cast<std::size_t>(row_start[r + 1] - row_start[r])};
  }

  [[nodiscard]] double row_activity(int r, std::span<const double> x) const {
    double s = 0.0;
    for (const Term& t : row(r)) s += t.coef * x[t.col];
    return s;
  }

  void validate() const {
    const auto n = cost.size();
    if (lower.size() != n || upper.size() != n)
      throw InvalidParameter("lp: bound vectors do not match variable count");
    if (sense.size() != rhs.size() || row_start.size() != rhs.size() + 1)
      throw InvalidParameter("lp: row arrays are inconsistent");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cost[j])) throw InvalidParameter("lp: non-finite cost");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
          lower[j] == kInf || upper[j] == -kInf)
        throw InvalidParameter("lp: invalid bounds on variable " + std::to_string(j));
    }
    for (const Term& t : terms) {
      if (t.col < 0 || static_cast<std::size_t>(t.col) >= n)
        throw InvalidParameter("lp: row references unknown column");
      if (!std::isfinite(t.coef)) throw InvalidParameter("lp: non-finite coefficient");
    }
    for (double b : rhs)
      if (!std::isfinite(b)) throw InvalidParameter("lp: non-finite right-hand side");
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterLimit: return "IterLimit";
  }
  return "?";
}

/// Solver output.  `duals` follow the convention L = c.x - y.(Ax - b), so
/// y <= 0 on binding `<=` rows and y >= 0 on binding `>=` rows of a
/// minimization.
struct Result {
  Status status = Status::IterLimit;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  long iterations = 0;
  std::string message;

  [[nodiscard]] bool optimal() const { return status == Status::Optimal; }
};

enum class Method { Auto, Simplex, Barrier };

struct Options {
  double feas_tol = 1e-7;
  double pivot_tol = 1e-9;
  double dual_tol = 1e-9;
  long max_iters = 0;           // 0: 20 * (rows + cols) + 10000
  int refactor_interval = 100;
  std::ostream* log = nullptr;  // progress lines every `log_every` iterations
  long log_every = 1000;
  long stall_threshold = 0;     // 0: max(500, rows); Bland's rule after that many degenerate pivots
  Method method = Method::Auto;
  int barrier_rows = 300;       // Auto: interior point first from this many rows on, simplex as fallback
};

struct CertificateTolerances {
  double primal = 1e-7;  // scaled by 1 + max|b|
  double dual = 1e-7;    // scaled by 1 + max|c|
  double gap = 1e-6;     // scaled by 1 + |value|
};

namespace detail {

class Simplex {
 public:
  Simplex(const Model& model, const Options& opts) : model_(model), opts_(opts) {
    n_ = model.num_vars();
    m_ = model.num_rows();
    build_columns();
  }

  Result solve() {
    Result res;
    if (m_ == 0) return solve_unconstrained();

    initial_point();
    max_iters_ = opts_.max_iters > 0 ? opts_.max_iters : 20L * (n_ + m_) + 10000;
    stall_limit_ = opts_.stall_threshold > 0 ? opts_.stall_threshold
                                             : std::max<long>(500, m_);
    if (!refactor()) return failure("initial basis is singular");

    if (num_art_ > 0) {
      cost_.assign(total_, 0.0);
      for (int k = 0; k < num_art_; ++k) cost_[n_ + m_ + k] = 1.0;
      const Outcome o = iterate();
      if (o == Outcome::IterLimit) return finish(Status::IterLimit, "iteration limit in phase one");
      if (o == Outcome::Failure) return failure(fail_msg_);
      double infeas = 0.0;
      for (int k = 0; k < num_art_; ++k) infeas += std::abs(x_[n_ + m_ + k]);
      if (infeas > opts_.feas_tol * (1.0 + rhs_scale_)) return finish(Status::Infeasible, "");
      for (int k = 0; k < num_art_; ++k) {
        const int j = n_ + m_ + k;
        lo_[j] = hi_[j] = 0.0;
        if (pos_[j] < 0) {
          x_[j] = 0.0;
          state_[j] = State::Fixed;
        }
      }
    }

    cost_.assign(total_, 0.0);
    std::copy(model_.cost.begin(), model_.cost.end(), cost_.begin());
    const Outcome o = iterate();
    switch (o) {
      case Outcome::Optimal: return finish(Status::Optimal, "");
      case Outcome::Unbounded: return finish(Status::Unbounded, "");
      case Outcome::IterLimit: return finish(Status::IterLimit, "iteration limit in phase two");
      case Outcome::Failure: return failure(fail_msg_);
    }
    return failure("unreachable");
  }

 private:
  enum class State : std::uint8_t { Basic, Lower, Upper, Zero, Fixed };
  enum class Outcome { Optimal, Unbounded, IterLimit, Failure };

  struct Eta {
    int pos;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };

  const Model& model_;
  Options opts_;
  int n_ = 0, m_ = 0, num_art_ = 0, total_ = 0;
  double rhs_scale_ = 0.0;

  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;

  std::vector<double> lo_, hi_, cost_, x_, d_;
  std::vector<State> state_;
  std::vector<int> head_, pos_;

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iters_ = 0, max_iters_ = 0, stall_limit_ = 0, degenerate_run_ = 0;
  bool bland_ = false;
  std::string fail_msg_;

  Eigen::VectorXd work_;
  std::vector<double> row_acc_;
  std::vector<int> row_touched_;

  void build_columns() {
    col_start_.assign(n_ + 1, 0);
    for (const Term& t : model_.terms) ++col_start_[t.col + 1];
    for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.resize(model_.terms.size());
    col_val_.resize(model_.terms.size());
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int r = 0; r < m_; ++r) {
      for (const Term& t : model_.row(r)) {
        col_row_[fill[t.col]] = r;
        col_val_[fill[t.col]] = t.coef;
        ++fill[t.col];
      }
    }
    rhs_scale_ = 0.0;
    for (double b : model_.rhs) rhs_scale_ = std::max(rhs_scale_, std::abs(b));
  }

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else if (j < n_ + m_) {
      f(j - n_, -1.0);
    } else {
      const int k = j - n_ - m_;
      f(art_row_[k], art_sign_[k]);
    }
  }

  [[nodiscard]] bool is_art(int j) const { return j >= n_ + m_; }

  void set_nonbasic_at_start(int j) {
    if (lo_[j] == hi_[j]) {
      state_[j] = State::Fixed;
      x_[j] = lo_[j];
    } else if (std::isfinite(lo_[j])) {
      state_[j] = State::Lower;
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      state_[j] = State::Upper;
      x_[j] = hi_[j];
    } else {
      state_[j] = State::Zero;
      x_[j] = 0.0;
    }
  }

  void initial_point() {
    const int base = n_ + m_;
    lo_.assign(base, 0.0);
    hi_.assign(base, 0.0);
    x_.assign(base, 0.0);
    state_.assign(base, State::Lower);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = model_.lower[j];
      hi_[j] = model_.upper[j];
      set_nonbasic_at_start(j);
    }
    for (int r = 0; r < m_; ++r) {
      const double b = model_.rhs[r];
      switch (model_.sense[r]) {
        case Sense::Less: lo_[n_ + r] = -kInf; hi_[n_ + r] = b; break;
        case Sense::Greater: lo_[n_ + r] = b; hi_[n_ + r] = kInf; break;
        case Sense::Equal: lo_[n_ + r] = b; hi_[n_ + r] = b; break;
      }
    }
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) act[col_row_[k]] += col_val_[k] * x_[j];
    }
    head_.assign(m_, -1);
    art_row_.clear();
    art_sign_.clear();
    std::vector<double> art_val;
    for (int r = 0; r < m_; ++r) {
      const int j = n_ + r;
      if (act[r] >= lo_[j] && act[r] <= hi_[j]) {
        state_[j] = State::Basic;
        x_[j] = act[r];
        head_[r] = j;
        continue;
      }
      // Logical sits at the violated bound; an artificial absorbs the residual.
      const double v = act[r] < lo_[j] ? lo_[j] : hi_[j];
      state_[j] = lo_[j] == hi_[j] ? State::Fixed : (act[r] < lo_[j] ? State::Lower : State::Upper);
      x_[j] = v;
      // a.x - r + s * art = 0  =>  s * art = v - a.x
      const double resid = v - act[r];
      art_row_.push_back(r);
      art_sign_.push_back(resid > 0 ? 1.0 : -1.0);
      art_val.push_back(std::abs(resid));
    }
    num_art_ = static_cast<int>(art_row_.size());
    total_ = base + num_art_;
    lo_.resize(total_, 0.0);
    hi_.resize(total_, kInf);
    x_.resize(total_, 0.0);
    state_.resize(total_, State::Basic);
    for (int k = 0; k < num_art_; ++k) {
      const int j = base + k;
      x_[j] = art_val[k];
      head_[art_row_[k]] = j;
    }
    pos_.assign(total_, -1);
    for (int p = 0; p < m_; ++p) pos_[head_[p]] = p;
    d_.assign(total_, 0.0);
    work_.resize(m_);
    row_acc_.assign(total_, 0.0);
  }

  bool refactor() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 2);
    for (int p = 0; p < m_; ++p) {
      for_column(head_[p], [&](int r, double v) { trip.emplace_back(r, p, v); });
    }
    Eigen::SparseMatrix<double> b(m_, m_);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    etas_.clear();
    if (lu_.info() != Eigen::Success) return false;
    recompute_primal();
    recompute_duals();
    return true;
  }

  void ftran(Eigen::VectorXd& z) const {
    z = lu_.solve(z);
    for (const Eta& e : etas_) {
      const double zp = z[e.pos] / e.pivot;
      if (zp != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) z[e.idx[k]] -= e.val[k] * zp;
      }
      z[e.pos] = zp;
    }
  }

  void btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
      v[it->pos] = s / it->pivot;
    }
    v = lu_.transpose().solve(v);
  }

  // x_B from the identity [A -I art] x = 0.
  void recompute_primal() {
    work_.setZero();
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == State::Basic || x_[j] == 0.0) continue;
      const double xv = x_[j];
      for_column(j, [&](int r, double v) { work_[r] -= v * xv; });
    }
    ftran(work_);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = work_[p];
  }

  void recompute_duals() {
    Eigen::VectorXd y(m_);
    for (int p = 0; p < m_; ++p) y[p] = cost_.empty() ? 0.0 : cost_[head_[p]];
    btran(y);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == State::Basic) {
        d_[j] = 0.0;
        continue;
      }
      double s = cost_.empty() ? 0.0 : cost_[j];
      for_column(j, [&](int r, double v) { s -= v * y[r]; });
      d_[j] = s;
    }
  }

  [[nodiscard]] Eigen::VectorXd current_duals() const {
    Eigen::VectorXd y(m_);
    for (int p = 0; p < m_; ++p) y[p] = cost_[head_[p]];
    btran(y);
    return y;
  }

  // Pricing infeasibility of a nonbasic column (0 when not attractive).
  [[nodiscard]] double attractiveness(int j) const {
    const double dj = d_[j];
    switch (state_[j]) {
      case State::Lower: return dj < -opts_.dual_tol ? -dj : 0.0;
      case State::Upper: return dj > opts_.dual_tol ? dj : 0.0;
      case State::Zero: return std::abs(dj) > opts_.dual_tol ? std::abs(dj) : 0.0;
      default: return 0.0;
    }
  }

  int price() const {
    int best = -1;
    double best_val = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == State::Basic || state_[j] == State::Fixed) continue;
      const double a = attractiveness(j);
      if (a <= 0.0) continue;
      if (bland_) return j;
      if (a > best_val) {
        best_val = a;
        best = j;
      }
    }
    return best;
  }

  [[nodiscard]] double max_primal_infeasibility() const {
    double worst = 0.0;
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      worst = std::max(worst, lo_[j] - x_[j]);
      worst = std::max(worst, x_[j] - hi_[j]);
    }
    return worst;
  }

  void trace() const {
    double obj = 0.0, infeas = 0.0;
    for (int j = 0; j < total_; ++j) obj += cost_[j] * x_[j];
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      infeas += std::max(0.0, lo_[j] - x_[j]) + std::max(0.0, x_[j] - hi_[j]);
    }
    *opts_.log << "iter " << iters_ << " obj " << obj << " infeas " << infeas << " etas " << etas_.size()
               << (bland_ ? " bland" : "") << '\n';
  }

  Outcome iterate() {
    if (!refactor()) {
      fail_msg_ = "basis became singular";
      return Outcome::Failure;
    }
    degenerate_run_ = 0;
    bland_ = false;
    int verify_rounds = 0;
    Eigen::VectorXd alpha(m_), rho(m_);
    while (true) {
      if (iters_ >= max_iters_) return Outcome::IterLimit;
      const int q = price();
      if (q < 0) {
        if (!etas_.empty() || verify_rounds == 0) {
          ++verify_rounds;
          if (!refactor()) {
            fail_msg_ = "basis became singular";
            return Outcome::Failure;
          }
          if (price() >= 0) continue;
        }
        if (max_primal_infeasibility() > opts_.feas_tol * (1.0 + rhs_scale_)) {
          fail_msg_ = "lost primal feasibility";
          return Outcome::Failure;
        }
        return Outcome::Optimal;
      }
      ++iters_;
      if (opts_.log && iters_ % opts_.log_every == 0) trace();
      const double dir = (state_[q] == State::Upper || (state_[q] == State::Zero && d_[q] > 0)) ? -1.0 : 1.0;

      alpha.setZero();
      for_column(q, [&](int r, double v) { alpha[r] = v; });
      ftran(alpha);

      // Ratio test (Harris two-pass, or textbook with Bland tie-break).
      const double htol = bland_ ? 0.0 : 1e-9 * (1.0 + rhs_scale_);
      double theta_relaxed = kInf;
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) <= opts_.pivot_tol) continue;
        const int j = head_[p];
        const double rate = -dir * a;
        double r = kInf;
        if (rate < 0 && std::isfinite(lo_[j])) r = (x_[j] - lo_[j] + htol) / -rate;
        if (rate > 0 && std::isfinite(hi_[j])) r = (hi_[j] + htol - x_[j]) / rate;
        theta_relaxed = std::min(theta_relaxed, r);
      }
      int leave_pos = -1;
      double theta = kInf;
      if (std::isfinite(theta_relaxed)) {
        double best_piv = -1.0;
        int best_col = std::numeric_limits<int>::max();
        for (int p = 0; p < m_; ++p) {
          const double a = alpha[p];
          if (std::abs(a) <= opts_.pivot_tol) continue;
          const int j = head_[p];
          const double rate = -dir * a;
          double r = kInf;
          if (rate < 0 && std::isfinite(lo_[j])) r = (x_[j] - lo_[j]) / -rate;
          if (rate > 0 && std::isfinite(hi_[j])) r = (hi_[j] - x_[j]) / rate;
          if (r > theta_relaxed) continue;
          if (bland_) {
            if (r < theta - 1e-12 || (r <= theta + 1e-12 && j < best_col)) {
              theta = std::min(theta, r);
              best_col = j;
              leave_pos = p;
            }
          } else if (std::abs(a) > best_piv) {
            best_piv = std::abs(a);
            leave_pos = p;
            theta = r;
          }
        }
        theta = std::max(theta, 0.0);
      }
      const double range = hi_[q] - lo_[q];
      const bool flip = std::isfinite(range) && range <= theta;
      if (flip) theta = range;
      if (!std::isfinite(theta)) return Outcome::Unbounded;

      const double step = dir * theta;
      if (theta != 0.0) {
        x_[q] += step;
        for (int p = 0; p < m_; ++p) {
          if (alpha[p] != 0.0) x_[head_[p]] -= step * alpha[p];
        }
      }
      if (theta * std::abs(d_[q]) <= 1e-12) {
        if (++degenerate_run_ > stall_limit_) bland_ = true;
      } else {
        degenerate_run_ = 0;
        bland_ = false;
      }

      if (flip) {
        if (dir > 0) {
          state_[q] = State::Upper;
          x_[q] = hi_[q];
        } else {
          state_[q] = State::Lower;
          x_[q] = lo_[q];
        }
        continue;
      }

      const int leave = head_[leave_pos];
      const double rate = -dir * alpha[leave_pos];
      if (rate < 0) {
        x_[leave] = lo_[leave];
        state_[leave] = lo_[leave] == hi_[leave] ? State::Fixed : State::Lower;
      } else {
        x_[leave] = hi_[leave];
        state_[leave] = lo_[leave] == hi_[leave] ? State::Fixed : State::Upper;
      }
      // Artificials that leave never return.
      if (is_art(leave) && lo_[leave] == 0.0 && hi_[leave] == 0.0) state_[leave] = State::Fixed;

      // Dual update along row leave_pos of B^-1 A.
      rho.setZero();
      rho[leave_pos] = 1.0;
      btran(rho);
      const double theta_d = d_[q] / alpha[leave_pos];
      update_reduced_costs(rho, theta_d, q, leave);

      state_[q] = State::Basic;
      head_[leave_pos] = q;
      pos_[q] = leave_pos;
      pos_[leave] = -1;
      d_[q] = 0.0;
      d_[leave] = -theta_d;

      Eta e;
      e.pos = leave_pos;
      e.pivot = alpha[leave_pos];
      for (int p = 0; p < m_; ++p) {
        if (p != leave_pos && alpha[p] != 0.0) {
          e.idx.push_back(p);
          e.val.push_back(alpha[p]);
        }
      }
      etas_.push_back(std::move(e));
      if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
        if (!refactor()) {
          fail_msg_ = "basis became singular";
          return Outcome::Failure;
        }
      }
    }
  }

  void update_reduced_costs(const Eigen::VectorXd& rho, double theta_d, int q, int leave) {
    if (theta_d == 0.0) return;
    row_touched_.clear();
    for (int r = 0; r < m_; ++r) {
      const double pr = rho[r];
      if (pr == 0.0) continue;
      for (const Term& t : model_.row(r)) {
        if (row_acc_[t.col] == 0.0) row_touched_.push_back(t.col);
        row_acc_[t.col] += pr * t.coef;
      }
      const int lj = n_ + r;
      if (state_[lj] != State::Basic) d_[lj] -= theta_d * (-pr);
    }
    for (int j : row_touched_) {
      if (state_[j] != State::Basic && j != q) d_[j] -= theta_d * row_acc_[j];
      row_acc_[j] = 0.0;
    }
    for (int k = 0; k < num_art_; ++k) {
      const int j = n_ + m_ + k;
      if (state_[j] != State::Basic) d_[j] -= theta_d * art_sign_[k] * rho[art_row_[k]];
    }
    (void)leave;
  }

  Result finish(Status s, std::string msg) {
    Result res;
    res.status = s;
    res.iterations = iters_;
    res.message = std::move(msg);
    if (s != Status::Optimal) return res;
    res.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) res.x[j] = std::clamp(res.x[j], lo_[j], hi_[j]);
    const Eigen::VectorXd y = current_duals();
    res.duals.assign(y.data(), y.data() + m_);
    res.reduced_costs.resize(n_);
    double val = 0.0;
    for (int j = 0; j < n_; ++j) {
      double dj = model_.cost[j];
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) dj -= col_val_[k] * y[col_row_[k]];
      res.reduced_costs[j] = dj;
      val += model_.cost[j] * res.x[j];
    }
    res.value = val;
    return res;
  }

  Result failure(std::string msg) {
    Result res;
    res.status = Status::IterLimit;
    res.iterations = iters_;
    res.message = "numerical failure: " + std::move(msg);
    return res;
  }

  Result solve_unconstrained() {
    Result res;
    res.x.assign(n_, 0.0);
    res.reduced_costs = model_.cost;
    double val = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double c = model_.cost[j];
      double v;
      if (c > 0) v = model_.lower[j];
      else if (c < 0) v = model_.upper[j];
      else v = std::isfinite(model_.lower[j]) ? model_.lower[j]
             : std::isfinite(model_.upper[j]) ? model_.upper[j] : 0.0;
      if (!std::isfinite(v)) {
        res.status = Status::Unbounded;
        res.x.clear();
        res.reduced_costs.clear();
        return res;
      }
      res.x[j] = v;
      val += c * v;
    }
    res.status = Status::Optimal;
    res.value = val;
    return res;
  }
};


// Primal-dual interior point (Mehrotra predictor-corrector) on
//   min c.x  s.t.  A x - w = 0,  l <= (x, w) <= u,
// where w holds the row activities.  Each Newton step solves the
// quasidefinite system [-D_x  A^T; A  D_w^-1] with a sparse LDL^T.
class Barrier {
 public:
  static constexpr double kBox = 1e7;

  Barrier(const Model& model, const Options& opts) : model_(model), opts_(opts) {
    n_ = model.num_vars();
    m_ = model.num_rows();
    nv_ = n_ + m_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(model.terms.size());
    for (int r = 0; r < m_; ++r)
      for (const Term& t : model.row(r)) trip.emplace_back(r, t.col, t.coef);
    a_.resize(m_, n_);
    a_.setFromTriplets(trip.begin(), trip.end());
    a_.makeCompressed();
    at_ = a_.transpose();
    lo_.resize(nv_);
    hi_.resize(nv_);
    // Infinite bounds become a wide box so the central path stays bounded
    // when the optimal face is not; the caller certifies against the
    // original model.
    for (int j = 0; j < n_; ++j) {
      const bool free = !std::isfinite(model.lower[j]) && !std::isfinite(model.upper[j]);
      lo_[j] = free ? -kBox : model.lower[j];
      hi_[j] = free ? kBox : model.upper[j];
    }
    for (int r = 0; r < m_; ++r) {
      const double b = model.rhs[r];
      lo_[n_ + r] = model.sense[r] == Sense::Less ? -kInf : b;
      hi_[n_ + r] = model.sense[r] == Sense::Greater ? kInf : b;
    }
    cost_ = Eigen::VectorXd::Zero(nv_);
    for (int j = 0; j < n_; ++j) cost_[j] = model.cost[j];
  }

  Result solve() {
    init();
    build_pattern();
    double scale_b = 1.0, scale_c = 1.0 + cost_.cwiseAbs().maxCoeff();
    for (int j = 0; j < nv_; ++j) {
      if (std::isfinite(lo_[j])) scale_b = std::max(scale_b, 1.0 + std::abs(lo_[j]));
      if (std::isfinite(hi_[j])) scale_b = std::max(scale_b, 1.0 + std::abs(hi_[j]));
    }
    const long max_iters = opts_.max_iters > 0 ? std::min<long>(opts_.max_iters, 300) : 300;
    Step aff, cor;
    bool near = false;  // last iterate close enough for the certificate check
    for (iters_ = 0; iters_ < max_iters; ++iters_) {
      residuals();
      const double mu = complementarity() / std::max(1, ncomp_);
      const double pinf = std::max({rp_.lpNorm<Eigen::Infinity>(), rl_.lpNorm<Eigen::Infinity>(),
                                    ru_.lpNorm<Eigen::Infinity>()}) / scale_b;
      const double dinf = rd_.lpNorm<Eigen::Infinity>() / scale_c;
      const double pobj = cost_.dot(v_);
      if (!std::isfinite(mu) || !std::isfinite(pobj) || !std::isfinite(pinf + dinf)) break;
      const double gap = complementarity() / (1.0 + std::abs(pobj));
      if (opts_.log && iters_ % std::max<long>(1, opts_.log_every / 100) == 0)
        *opts_.log << "ipm " << iters_ << " obj " << pobj << " pinf " << pinf << " dinf " << dinf << " gap " << gap << '\n';
      if (pinf < 1e-10 && dinf < 1e-10 && gap < 1e-10) return extract();
      near = std::max({pinf, dinf, gap}) < 1e-7;
      bool ok = factorize();
      while (!ok && reg_p_ < 1e-4) {
        reg_p_ *= 100.0;
        reg_d_ *= 100.0;
        ok = factorize();
      }
      if (!ok) break;

      // Predictor.
      kl_ = -(gl_.array() * zl_.array()).matrix();
      ku_ = -(gu_.array() * zu_.array()).matrix();
      newton(aff);
      const double ap = primal_step(aff), ad = dual_step(aff);
      double mu_aff = 0.0;
      for (int j = 0; j < nv_; ++j) {
        if (hasl_[j]) mu_aff += (gl_[j] + ap * aff.gl[j]) * (zl_[j] + ad * aff.zl[j]);
        if (hasu_[j]) mu_aff += (gu_[j] + ap * aff.gu[j]) * (zu_[j] + ad * aff.zu[j]);
      }
      mu_aff /= std::max(1, ncomp_);
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // Corrector.
      for (int j = 0; j < nv_; ++j) {
        kl_[j] = hasl_[j] ? sigma * mu - gl_[j] * zl_[j] - aff.gl[j] * aff.zl[j] : 0.0;
        ku_[j] = hasu_[j] ? sigma * mu - gu_[j] * zu_[j] - aff.gu[j] * aff.zu[j] : 0.0;
      }
      newton(cor);
      const double sp = std::min(1.0, 0.995 * primal_step(cor) / 1.0);
      const double sd = std::min(1.0, 0.995 * dual_step(cor) / 1.0);
      v_ += sp * cor.v;
      gl_ += sp * cor.gl;
      gu_ += sp * cor.gu;
      y_ += sd * cor.y;
      zl_ += sd * cor.zl;
      zu_ += sd * cor.zu;
      if (opts_.log && (sp < 1e-3 || sd < 1e-3)) *opts_.log << "ipm short step " << sp << ' ' << sd << '\n';
      if (sp < 1e-10 && sd < 1e-10) break;
    }
    if (near) {
      residuals();
      if (rp_.allFinite() && rd_.allFinite()) return extract();
    }
    Result res;
    res.status = Status::IterLimit;
    res.iterations = iters_;
    res.message = "numerical failure: interior point did not converge";
    return res;
  }

 private:
  struct Step {
    Eigen::VectorXd v, y, gl, gu, zl, zu;
  };

  const Model& model_;
  Options opts_;
  int n_ = 0, m_ = 0, nv_ = 0, ncomp_ = 0;
  long iters_ = 0;
  Eigen::SparseMatrix<double> a_, at_;
  std::vector<double> lo_, hi_;
  std::vector<char> hasl_, hasu_, fixed_;
  Eigen::VectorXd cost_, v_, y_, gl_, gu_, zl_, zu_;
  Eigen::VectorXd rp_, rd_, rl_, ru_, kl_, ku_, diag_;

  // KKT pattern: movable x first, then one entry per row.
  std::vector<int> kx_;
  int nk_ = 0;
  Eigen::SparseMatrix<double> kkt_;
  std::vector<int> diag_slot_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldl_;
  bool analyzed_ = false;
  double reg_p_ = 1e-9, reg_d_ = 1e-9;

  void init() {
    hasl_.assign(nv_, 0);
    hasu_.assign(nv_, 0);
    fixed_.assign(nv_, 0);
    v_ = Eigen::VectorXd::Zero(nv_);
    gl_ = gu_ = zl_ = zu_ = Eigen::VectorXd::Zero(nv_);
    ncomp_ = 0;
    for (int j = 0; j < n_; ++j) {
      if (lo_[j] == hi_[j]) {
        fixed_[j] = 1;
        v_[j] = lo_[j];
      } else {
        v_[j] = std::clamp(0.0, lo_[j], hi_[j]);
        if (std::isfinite(lo_[j]) && std::isfinite(hi_[j])) v_[j] = 0.5 * (lo_[j] + hi_[j]);
      }
    }
    const Eigen::VectorXd act = a_ * v_.head(n_);
    for (int r = 0; r < m_; ++r) {
      const int j = n_ + r;
      if (lo_[j] == hi_[j]) {
        fixed_[j] = 1;
        v_[j] = lo_[j];
      } else {
        v_[j] = std::clamp(act[r], lo_[j], hi_[j]);
      }
    }
    for (int j = 0; j < nv_; ++j) {
      if (fixed_[j]) continue;
      if (std::isfinite(lo_[j])) {
        hasl_[j] = 1;
        ++ncomp_;
        gl_[j] = std::max(v_[j] - lo_[j], 1.0);
        zl_[j] = lo_[j] == -kBox ? 1.0 / gl_[j] : 1.0;
      }
      if (std::isfinite(hi_[j])) {
        hasu_[j] = 1;
        ++ncomp_;
        gu_[j] = std::max(hi_[j] - v_[j], 1.0);
        zu_[j] = hi_[j] == kBox ? 1.0 / gu_[j] : 1.0;
      }
    }
    y_ = Eigen::VectorXd::Zero(m_);
    kx_.assign(n_, -1);
    nk_ = 0;
    for (int j = 0; j < n_; ++j)
      if (!fixed_[j]) kx_[j] = nk_++;
  }

  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) trip.emplace_back(kx_[j], kx_[j], 1.0);
    for (int r = 0; r < m_; ++r) trip.emplace_back(nk_ + r, nk_ + r, 1.0);
    for (int j = 0; j < n_; ++j) {
      if (kx_[j] < 0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it)
        trip.emplace_back(nk_ + static_cast<int>(it.row()), kx_[j], it.value());
    }
    kkt_.resize(nk_ + m_, nk_ + m_);
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    diag_slot_.assign(nk_ + m_, -1);
    for (int c = 0; c < kkt_.outerSize(); ++c)
      for (int k = kkt_.outerIndexPtr()[c]; k < kkt_.outerIndexPtr()[c + 1]; ++k)
        if (kkt_.innerIndexPtr()[k] == c) diag_slot_[c] = k;
    diag_ = Eigen::VectorXd::Zero(nv_);
  }

  void residuals() {
    const Eigen::VectorXd act = a_ * v_.head(n_);
    rp_ = v_.tail(m_) - act;
    const Eigen::VectorXd aty = at_ * y_;
    rd_ = Eigen::VectorXd::Zero(nv_);
    rl_ = Eigen::VectorXd::Zero(nv_);
    ru_ = Eigen::VectorXd::Zero(nv_);
    for (int j = 0; j < nv_; ++j) {
      if (fixed_[j]) continue;
      const double mty = j < n_ ? aty[j] : -y_[j - n_];
      rd_[j] = cost_[j] - mty - zl_[j] + zu_[j];
      if (hasl_[j]) rl_[j] = lo_[j] + gl_[j] - v_[j];
      if (hasu_[j]) ru_[j] = hi_[j] - v_[j] - gu_[j];
    }
  }

  [[nodiscard]] double complementarity() const { return gl_.dot(zl_) + gu_.dot(zu_); }

  bool factorize() {
    for (int j = 0; j < nv_; ++j) {
      double d = 0.0;
      if (hasl_[j]) d += zl_[j] / gl_[j];
      if (hasu_[j]) d += zu_[j] / gu_[j];
      diag_[j] = d;
    }
    double* val = kkt_.valuePtr();
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) val[diag_slot_[kx_[j]]] = -diag_[j] - reg_p_;
    for (int r = 0; r < m_; ++r) {
      const int j = n_ + r;
      val[diag_slot_[nk_ + r]] = (fixed_[j] ? 0.0 : 1.0 / diag_[j]) + reg_d_;
    }
    if (!analyzed_) {
      ldl_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    ldl_.factorize(kkt_);
    return ldl_.info() == Eigen::Success;
  }

  // K without regularization, applied to (dx, dy).
  [[nodiscard]] Eigen::VectorXd apply_kkt(const Eigen::VectorXd& s) const {
    Eigen::VectorXd out(nk_ + m_);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) dx[j] = s[kx_[j]];
    const Eigen::VectorXd dy = s.tail(m_);
    const Eigen::VectorXd aty = at_ * dy;
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) out[kx_[j]] = -diag_[j] * dx[j] + aty[j];
    const Eigen::VectorXd adx = a_ * dx;
    for (int r = 0; r < m_; ++r) {
      const int j = n_ + r;
      out[nk_ + r] = adx[r] + (fixed_[j] ? 0.0 : dy[r] / diag_[j]);
    }
    return out;
  }

  void newton(Step& st) {
    // r = -rd + (kl + zl rl) / gl - (ku - zu ru) / gu
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nv_);
    for (int j = 0; j < nv_; ++j) {
      if (fixed_[j]) continue;
      double s = -rd_[j];
      if (hasl_[j]) s += (kl_[j] + zl_[j] * rl_[j]) / gl_[j];
      if (hasu_[j]) s -= (ku_[j] - zu_[j] * ru_[j]) / gu_[j];
      r[j] = s;
    }
    Eigen::VectorXd rhs(nk_ + m_);
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) rhs[kx_[j]] = -r[j];
    for (int row = 0; row < m_; ++row) {
      const int j = n_ + row;
      rhs[nk_ + row] = rp_[row] + (fixed_[j] ? 0.0 : r[j] / diag_[j]);
    }
    Eigen::VectorXd sol = ldl_.solve(rhs);
    Eigen::VectorXd res = rhs - apply_kkt(sol);
    double err = res.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < 10 && err > 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()); ++k) {
      const Eigen::VectorXd next = sol + ldl_.solve(res);
      const Eigen::VectorXd nres = rhs - apply_kkt(next);
      const double nerr = nres.lpNorm<Eigen::Infinity>();
      if (!(nerr < 0.5 * err)) break;
      sol = next;
      res = nres;
      err = nerr;
    }

    st.v = Eigen::VectorXd::Zero(nv_);
    for (int j = 0; j < n_; ++j)
      if (kx_[j] >= 0) st.v[j] = sol[kx_[j]];
    st.y = sol.tail(m_);
    for (int row = 0; row < m_; ++row) {
      const int j = n_ + row;
      if (!fixed_[j]) st.v[j] = (r[j] - st.y[row]) / diag_[j];
    }
    st.gl = st.gu = st.zl = st.zu = Eigen::VectorXd::Zero(nv_);
    for (int j = 0; j < nv_; ++j) {
      if (hasl_[j]) {
        st.gl[j] = st.v[j] - rl_[j];
        st.zl[j] = (kl_[j] - zl_[j] * st.gl[j]) / gl_[j];
      }
      if (hasu_[j]) {
        st.gu[j] = ru_[j] - st.v[j];
        st.zu[j] = (ku_[j] - zu_[j] * st.gu[j]) / gu_[j];
      }
    }
  }

  static double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx, const std::vector<char>& mask) {
    double a = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (mask[j] && dx[j] < 0.0) a = std::min(a, -x[j] / dx[j]);
    return a;
  }

  [[nodiscard]] double primal_step(const Step& s) const {
    return std::min(max_step(gl_, s.gl, hasl_), max_step(gu_, s.gu, hasu_));
  }
  [[nodiscard]] double dual_step(const Step& s) const {
    return std::min(max_step(zl_, s.zl, hasl_), max_step(zu_, s.zu, hasu_));
  }

  Result extract() const {
    Result res;
    res.status = Status::Optimal;
    res.iterations = iters_;
    res.x.resize(n_);
    for (int j = 0; j < n_; ++j) res.x[j] = std::clamp(v_[j], lo_[j], hi_[j]);
    res.duals.assign(y_.data(), y_.data() + m_);
    const Eigen::VectorXd aty = at_ * y_;
    res.reduced_costs.resize(n_);
    double val = 0.0;
    for (int j = 0; j < n_; ++j) {
      res.reduced_costs[j] = cost_[j] - aty[j];
      val += cost_[j] * res.x[j];
    }
    res.value = val;
    return res;
  }
};

// Row and column factors (powers of two) from alternating geometric-mean
// passes: the scaled model has coefficients row[r] * a_rj * col[j] on
// variables x_j / col[j].
struct Scaling {
  Model model;
  std::vector<double> row, col;
  double cost = 1.0, bound = 1.0;  // objective and right-hand-side divisors
};

inline Scaling equilibrate(const Model& model, int passes = 6) {
  const int n = model.num_vars(), m = model.num_rows();
  Scaling sc{model, std::vector<double>(m, 1.0), std::vector<double>(n, 1.0)};
  auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
  std::vector<double> lo, hi;
  for (int pass = 0; pass < passes; ++pass) {
    for (int r = 0; r < m; ++r) {
      double a = kInf, b = 0.0;
      for (const Term& t : model.row(r)) {
        const double v = std::abs(t.coef) * sc.row[r] * sc.col[t.col];
        a = std::min(a, v);
        b = std::max(b, v);
      }
      if (b > 0.0) sc.row[r] *= pow2(1.0 / std::sqrt(a * b));
    }
    lo.assign(n, kInf);
    hi.assign(n, 0.0);
    for (int r = 0; r < m; ++r)
      for (const Term& t : model.row(r)) {
        const double v = std::abs(t.coef) * sc.row[r] * sc.col[t.col];
        lo[t.col] = std::min(lo[t.col], v);
        hi[t.col] = std::max(hi[t.col], v);
      }
    for (int j = 0; j < n; ++j)
      if (hi[j] > 0.0) sc.col[j] *= pow2(1.0 / std::sqrt(lo[j] * hi[j]));
  }
  Model& s = sc.model;
  double cmax = 0.0, bmax = 0.0;
  for (int j = 0; j < n; ++j) {
    s.cost[j] *= sc.col[j];
    s.lower[j] /= sc.col[j];
    s.upper[j] /= sc.col[j];
    cmax = std::max(cmax, std::abs(s.cost[j]));
    if (std::isfinite(s.lower[j])) bmax = std::max(bmax, std::abs(s.lower[j]));
    if (std::isfinite(s.upper[j])) bmax = std::max(bmax, std::abs(s.upper[j]));
  }
  for (int r = 0; r < m; ++r) {
    s.rhs[r] *= sc.row[r];
    bmax = std::max(bmax, std::abs(s.rhs[r]));
    for (int k = s.row_start[r]; k < s.row_start[r + 1]; ++k) s.terms[k].coef *= sc.row[r] * sc.col[s.terms[k].col];
  }
  if (cmax > 0.0) sc.cost = pow2(cmax);
  if (bmax > 0.0) sc.bound = pow2(bmax);
  for (int j = 0; j < n; ++j) {
    s.cost[j] /= sc.cost;
    s.lower[j] /= sc.bound;
    s.upper[j] /= sc.bound;
  }
  for (int r = 0; r < m; ++r) s.rhs[r] /= sc.bound;
  return sc;
}

// Maps a result on the scaled model back to the original variables.
inline void unscale(const Model& model, const Scaling& sc, Result& res) {
  if (!res.optimal()) return;
  res.value = 0.0;
  for (std::size_t j = 0; j < res.x.size(); ++j) {
    res.x[j] *= sc.col[j] * sc.bound;
    res.reduced_costs[j] *= sc.cost / sc.col[j];
    res.value += model.cost[j] * res.x[j];
  }
  for (std::size_t r = 0; r < res.duals.size(); ++r) res.duals[r] *= sc.row[r] * sc.cost;
}

}  // namespace detail

/// Primal feasibility, dual feasibility, complementary slackness and a
/// vanishing duality gap, each within the scaled tolerances.  Slackness is
/// measured as the product of a dual and its slack, so interior points
/// near the optimum qualify as well as vertices.
inline bool check_certificate(const Model& model, const Result& res,
                              const CertificateTolerances& tol = {}) {
  if (res.status != Status::Optimal) return false;
  const int n = model.num_vars(), m = model.num_rows();
  if (static_cast<int>(res.x.size()) != n || static_cast<int>(res.duals.size()) != m) return false;

  double bscale = 0.0, cscale = 0.0;
  for (double b : model.rhs) bscale = std::max(bscale, std::abs(b));
  for (double c : model.cost) cscale = std::max(cscale, std::abs(c));
  const double ptol = tol.primal * (1.0 + bscale);
  const double dtol = tol.dual * (1.0 + cscale);
  const double gtol = tol.gap * (1.0 + std::abs(res.value));

  double primal = 0.0;
  for (int j = 0; j < n; ++j) {
    if (res.x[j] < model.lower[j] - ptol || res.x[j] > model.upper[j] + ptol) return false;
    primal += model.cost[j] * res.x[j];
  }
  std::vector<double> z(model.cost);
  double dual = 0.0;
  for (int r = 0; r < m; ++r) {
    const double act = model.row_activity(r, res.x);
    const double slack = model.rhs[r] - act;
    const double y = res.duals[r];
    switch (model.sense[r]) {
      case Sense::Less:
        if (slack < -ptol || y > dtol) return false;
        break;
      case Sense::Greater:
        if (slack > ptol || y < -dtol) return false;
        break;
      case Sense::Equal:
        if (std::abs(slack) > ptol) return false;
        break;
    }
    if (model.sense[r] != Sense::Equal && std::abs(y * slack) > gtol) return false;
    dual += y * model.rhs[r];
    for (const Term& t : model.row(r)) z[t.col] -= t.coef * y;
  }
  for (int j = 0; j < n; ++j) {
    const double zj = z[j];
    if (zj > dtol) {
      if (!std::isfinite(model.lower[j]) || zj * (res.x[j] - model.lower[j]) > gtol) return false;
      dual += zj * model.lower[j];
    } else if (zj < -dtol) {
      if (!std::isfinite(model.upper[j]) || zj * (res.x[j] - model.upper[j]) > gtol) return false;
      dual += zj * model.upper[j];
    } else if (zj != 0.0) {
      // Tiny reduced cost: charge it at whichever finite bound the point sits on.
      const double at = std::isfinite(model.lower[j]) && std::abs(res.x[j] - model.lower[j]) <= ptol
                            ? model.lower[j]
                        : std::isfinite(model.upper[j]) ? model.upper[j]
                                                        : res.x[j];
      dual += zj * at;
    }
  }
  return std::abs(primal - dual) <= gtol && std::abs(primal - res.value) <= gtol;
}

/// Solves `model`.  An `Optimal` result always carries a primal point, row
/// duals and reduced costs that pass `check_certificate`.
inline Result solve(const Model& model, const Options& opts = {}) {
  model.validate();
  const bool barrier = opts.method == Method::Barrier ||
                       (opts.method == Method::Auto && model.num_rows() >= opts.barrier_rows);
  if (barrier) {
    const detail::Scaling sc = detail::equilibrate(model, 6);
    detail::Barrier b(sc.model, opts);
    Result res = b.solve();
    detail::unscale(model, sc, res);
    if (res.optimal() && check_certificate(model, res)) return res;
    if (opts.method == Method::Barrier) {
      if (res.optimal()) {
        res.status = Status::IterLimit;
        res.message = "numerical failure: interior point result failed the certificate check";
      }
      return res;
    }
  }
  detail::Simplex s(model, opts);
  return s.solve();
}

// Plain-text model dump, one record per line:
//   SROSI-LP 1
//   VARS <n>
//   <j> <lower> <upper> <cost>        (n lines, bounds may be -inf/inf)
//   ROWS <m>
//   <r> <L|E|G> <rhs> <k> <col> <coef> ... (k pairs)
//   END
inline void write_text(const Model& model, std::ostream& os) {
  const auto old_prec = os.precision(17);
  os << "SROSI-LP 1\nVARS " << model.num_vars() << '\n';
  for (int j = 0; j < model.num_vars(); ++j)
    os << j << ' ' << model.lower[j] << ' ' << model.upper[j] << ' ' << model.cost[j] << '\n';
  os << "ROWS " << model.num_rows() << '\n';
  for (int r = 0; r < model.num_rows(); ++r) {
    const char s = model.sense[r] == Sense::Less ? 'L' : model.sense[r] == Sense::Equal ? 'E' : 'G';
    const auto row = model.row(r);
    os << r << ' ' << s << ' ' << model.rhs[r] << ' ' << row.size();
    for (const Term& t : row) os << ' ' << t.col << ' ' << t.coef;
    os << '\n';
  }
  os << "END\n";
  os.precision(old_prec);
}

namespace detail {
inline double parse_bound(const std::string& tok) {
  if (tok == "inf" || tok == "+inf") return kInf;
  if (tok == "-inf") return -kInf;
  return std::stod(tok);
}
}  // namespace detail

inline Model read_text(std::istream& is) {
  Model model;
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "SROSI-LP" || version != 1)
    throw InvalidParameter("lp text: bad header");
  int n = 0;
  if (!(is >> tag >> n) || tag != "VARS" || n < 0) throw InvalidParameter("lp text: expected VARS");
  for (int j = 0; j < n; ++j) {
    int idx;
    std::string lo, hi;
    double c;
    if (!(is >> idx >> lo >> hi >> c) || idx != j) throw InvalidParameter("lp text: bad variable line");
    model.add_variable(detail::parse_bound(lo), detail::parse_bound(hi), c);
  }
  int m = 0;
  if (!(is >> tag >> m) || tag != "ROWS" || m < 0) throw InvalidParameter("lp text: expected ROWS");
  std::vector<Term> row;
  for (int r = 0; r < m; ++r) {
    int idx;
    char s;
    double b;
    std::size_t k;
    if (!(is >> idx >> s >> b >> k) || idx != r) throw InvalidParameter("lp text: bad row line");
    row.resize(k);
    for (auto& t : row)
      if (!(is >> t.col >> t.coef)) throw InvalidParameter("lp text: truncated row");
    const Sense sense = s == 'L' ? Sense::Less : s == 'E' ? Sense::Equal : s == 'G' ? Sense::Greater
                                                                                : throw InvalidParameter("lp text: bad sense");
    model.add_row(row, sense, b);
  }
  if (!(is >> tag) || tag != "END") throw InvalidParameter("lp text: missing END");
  model.validate();
  return model;
}

}  // namespace srosi::lp
