#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>
#include <sstream>

#include "srosi/lp.hpp"

namespace lp = srosi::lp;
using lp::kInf;
using lp::Sense;

TEST(Lp, SingleVariableOptimal) {
  lp::Model m;
  m.add_variable(0, kInf, -1.0);
  m.add_row({{0, 1.0}}, Sense::Less, 1.0);
  const auto r = lp::solve(m);
  ASSERT_EQ(r.status, lp::Status::Optimal);
  EXPECT_NEAR(r.value, -1.0, 1e-12);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.duals[0], -1.0, 1e-12);
  EXPECT_TRUE(lp::check_certificate(m, r));
}

TEST(Lp, Infeasible) {
  lp::Model m;
  m.add_variable(0, kInf, 1.0);
  m.add_row({{0, 1.0}}, Sense::Less, -1.0);
  EXPECT_EQ(lp::solve(m).status, lp::Status::Infeasible);
}

TEST(Lp, UnboundedWithoutRows) {
  lp::Model m;
  m.add_variable(0, kInf, -1.0);
  EXPECT_EQ(lp::solve(m).status, lp::Status::Unbounded);
}

TEST(Lp, UnboundedWithRows) {
  lp::Model m;
  m.add_variable(0, kInf, -1.0);
  m.add_variable(0, kInf, 0.0);
  m.add_row({{0, 1.0}, {1, -1.0}}, Sense::Less, 1.0);
  EXPECT_EQ(lp::solve(m).status, lp::Status::Unbounded);
}

TEST(Lp, FreeVariablesAndEqualities) {
  // min x + y  s.t.  x - y = 1, x + y >= 3, free vars -> x=2, y=1, value 3
  lp::Model m;
  m.add_variable(-kInf, kInf, 1.0);
  m.add_variable(-kInf, kInf, 1.0);
  m.add_row({{0, 1.0}, {1, -1.0}}, Sense::Equal, 1.0);
  m.add_row({{0, 1.0}, {1, 1.0}}, Sense::Greater, 3.0);
  const auto r = lp::solve(m);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, 3.0, 1e-10);
  EXPECT_TRUE(lp::check_certificate(m, r));
}

TEST(Lp, CertificateRejectsPerturbedPoint) {
  lp::Model m;
  m.add_variable(0, kInf, -1.0);
  m.add_row({{0, 1.0}}, Sense::Less, 1.0);
  auto r = lp::solve(m);
  ASSERT_TRUE(lp::check_certificate(m, r));
  auto bad = r;
  bad.x[0] += 1.0;
  EXPECT_FALSE(lp::check_certificate(m, bad));
  bad = r;
  bad.duals[0] = -bad.duals[0];
  EXPECT_FALSE(lp::check_certificate(m, bad));
}

TEST(Lp, TextRoundTrip) {
  lp::Model m;
  m.add_variable(-10.0, 4.0, 1.5);
  m.add_variable(0.0, kInf, -2.0);
  m.add_row({{0, 1.0}, {1, 3.25}}, Sense::Less, 7.0);
  m.add_row({{1, -1.0}}, Sense::Greater, -5.0);
  std::stringstream ss;
  lp::write_text(m, ss);
  const lp::Model back = lp::read_text(ss);
  EXPECT_EQ(back.cost, m.cost);
  EXPECT_EQ(back.lower, m.lower);
  EXPECT_EQ(back.upper, m.upper);
  EXPECT_EQ(back.rhs, m.rhs);
  EXPECT_EQ(back.sense, m.sense);
  ASSERT_EQ(back.terms.size(), m.terms.size());
  const auto a = lp::solve(m), b = lp::solve(back);
  ASSERT_TRUE(a.optimal());
  EXPECT_EQ(a.value, b.value);
}

TEST(Lp, RejectsInvalidModel) {
  lp::Model m;
  m.add_variable(1.0, 0.0, 0.0);
  EXPECT_THROW(lp::solve(m), srosi::InvalidParameter);
}

namespace {

// Brute force: every basic solution of the constraint system (rows plus finite
// bounds), keeping the cheapest feasible one.  Finite bounds make the polytope
// pointed, so the optimum sits at one of these points.
double vertex_enumeration(const lp::Model& m) {
  const int n = m.num_vars();
  struct Con {
    Eigen::VectorXd a;
    double b;
    bool eq;
  };
  std::vector<Con> cons;
  for (int r = 0; r < m.num_rows(); ++r) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& t : m.row(r)) a[t.col] += t.coef;
    switch (m.sense[r]) {
      case Sense::Less: cons.push_back({a, m.rhs[r], false}); break;
      case Sense::Greater: cons.push_back({-a, -m.rhs[r], false}); break;
      case Sense::Equal: cons.push_back({a, m.rhs[r], true}); break;
    }
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    cons.push_back({e, m.upper[j], false});
    cons.push_back({-e, -m.lower[j], false});
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(n);
  const int k = static_cast<int>(cons.size());
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == n) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) {
        a.row(i) = cons[pick[i]].a.transpose();
        b[i] = cons[pick[i]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(b);
      for (const auto& c : cons) {
        const double s = c.a.dot(x) - c.b;
        if (s > 1e-8 || (c.eq && s < -1e-8)) return;
      }
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += m.cost[j] * x[j];
      best = std::min(best, v);
      return;
    }
    for (int i = start; i <= k - (n - depth); ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  visit(visit, 0, 0);
  return best;
}

lp::Model random_feasible_model(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  lp::Model model;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = -static_cast<double>(coef(rng) & 3);
    const double hi = lo + 1.0 + 3.0 * unit(rng);
    model.add_variable(lo, hi, coef(rng) + 0.5 * unit(rng));
    x0[j] = lo + (hi - lo) * unit(rng);
  }
  for (int r = 0; r < m; ++r) {
    std::vector<lp::Term> row;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.3) continue;
      const double a = coef(rng);
      row.push_back({j, a});
      act += a * x0[j];
    }
    const double u = unit(rng);
    if (u < 0.15) {
      model.add_row(row, Sense::Equal, act);
    } else if (u < 0.6) {
      model.add_row(row, Sense::Less, act + 2.0 * unit(rng));
    } else {
      model.add_row(row, Sense::Greater, act - 2.0 * unit(rng));
    }
  }
  return model;
}

}  // namespace

TEST(Lp, MatchesVertexEnumerationOnRandomModels) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> nd(1, 6), md(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const lp::Model m = random_feasible_model(rng, nd(rng), md(rng));
    const auto r = lp::solve(m);
    ASSERT_EQ(r.status, lp::Status::Optimal) << "trial " << trial;
    ASSERT_TRUE(lp::check_certificate(m, r)) << "trial " << trial;
    EXPECT_NEAR(r.value, vertex_enumeration(m), 1e-6) << "trial " << trial;
  }
}

TEST(Lp, CertifiedOnLargerRandomModels) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nd(1, 12), md(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    const lp::Model m = random_feasible_model(rng, nd(rng), md(rng));
    const auto r = lp::solve(m);
    ASSERT_EQ(r.status, lp::Status::Optimal) << "trial " << trial;
    EXPECT_TRUE(lp::check_certificate(m, r)) << "trial " << trial;
  }
}

TEST(Lp, DegenerateCycleProneModel) {
  // Beale's example; cycles under pure Dantzig pricing with naive ties.
  lp::Model m;
  m.add_variable(0, kInf, -0.75);
  m.add_variable(0, kInf, 150.0);
  m.add_variable(0, kInf, -0.02);
  m.add_variable(0, kInf, 6.0);
  m.add_row({{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}}, Sense::Less, 0.0);
  m.add_row({{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}}, Sense::Less, 0.0);
  m.add_row({{2, 1.0}}, Sense::Less, 1.0);
  const auto r = lp::solve(m);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, -0.05, 1e-9);
  EXPECT_TRUE(lp::check_certificate(m, r));
}

TEST(Lp, BlandModeAgreesWithDefaultPricing) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nd(1, 12), md(1, 12);
  lp::Options bland;
  bland.stall_threshold = 1;
  lp::Options tiny_eta;
  tiny_eta.refactor_interval = 1;
  for (int trial = 0; trial < 200; ++trial) {
    const lp::Model m = random_feasible_model(rng, nd(rng), md(rng));
    const auto a = lp::solve(m), b = lp::solve(m, bland), c = lp::solve(m, tiny_eta);
    ASSERT_TRUE(a.optimal() && b.optimal() && c.optimal()) << "trial " << trial;
    EXPECT_NEAR(a.value, b.value, 1e-7 * (1 + std::abs(a.value)));
    EXPECT_NEAR(a.value, c.value, 1e-7 * (1 + std::abs(a.value)));
    EXPECT_TRUE(lp::check_certificate(m, b));
  }
}

TEST(Lp, IterationLimitIsReported) {
  std::mt19937_64 rng(9);
  const lp::Model m = random_feasible_model(rng, 12, 12);
  lp::Options o;
  o.max_iters = 1;
  const auto r = lp::solve(m, o);
  EXPECT_TRUE(r.status == lp::Status::IterLimit || r.status == lp::Status::Optimal);
  if (r.status == lp::Status::IterLimit) EXPECT_TRUE(r.x.empty());
}

TEST(Lp, InteriorPointAgreesWithSimplex) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> nd(1, 40), md(1, 40);
  lp::Options ipm, spx;
  ipm.method = lp::Method::Barrier;
  spx.method = lp::Method::Simplex;
  int certified = 0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    const lp::Model m = random_feasible_model(rng, nd(rng), md(rng));
    const auto a = lp::solve(m, ipm), b = lp::solve(m, spx);
    ASSERT_TRUE(b.optimal());
    if (!a.optimal()) continue;
    ++certified;
    EXPECT_TRUE(lp::check_certificate(m, a)) << "trial " << trial;
    EXPECT_NEAR(a.value, b.value, 1e-6 * (1 + std::abs(b.value))) << "trial " << trial;
  }
  EXPECT_GE(certified, trials * 9 / 10);
  RecordProperty("certified", certified);
}

TEST(Lp, AutoFallsBackOnInfeasibleModel) {
  lp::Model m;
  m.add_variable(0, kInf, 1.0);
  m.add_row({{0, 1.0}}, Sense::Less, -1.0);
  lp::Options o;
  o.barrier_rows = 1;
  EXPECT_EQ(lp::solve(m, o).status, lp::Status::Infeasible);
  o.method = lp::Method::Barrier;
  EXPECT_NE(lp::solve(m, o).status, lp::Status::Optimal);
}

// Free variables bounded on one side only through rows leave an unbounded
// optimal face; coefficients span four orders of magnitude.
TEST(Lp, InteriorPointOnUnboundedOptimalFace) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> mag(-2.0, 2.0), pos(0.5, 2.0);
  lp::Model m;
  const int k = 200;
  double expected = 0.0;
  for (int i = 0; i < k; ++i) {
    const double c = std::pow(10.0, mag(rng)), s = std::pow(10.0, mag(rng)), b = pos(rng);
    const int x = m.add_variable(0.0, kInf, c);
    const int y = m.add_variable(-kInf, kInf, 0.0);
    m.add_row({{x, s}}, Sense::Greater, b);
    m.add_row({{x, 1.0}, {y, -1.0}}, Sense::Greater, 0.0);
    expected += c * b / s;
  }
  lp::Options o;
  o.method = lp::Method::Barrier;
  const auto r = lp::solve(m, o);
  ASSERT_EQ(r.status, lp::Status::Optimal) << r.message;
  EXPECT_TRUE(lp::check_certificate(m, r));
  EXPECT_NEAR(r.value, expected, 1e-7 * (1.0 + expected));
}
