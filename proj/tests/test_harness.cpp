#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "srosi/harness.hpp"

using namespace srosi;
using namespace srosi::harness;

namespace {

bool same(const Dataset& a, const Dataset& b) {
  return a.gammas == b.gammas && a.xis == b.xis && a.stage_dims == b.stage_dims;
}

// Binomial tail by Pascal's triangle.
double binomial_tail(int wins, int n) {
  std::vector<double> row{1.0};
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t k = 0; k < row.size(); ++k) {
      next[k] += row[k];
      next[k + 1] += row[k];
    }
    row = next;
  }
  double tail = 0.0;
  for (int k = wins; k <= n; ++k) tail += row[k];
  return tail / std::pow(2.0, n);
}

// Integral of |1{t >= xi} - F_U(t)|: two triangles inside [a, b] split at
// the clamped point, plus the stretch between xi and the interval.
double point_vs_uniform(double xi, double a, double b) {
  const double c = std::clamp(xi, a, b);
  return ((c - a) * (c - a) + (b - c) * (b - c)) / (2.0 * (b - a)) + std::abs(xi - c);
}

ExperimentConfig small_newsvendor() {
  ExperimentConfig c;
  c.generator = Generator::Newsvendor;
  c.methods = {Method::Saa, Method::Sro, Method::PtpKnn, Method::SrosiKnn, Method::PtpKernel, Method::SrosiCart,
               Method::PtpRf};
  c.eps_grid = {0.02, 0.1};
  c.knn_grid = {3, 8};
  c.bandwidth_grid = {0.1, 0.3};
  c.leaf_grid = {3};
  c.trees = 5;
  c.n_grid = {12, 20};
  c.reps = 2;
  c.test_queries = 4;
  c.test_draws = 10;
  c.seed = 99;
  return c;
}

}  // namespace

TEST(Generators, Deterministic) {
  for (Generator g : {Generator::Newsvendor, Generator::Inventory, Generator::Portfolio, Generator::Shipment}) {
    EXPECT_TRUE(same(generate(g, 7, 3), generate(g, 7, 3))) << to_string(g);
    EXPECT_FALSE(same(generate(g, 7, 3), generate(g, 7, 4))) << to_string(g);
  }
}

TEST(Generators, NewsvendorConditionalMean) {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 0.3);
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += draw_xi(Generator::Newsvendor, g, rng)[0];
  // U[0,1] has standard deviation 1 / sqrt(12).
  EXPECT_NEAR(s / n, 0.8, 3.0 / std::sqrt(12.0 * n));
  EXPECT_EQ(gen::newsvendor_optimal_value(0.7), 0.25);
  const auto d = gen::newsvendor_data(500, 1);
  EXPECT_TRUE(((d.xis - d.gammas).array() >= 0.0).all() && ((d.xis - d.gammas).array() <= 1.0).all());
}

TEST(Generators, InventoryDemand) {
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  for (int t = 1; t <= 12; ++t)
    EXPECT_NEAR(gen::inventory_demand(zero, t, 0.0), 100.0 + 30.0 * std::sin(2.0 * M_PI * t / 12.0), 1e-12);
  EXPECT_GE(generate(Generator::Inventory, 300, 2).xis.minCoeff(), 0.0);
  const auto p = problem_for(Generator::Inventory);
  EXPECT_EQ(p.nx(), 24);
  EXPECT_EQ(p.ny(), 12);
  EXPECT_EQ(p.nrows(), 24);
}

TEST(Generators, PortfolioMoments) {
  EXPECT_EQ(gen::portfolio_mean(Eigen::Vector3d::Zero()), Eigen::VectorXd::Zero(gen::kAssets));
  const Eigen::MatrixXd root = gen::portfolio_covariance_sqrt();
  EXPECT_LT((root * root - gen::portfolio_covariance()).norm(), 1e-15);
  std::mt19937_64 rng(8);
  const int n = 20000;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(gen::kAssets), s2 = s;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd r = draw_xi(Generator::Portfolio, Eigen::Vector3d::Zero(), rng);
    s += r;
    s2 += r.cwiseProduct(r);
  }
  for (int j = 0; j < gen::kAssets; ++j) {
    const double sd = root.row(j).norm();
    EXPECT_NEAR(sd, 0.02, 1e-15);
    EXPECT_NEAR(s[j] / n, 0.0, 3.0 * sd / std::sqrt(n));
    // The variance estimate of a Gaussian has standard error sigma^2 sqrt(2 / n).
    EXPECT_NEAR(s2[j] / n, sd * sd, 3.0 * sd * sd * std::sqrt(2.0 / n));
  }
}

TEST(Generators, ShipmentRecourse) {
  const auto p = problem_for(Generator::Shipment);
  PrimaryPolicy none{Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Zero(4, 12)};
  EXPECT_NEAR(evaluate_policy(p, none, Eigen::VectorXd::Zero(12)), 0.0, 1e-9);
  for (int l = 0; l < 12; ++l) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(12);
    xi[l] = 1.0;
    double cheapest = 1e9;
    for (int f = 0; f < 4; ++f) cheapest = std::min(cheapest, gen::shipment_cost(f, l));
    EXPECT_NEAR(evaluate_policy(p, none, xi), -90.0 + 100.0 + cheapest, 1e-9) << "location " << l;
  }
}

TEST(Experiment, SaaOnlyMatchesDirectPipeline) {
  ExperimentConfig c;
  c.generator = Generator::Newsvendor;
  c.methods = {Method::Saa};
  c.eps_grid = {0.0};
  c.n_grid = {15};
  c.reps = 2;
  c.test_queries = 3;
  c.test_draws = 7;
  c.seed = 4;
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 2u);
  const auto prob = gen::newsvendor_problem();
  for (const auto& r : rows) {
    ASSERT_TRUE(r.ok()) << r.status;
    EXPECT_EQ(r.eps, 0.0);
    const auto train = generate(Generator::Newsvendor, 15, mix_seed(4, 15, r.rep));
    const auto test = make_test_set(Generator::Newsvendor, 3, 7, mix_seed(4, 0x7e57, r.rep));
    const auto sol = solve_sro(prob, train, WeightVector::Constant(15, 1.0 / 15), {0.0});
    double total = 0.0;
    for (const auto& ps : test.paths)
      for (const auto& xi : ps) total += std::abs(sol.policy.primary.x0[0] - xi[0]);
    EXPECT_NEAR(r.oos_cost, total / 21.0, 1e-9);
  }
}

TEST(Experiment, DeterministicCsv) {
  const auto c = small_newsvendor();
  // Wall-clock seconds are the only column allowed to differ.
  auto untimed = [](std::vector<ResultRow> rows) {
    for (auto& r : rows) r.solve_s = 0.0;
    return rows;
  };
  std::ostringstream a, b;
  write_results(untimed(run_experiment(c)), a);
  write_results(untimed(run_experiment(c)), b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  const auto rows = read_results(in);
  EXPECT_EQ(rows.size(), c.n_grid.size() * c.reps * c.methods.size());
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok()) << r.method << ' ' << r.status;
    EXPECT_TRUE(std::isfinite(r.oos_cost));
    EXPECT_EQ(r.eps > 0.0, r.method == "SRO" || r.method.rfind("SROSI", 0) == 0) << r.method;
  }
}

TEST(Experiment, KnnWithAllSamplesEqualsSro) {
  ExperimentConfig c;
  c.generator = Generator::Newsvendor;
  c.methods = {Method::Sro, Method::SrosiKnn};
  c.eps_grid = {0.05, 0.2};
  c.knn_grid = {30};
  c.n_grid = {30};
  c.reps = 3;
  c.test_queries = 3;
  c.test_draws = 5;
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 6u);
  for (int rep = 0; rep < 3; ++rep) {
    EXPECT_EQ(rows[2 * rep].eps, rows[2 * rep + 1].eps);
    EXPECT_NEAR(rows[2 * rep].oos_cost, rows[2 * rep + 1].oos_cost, 1e-12);
  }
}

TEST(Experiment, FailedRowIsRecorded) {
  ExperimentConfig c;
  c.generator = Generator::Newsvendor;
  c.methods = {Method::PtpKernel, Method::Saa};
  c.bandwidth_grid = {1e-9};
  c.kernel = KernelKind::Triangular;
  c.n_grid = {10};
  c.test_queries = 2;
  c.test_draws = 2;
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].ok());
  EXPECT_TRUE(std::isnan(rows[0].oos_cost));
  EXPECT_TRUE(rows[1].ok());
}

TEST(Experiment, ConfigJsonAndValidation) {
  const auto c = small_newsvendor();
  const auto back = experiment_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  auto bad = to_json(c);
  bad["reps"] = 0;
  EXPECT_THROW(experiment_from_json(bad), InvalidParameter);
  bad = to_json(c);
  bad["N"] = nlohmann::json::array();
  EXPECT_THROW(experiment_from_json(bad), InvalidParameter);
  bad = to_json(c);
  bad["k"] = nlohmann::json::array();
  EXPECT_THROW(experiment_from_json(bad), InvalidParameter);
  bad = to_json(c);
  bad.erase("generator");
  EXPECT_THROW(experiment_from_json(bad), InvalidParameter);
  bad = to_json(c);
  bad["version"] = 2;
  EXPECT_THROW(experiment_from_json(bad), InvalidParameter);
}

TEST(Experiment, ResultCsvRoundTrip) {
  std::vector<ResultRow> rows{{"SAA", 10, 0.0, "-", 0, 0.123456789012345678, 0.5, "ok"},
                              {"SROSI-knn", 10, 0.1, "k=3", 1, std::nan(""), 0.0, "error: no mass; sorry"}};
  std::ostringstream os;
  write_results(rows, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "method,N,eps,params,rep,oos_cost,solve_s,status");
  std::istringstream is(os.str());
  const auto back = read_results(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], rows[0]);
  EXPECT_TRUE(std::isnan(back[1].oos_cost));
  EXPECT_EQ(back[1].status, rows[1].status);
  std::istringstream wrong("a,b\n");
  EXPECT_THROW(read_results(wrong), InvalidParameter);
}

TEST(Studies, ConcentrationSingleSample) {
  ScheduleParams s{ScheduleMethod::Knn, 1.0, 0.08, 0.75, 1.0};
  const auto rows = run_concentration({1}, 5, s, 21);
  for (const auto& r : rows) {
    const auto data = gen::newsvendor_data(1, mix_seed(21, 1, r.rep));
    EXPECT_NEAR(r.d1, point_vs_uniform(data.xis(0, 0), 0.5, 1.5), 1e-14);
    EXPECT_EQ(r.eps, 1.0);
  }
}

TEST(Studies, ConcentrationAndConvergenceColumns) {
  ScheduleParams s{ScheduleMethod::Knn, 0.5, 0.1, 0.75, 1.0};
  const auto conc = run_concentration({10, 40}, 3, s, 2);
  ASSERT_EQ(conc.size(), 6u);
  for (const auto& r : conc) {
    EXPECT_GE(r.d1, 0.0);
    EXPECT_NEAR(r.eps, 0.5 * std::pow(r.n, -0.1), 1e-15);
  }
  const auto conv = run_convergence({10, 40}, 3, s, 2);
  ASSERT_EQ(conv.size(), 6u);
  for (const auto& r : conv) {
    EXPECT_EQ(r.v_star, 0.25);
    EXPECT_GE(r.v_hat, -1e-9);
  }
  std::ostringstream a, b;
  write_concentration(conc, a);
  write_convergence(conv, b);
  std::istringstream ia(a.str()), ib(b.str());
  EXPECT_EQ(read_concentration(ia), conc);
  EXPECT_EQ(read_convergence(ib), conv);
  EXPECT_THROW(run_concentration({}, 1, s, 0), InvalidParameter);
  ScheduleParams bad = s;
  bad.p = 0.3;
  EXPECT_THROW(run_convergence({10}, 1, bad, 0), InvalidParameter);
}

TEST(Statistics, SignTest) {
  EXPECT_EQ(sign_test_pvalue(0, 0), 1.0);
  for (int n = 1; n <= 60; n += 7)
    for (int w = 0; w <= n; ++w) EXPECT_NEAR(sign_test_pvalue(w, n - w), binomial_tail(w, n), 1e-12);
  EXPECT_NEAR(sign_test_pvalue(9, 1), 11.0 / 1024.0, 1e-15);
  std::vector<ResultRow> rows;
  for (int rep = 0; rep < 5; ++rep) {
    rows.push_back({"A", 5, 0.0, "-", rep, 1.0, 0.0, "ok"});
    rows.push_back({"B", 5, 0.0, "-", rep, rep == 4 ? 1.0 : 2.0, 0.0, "ok"});
  }
  const auto cmp = compare_methods(rows, "A", "B", 5);
  EXPECT_EQ(cmp.wins, 4);
  EXPECT_EQ(cmp.ties, 1);
  EXPECT_NEAR(cmp.p_value, 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(cmp.mean_b, 1.8, 1e-15);
}
