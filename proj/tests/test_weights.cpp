#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "srosi/weights.hpp"

using namespace srosi;

namespace {

Dataset make_1d(std::vector<double> g, std::vector<double> x) {
  Dataset d;
  d.gammas = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  d.xis = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  d.stage_dims = {1};
  return d;
}

Eigen::VectorXd q1(double v) { return Eigen::VectorXd::Constant(1, v); }

Dataset random_dataset(std::mt19937_64& rng, int n, int dg, int dx) {
  std::normal_distribution<double> z;
  Dataset d;
  d.gammas.resize(n, dg);
  d.xis.resize(n, dx);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dg; ++j) d.gammas(i, j) = z(rng);
    for (int j = 0; j < dx; ++j) d.xis(i, j) = z(rng) + d.gammas(i, 0);
  }
  d.stage_dims.assign(dx, 1);
  return d;
}

}  // namespace

TEST(Knn, NearestTwo) {
  const auto d = make_1d({0, 1, 5}, {0, 0, 0});
  const auto w = knn_weights(d, q1(0.9), 2);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  EXPECT_DOUBLE_EQ(w[2], 0.0);
}

TEST(Knn, SingleSample) {
  const auto d = make_1d({3}, {1});
  EXPECT_DOUBLE_EQ(knn_weights(d, q1(-7), 1)[0], 1.0);
}

TEST(Knn, TiesGoToSmallestIndex) {
  const auto d = make_1d({0, 2, 2}, {0, 0, 0});
  const auto w = knn_weights(d, q1(2), 1);
  EXPECT_EQ(w, (Eigen::Vector3d(0, 1, 0)));
}

TEST(Knn, RejectsBadK) {
  const auto d = make_1d({0, 1}, {0, 0});
  EXPECT_THROW(knn_weights(d, q1(0), 0), InvalidParameter);
  EXPECT_THROW(knn_weights(d, q1(0), 3), InvalidParameter);
}

TEST(Knn, InvariantUnderGammaScaling) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    Dataset d = random_dataset(rng, 20, 3, 2);
    const Eigen::VectorXd q = d.gammas.row(4).transpose() * 0.5;
    const auto w = knn_weights(d, q, 7);
    d.gammas *= 3.5;
    EXPECT_EQ(w, knn_weights(d, q * 3.5, 7));
  }
}

TEST(Kernel, GaussianTwoPoints) {
  const auto d = make_1d({0, 1}, {0, 0});
  const auto w = kernel_weights(d, q1(0), 1.0, KernelKind::Gaussian);
  const double e = std::exp(-0.5);
  EXPECT_NEAR(w[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[1], e / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[0], 0.62246, 1e-5);
}

TEST(Kernel, SymmetricSamplesGetEqualWeight) {
  const auto d = make_1d({0, 0, 0}, {1, 2, 3});
  for (auto k : {KernelKind::Gaussian, KernelKind::Triangular, KernelKind::Epanechnikov}) {
    const auto w = kernel_weights(d, q1(0.3), 1.0, k);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], 1.0 / 3.0, 1e-15);
  }
}

TEST(Kernel, NoMassWhenSupportMissesEverySample) {
  const auto d = make_1d({10, 20}, {0, 0});
  EXPECT_THROW(kernel_weights(d, q1(0), 1.0, KernelKind::Triangular), NoMass);
  EXPECT_THROW(kernel_weights(d, q1(0), 1.0, KernelKind::Epanechnikov), NoMass);
}

TEST(Kernel, ValuesMatchDefinitions) {
  EXPECT_NEAR(kernel_value(KernelKind::Triangular, 0.25), 0.75, 1e-15);
  EXPECT_EQ(kernel_value(KernelKind::Triangular, 1.5), 0.0);
  EXPECT_NEAR(kernel_value(KernelKind::Epanechnikov, 0.5), 0.75 * 0.75, 1e-15);
  EXPECT_NEAR(kernel_value(KernelKind::Gaussian, 0.0), 0.3989422804014327, 1e-15);
}

TEST(Kernel, TinyBandwidthConcentratesOnClosestSample) {
  std::mt19937_64 rng(11);
  const Dataset d = random_dataset(rng, 15, 2, 1);
  const Eigen::VectorXd q = d.gammas.row(6).transpose();
  for (auto k : {KernelKind::Gaussian, KernelKind::Triangular, KernelKind::Epanechnikov}) {
    const auto w = kernel_weights(d, q, 1e-8, k);
    for (int i = 0; i < 15; ++i) EXPECT_DOUBLE_EQ(w[i], i == 6 ? 1.0 : 0.0);
  }
}

TEST(Kernel, GaussianUnderflowFallsBackToLimit) {
  const auto d = make_1d({100, 101, 103}, {0, 0, 0});
  const auto w = kernel_weights(d, q1(0), 0.01, KernelKind::Gaussian);
  EXPECT_NEAR(w.sum(), 1.0, 1e-12);
  EXPECT_NEAR(w[0], 1.0, 1e-12);
}

TEST(Cart, SeparableDataSplitsOnce) {
  const auto d = make_1d({-1, -2, 1, 2}, {0, 0, 10, 10});
  const auto t = fit_cart(d, {1, 16});
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_FALSE(t.nodes[0].is_leaf());
  EXPECT_GT(t.nodes[0].threshold, -1.0);
  EXPECT_LT(t.nodes[0].threshold, 1.0);
  const auto wl = cart_weights(t, 4, q1(-1.5));
  const auto wr = cart_weights(t, 4, q1(5));
  EXPECT_EQ(wl, (Eigen::Vector4d(0.5, 0.5, 0, 0)));
  EXPECT_EQ(wr, (Eigen::Vector4d(0, 0, 0.5, 0.5)));
}

TEST(Cart, ConstantResponseGivesSingleLeaf) {
  const auto d = make_1d({1, 2, 3, 4}, {7, 7, 7, 7});
  const auto t = fit_cart(d, {1, 16});
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(cart_weights(t, 4, q1(0)), Eigen::Vector4d::Constant(0.25));
}

TEST(Cart, TooFewSamplesForTwoLeaves) {
  const auto d = make_1d({1, 2, 3, 4}, {0, 1, 5, 9});
  EXPECT_EQ(fit_cart(d, {3, 16}).nodes.size(), 1u);
}

TEST(Cart, LeavesPartitionIndicesAndRespectMinLeaf) {
  std::mt19937_64 rng(21);
  const Dataset d = random_dataset(rng, 200, 3, 2);
  const auto t = fit_cart(d, {5, 16});
  std::vector<int> seen(200, 0);
  for (const auto& nd : t.nodes) {
    if (!nd.is_leaf()) continue;
    EXPECT_GE(nd.samples.size(), 5u);
    for (int i : nd.samples) ++seen[i];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  EXPECT_GT(t.num_leaves(), 1);
}

TEST(Cart, MaxDepthZeroIsRootOnly) {
  std::mt19937_64 rng(2);
  const Dataset d = random_dataset(rng, 50, 2, 1);
  EXPECT_EQ(fit_cart(d, {1, 0}).nodes.size(), 1u);
}

TEST(Forest, SingleTreeWithoutBootstrapEqualsCart) {
  std::mt19937_64 rng(8);
  const Dataset d = random_dataset(rng, 60, 2, 1);
  ForestOptions o;
  o.trees = 1;
  o.bootstrap = false;
  o.mtry = 2;
  const auto f = fit_forest(d, o, 99);
  const auto t = fit_cart(d, o.cart);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd q = d.gammas.row(k).transpose() + Eigen::VectorXd::Constant(2, 0.01);
    EXPECT_EQ(rf_weights(f, q), cart_weights(t, 60, q));
  }
}

TEST(Forest, DeterministicFromSeedAndJsonRoundTrip) {
  std::mt19937_64 rng(8);
  const Dataset d = random_dataset(rng, 80, 4, 2);
  ForestOptions o;
  o.trees = 10;
  const auto a = fit_forest(d, o, 1234), b = fit_forest(d, o, 1234);
  EXPECT_EQ(forest_to_json(a), forest_to_json(b));
  const auto c = forest_from_json(nlohmann::json::parse(forest_to_json(a).dump()));
  EXPECT_EQ(forest_to_json(c), forest_to_json(a));
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(4, 0.2);
  EXPECT_EQ(rf_weights(a, q), rf_weights(c, q));
  EXPECT_NE(forest_to_json(fit_forest(d, o, 1235)), forest_to_json(a));
}

TEST(Forest, SeparableDataEveryTreeSplitsGroups) {
  const auto d = make_1d({-1, -2, 1, 2}, {0, 0, 10, 10});
  ForestOptions o;
  o.trees = 3;
  o.cart.min_leaf = 1;
  const auto f = fit_forest(d, o, 7);
  for (std::size_t b = 0; b < f.trees.size(); ++b) {
    const auto& boot = f.bootstrap[b];
    const bool both = std::any_of(boot.begin(), boot.end(), [](int i) { return i < 2; }) &&
                      std::any_of(boot.begin(), boot.end(), [](int i) { return i >= 2; });
    if (!both) continue;
    const auto& root = f.trees[b].nodes[0];
    ASSERT_FALSE(root.is_leaf());
    EXPECT_GT(root.threshold, -1.0);
    EXPECT_LT(root.threshold, 1.0);
  }
}

TEST(Forest, AveragesTreeWeightsWithMultiplicity) {
  ForestModel f;
  f.num_samples = 2;
  TreeModel a, b;
  a.nodes.push_back({-1, 0, -1, -1, {0}});
  b.nodes.push_back({-1, 0, -1, -1, {1}});
  f.trees = {a, b};
  f.bootstrap = {{0, 0}, {1, 1}};
  EXPECT_EQ(rf_weights(f, q1(0)), Eigen::Vector2d(0.5, 0.5));
  TreeModel c;
  c.nodes.push_back({-1, 0, -1, -1, {0, 0, 1}});
  f.trees = {c};
  const auto w = rf_weights(f, q1(0));
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
}

TEST(Forest, DefaultMtry) {
  EXPECT_EQ(default_mtry(1), 1);
  EXPECT_EQ(default_mtry(3), 1);
  EXPECT_EQ(default_mtry(4), 2);
  EXPECT_EQ(default_mtry(10), 4);
}

TEST(Weights, AllMethodsGiveProbabilityVectors) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> nd(1, 40), dd(1, 4);
  for (int t = 0; t < 100; ++t) {
    const Dataset d = random_dataset(rng, nd(rng), dd(rng), dd(rng));
    Eigen::VectorXd q = d.gammas.row(0).transpose() * 0.7;
    ForestOptions o;
    o.trees = 5;
    o.cart.min_leaf = 2;
    const std::vector<WeightVector> ws = {
        knn_weights(d, q, std::max(1, d.size() / 3)),
        kernel_weights(d, q, 0.8, KernelKind::Gaussian),
        cart_weights(fit_cart(d, {2, 16}), d.size(), q),
        rf_weights(fit_forest(d, o, static_cast<std::uint64_t>(t)), q),
    };
    for (const auto& w : ws) {
      EXPECT_NEAR(w.sum(), 1.0, 1e-9);
      EXPECT_GE(w.minCoeff(), 0.0);
    }
  }
}

TEST(Schedule, KnnExamples) {
  ScheduleParams p;
  p.method = ScheduleMethod::Knn;
  p.scale = 1.0;
  p.delta = 0.75;
  p.k1 = 1.0;
  p.p = 0.1;
  const auto s = default_schedules(100, 1, 1, p);
  EXPECT_EQ(s.k, 32);
  EXPECT_NEAR(s.eps, std::pow(100.0, -0.1), 1e-15);
  EXPECT_NEAR(s.eps, 0.63096, 1e-5);
  EXPECT_EQ(default_schedules(1, 1, 1, p).k, 1);
  EXPECT_EQ(default_schedules(2, 1, 1, p).k, 1);
}

TEST(Schedule, RejectsPBeyondKnnBound) {
  ScheduleParams p;
  p.delta = 0.75;
  p.p = 0.3;
  try {
    p.validate(1, 1);
    FAIL();
  } catch (const InvalidParameter& e) {
    EXPECT_NE(std::string(e.what()).find("(1 - delta) / d_gamma"), std::string::npos);
  }
}

TEST(Schedule, KernelBandwidth) {
  ScheduleParams p;
  p.method = ScheduleMethod::Kernel;
  p.delta = 0.2;
  p.p = 0.1;
  p.scale = 2.0;
  p.k1 = 0.5;
  const auto s = default_schedules(1000, 2, 1, p);
  EXPECT_NEAR(s.h, 2.0 * std::pow(1000.0, -0.2), 1e-15);
  EXPECT_NEAR(s.eps, 0.5 * std::pow(1000.0, -0.1), 1e-15);
  p.delta = 0.3;  // >= 1/(2 d_gamma) = 0.25
  EXPECT_THROW(p.validate(2, 1), InvalidParameter);
}

TEST(Schedule, AsymptoticBehaviour) {
  ScheduleParams p;
  p.p = 0.08;
  double prev_eps = 1e300, prev_ratio = 1e300;
  int prev_k = 0;
  for (int e = 1; e <= 6; ++e) {
    const int n = static_cast<int>(std::pow(10.0, e));
    const auto s = default_schedules(n, 1, 1, p);
    EXPECT_LT(s.eps, prev_eps);
    EXPECT_GT(s.k, prev_k);
    const double ratio = static_cast<double>(s.k) / n;
    EXPECT_LT(ratio, prev_ratio);
    prev_eps = s.eps;
    prev_k = s.k;
    prev_ratio = ratio;
  }
}

TEST(Schedule, JsonRoundTrip) {
  ScheduleParams p;
  p.method = ScheduleMethod::Kernel;
  p.k1 = 0.3;
  p.p = 0.05;
  p.delta = 0.2;
  p.scale = 1.7;
  const auto q = schedule_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(q.method, p.method);
  EXPECT_EQ(q.k1, p.k1);
  EXPECT_EQ(q.p, p.p);
  EXPECT_EQ(q.delta, p.delta);
  EXPECT_EQ(q.scale, p.scale);
}

TEST(DatasetCsv, RoundTrip) {
  std::mt19937_64 rng(4);
  Dataset d = random_dataset(rng, 7, 2, 3);
  d.stage_dims = {1, 2};
  std::stringstream ss;
  write_csv(d, ss);
  EXPECT_EQ(ss.str().substr(0, 12), "g1,g2,x1,x2,");
  const Dataset back = read_csv(ss, {1, 2});
  EXPECT_EQ(back.gammas, d.gammas);
  EXPECT_EQ(back.xis, d.xis);
  EXPECT_EQ(back.stage_offset(1), 1);
}
