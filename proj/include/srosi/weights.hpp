#pragma once

// Weight functions w^i(query) over the N training samples: k-nearest
// neighbours, kernel regression, CART and random forests, plus the parameter
// schedules that tie k_N / h_N and the radius eps_N to the sample size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "srosi/data.hpp"
#include "srosi/error.hpp"

namespace srosi {

using WeightVector = Eigen::VectorXd;

namespace detail {

inline void check_query(const Dataset& data, const Eigen::VectorXd& query) {
  if (query.size() != data.dim_gamma())
    throw InvalidParameter("query dimension does not match d_gamma");
}

inline Eigen::VectorXd squared_distances(const Dataset& data, const Eigen::VectorXd& query) {
  Eigen::VectorXd d(data.size());
  for (int i = 0; i < data.size(); ++i) d[i] = (data.gammas.row(i).transpose() - query).squaredNorm();
  return d;
}

// Unbiased draw from {0, ..., n-1}; independent of the standard library's
// distribution implementations so fitted forests agree across toolchains.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace detail

// ---------------------------------------------------------------- kNN

/// Uniform weight 1/k on the k samples closest to `query` in the l2 norm.
/// Distance ties are broken in favour of the smaller index.
inline WeightVector knn_weights(const Dataset& data, const Eigen::VectorXd& query, int k) {
  detail::check_query(data, query);
  const int n = data.size();
  if (k < 1 || k > n) throw InvalidParameter("knn: k must lie in [1, N]");
  const Eigen::VectorXd d = detail::squared_distances(data, query);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  WeightVector w = WeightVector::Zero(n);
  for (int r = 0; r < k; ++r) w[idx[r]] = 1.0 / k;
  return w;
}

// ---------------------------------------------------------------- kernel

enum class KernelKind { Gaussian, Triangular, Epanechnikov };

inline double kernel_value(KernelKind kind, double u) {
  switch (kind) {
    case KernelKind::Gaussian: return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KernelKind::Triangular: return u <= 1.0 ? 1.0 - u : 0.0;
    case KernelKind::Epanechnikov: return u <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Triangular: return "triangular";
    case KernelKind::Epanechnikov: return "epanechnikov";
  }
  return "?";
}

inline KernelKind parse_kernel(const std::string& s) {
  if (s == "gaussian") return KernelKind::Gaussian;
  if (s == "triangular") return KernelKind::Triangular;
  if (s == "epanechnikov") return KernelKind::Epanechnikov;
  throw InvalidParameter("unknown kernel '" + s + "'");
}

/// Nadaraya-Watson weights K(|gamma^i - query| / h) / sum_j K(...).
/// Throws NoMass when every kernel value vanishes.
inline WeightVector kernel_weights(const Dataset& data, const Eigen::VectorXd& query, double h,
                                   KernelKind kind) {
  detail::check_query(data, query);
  if (!(h > 0.0)) throw InvalidParameter("kernel: bandwidth must be positive");
  const Eigen::VectorXd d = detail::squared_distances(data, query);
  WeightVector w(data.size());
  for (int i = 0; i < data.size(); ++i) w[i] = kernel_value(kind, std::sqrt(d[i]) / h);
  const double total = w.sum();
  if (!(total > 0.0)) {
    // The Gaussian can underflow far from every sample: fall back to the
    // limit of the ratio, which concentrates on the closest samples.
    if (kind == KernelKind::Gaussian) {
      const double dmin = d.minCoeff();
      for (int i = 0; i < data.size(); ++i) w[i] = std::exp(-0.5 * (d[i] - dmin) / (h * h));
      return w / w.sum();
    }
    throw NoMass("kernel: no sample within the bandwidth of the query");
  }
  return w / total;
}

// ---------------------------------------------------------------- CART

/// Binary regression tree over sample indices.  Internal nodes send
/// gamma[feature] <= threshold to `left`.  Leaves list the training indices
/// they hold (with multiplicity when fitted on a bootstrap sample).
struct TreeModel {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<int> samples;  // leaves only

    [[nodiscard]] bool is_leaf() const { return feature < 0; }
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  [[nodiscard]] int leaf_of(const Eigen::VectorXd& query) const {
    int k = 0;
    while (!nodes[k].is_leaf()) {
      const Node& nd = nodes[k];
      k = query[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return k;
  }
  [[nodiscard]] int num_leaves() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
  }
};

struct CartOptions {
  int min_leaf = 5;
  int max_depth = 16;
};

namespace detail {

struct CartFitter {
  const Dataset& data;
  CartOptions opts;
  int mtry = 0;                 // 0: every feature at every split
  std::mt19937_64* rng = nullptr;
  TreeModel tree;

  // Sum of squared deviations from the mean over all response coordinates.
  [[nodiscard]] double impurity(const std::vector<int>& idx) const {
    const int dx = data.dim_xi();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dx);
    double sq = 0.0;
    for (int i : idx) {
      s += data.xis.row(i).transpose();
      sq += data.xis.row(i).squaredNorm();
    }
    return sq - s.squaredNorm() / static_cast<double>(idx.size());
  }

  std::vector<int> candidate_features() {
    const int dg = data.dim_gamma();
    std::vector<int> feats(dg);
    std::iota(feats.begin(), feats.end(), 0);
    if (mtry <= 0 || mtry >= dg || rng == nullptr) return feats;
    for (int k = 0; k < mtry; ++k) {
      const int j = k + static_cast<int>(uniform_index(*rng, static_cast<std::uint64_t>(dg - k)));
      std::swap(feats[k], feats[j]);
    }
    feats.resize(mtry);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  int grow(std::vector<int> idx, int depth) {
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int n = static_cast<int>(idx.size());
    if (depth >= opts.max_depth || n < 2 * opts.min_leaf) {
      tree.nodes[node].samples = std::move(idx);
      return node;
    }
    const double parent = impurity(idx);
    const int dx = data.dim_xi();
    double best = parent;
    int best_feat = -1;
    double best_thr = 0.0;
    std::vector<int> order(idx);
    Eigen::VectorXd left_sum(dx);
    const Eigen::VectorXd total = [&] {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(dx);
      for (int i : idx) s += data.xis.row(i).transpose();
      return s;
    }();
    double total_sq = 0.0;
    for (int i : idx) total_sq += data.xis.row(i).squaredNorm();
    for (int f : candidate_features()) {
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return data.gammas(a, f) < data.gammas(b, f); });
      left_sum.setZero();
      double left_sq = 0.0;
      for (int cut = 1; cut < n; ++cut) {
        const int i = order[cut - 1];
        left_sum += data.xis.row(i).transpose();
        left_sq += data.xis.row(i).squaredNorm();
        if (cut < opts.min_leaf || n - cut < opts.min_leaf) continue;
        const double lo = data.gammas(order[cut - 1], f), hi = data.gammas(order[cut], f);
        if (!(lo < hi)) continue;
        const double sse = left_sq - left_sum.squaredNorm() / cut + (total_sq - left_sq) -
                           (total - left_sum).squaredNorm() / (n - cut);
        if (sse < best - 1e-12 * (1.0 + parent)) {
          best = sse;
          best_feat = f;
          best_thr = 0.5 * (lo + hi);
        }
      }
    }
    if (best_feat < 0) {
      tree.nodes[node].samples = std::move(idx);
      return node;
    }
    std::vector<int> left, right;
    for (int i : idx) (data.gammas(i, best_feat) <= best_thr ? left : right).push_back(i);
    tree.nodes[node].feature = best_feat;
    tree.nodes[node].threshold = best_thr;
    const int l = grow(std::move(left), depth + 1);
    tree.nodes[node].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree.nodes[node].right = r;
    return node;
  }
};

}  // namespace detail

/// Greedy CART regression tree of xi on gamma: exhaustive midpoint splits,
/// multi-output squared-error impurity.
inline TreeModel fit_cart(const Dataset& data, const CartOptions& opts = {}) {
  data.validate();
  if (opts.min_leaf < 1 || opts.max_depth < 0) throw InvalidParameter("cart: min_leaf >= 1, max_depth >= 0");
  std::vector<int> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  detail::CartFitter fitter{data, opts};
  fitter.grow(std::move(idx), 0);
  return std::move(fitter.tree);
}

/// 1/|leaf| on the samples sharing the query's leaf (multiplicity counted).
inline WeightVector cart_weights(const TreeModel& tree, int num_samples, const Eigen::VectorXd& query) {
  const auto& leaf = tree.nodes[tree.leaf_of(query)].samples;
  WeightVector w = WeightVector::Zero(num_samples);
  for (int i : leaf) w[i] += 1.0 / static_cast<double>(leaf.size());
  return w;
}

// ---------------------------------------------------------------- forest

struct ForestOptions {
  int trees = 100;
  CartOptions cart;
  int mtry = 0;           // 0: max(1, ceil(d_gamma / 3))
  bool bootstrap = true;  // false: every tree sees the full sample
};

struct ForestModel {
  int num_samples = 0;
  std::uint64_t seed = 0;
  std::vector<TreeModel> trees;
  std::vector<std::vector<int>> bootstrap;  // per tree, the drawn indices
};

inline int default_mtry(int dim_gamma) { return std::max(1, (dim_gamma + 2) / 3); }

/// Bagged CART trees with a fresh random feature subset at every split.
/// Reproducible from `seed`.
inline ForestModel fit_forest(const Dataset& data, const ForestOptions& opts, std::uint64_t seed) {
  data.validate();
  if (opts.trees < 1) throw InvalidParameter("forest: need at least one tree");
  const int dg = data.dim_gamma();
  const int mtry = opts.mtry > 0 ? opts.mtry : default_mtry(dg);
  if (mtry > dg) throw InvalidParameter("forest: mtry must not exceed d_gamma");
  std::mt19937_64 rng(seed);
  ForestModel forest;
  forest.num_samples = data.size();
  forest.seed = seed;
  const int n = data.size();
  for (int b = 0; b < opts.trees; ++b) {
    std::vector<int> idx(n);
    if (opts.bootstrap) {
      for (int& i : idx) i = static_cast<int>(detail::uniform_index(rng, static_cast<std::uint64_t>(n)));
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    detail::CartFitter fitter{data, opts.cart, mtry, &rng};
    fitter.grow(idx, 0);
    forest.trees.push_back(std::move(fitter.tree));
    forest.bootstrap.push_back(std::move(idx));
  }
  return forest;
}

/// Average over trees of each tree's leaf weights.
inline WeightVector rf_weights(const ForestModel& forest, const Eigen::VectorXd& query) {
  WeightVector w = WeightVector::Zero(forest.num_samples);
  for (const TreeModel& t : forest.trees) w += cart_weights(t, forest.num_samples, query);
  return w / static_cast<double>(forest.trees.size());
}

// Versioned JSON:
//   {"format": "srosi-forest", "version": 1, "num_samples": N, "seed": s,
//    "trees": [{"bootstrap": [...], "nodes": [{"feature": f, "threshold": t,
//               "left": l, "right": r} | {"samples": [...]}, ...]}, ...]}
inline nlohmann::json forest_to_json(const ForestModel& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t b = 0; b < forest.trees.size(); ++b) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : forest.trees[b].nodes) {
      if (nd.is_leaf()) {
        nodes.push_back({{"samples", nd.samples}});
      } else {
        nodes.push_back({{"feature", nd.feature}, {"threshold", nd.threshold}, {"left", nd.left}, {"right", nd.right}});
      }
    }
    trees.push_back({{"bootstrap", forest.bootstrap[b]}, {"nodes", std::move(nodes)}});
  }
  return {{"format", "srosi-forest"}, {"version", 1}, {"num_samples", forest.num_samples},
          {"seed", forest.seed}, {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "srosi-forest" || j.value("version", 0) != 1)
    throw InvalidParameter("forest json: unsupported format or version");
  ForestModel forest;
  forest.num_samples = j.at("num_samples").get<int>();
  forest.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jt : j.at("trees")) {
    TreeModel t;
    for (const auto& jn : jt.at("nodes")) {
      TreeModel::Node nd;
      if (jn.contains("samples")) {
        nd.samples = jn.at("samples").get<std::vector<int>>();
      } else {
        nd.feature = jn.at("feature").get<int>();
        nd.threshold = jn.at("threshold").get<double>();
        nd.left = jn.at("left").get<int>();
        nd.right = jn.at("right").get<int>();
      }
      t.nodes.push_back(std::move(nd));
    }
    forest.trees.push_back(std::move(t));
    forest.bootstrap.push_back(jt.at("bootstrap").get<std::vector<int>>());
  }
  if (forest.trees.empty()) throw InvalidParameter("forest json: no trees");
  return forest;
}

// ---------------------------------------------------------------- schedules

enum class ScheduleMethod { Knn, Kernel };

/// k_N = min(ceil(k3 N^delta), N-1) or h_N = k4 N^-delta, and eps_N = k1 N^-p.
/// `scale` holds k3 (kNN) or k4 (kernel).
struct ScheduleParams {
  ScheduleMethod method = ScheduleMethod::Knn;
  double k1 = 1.0;
  double p = 0.1;
  double delta = 0.75;
  double scale = 1.0;

  /// Throws InvalidParameter naming the first violated inequality.
  void validate(int dim_gamma, int dim_xi) const {
    const double dg = dim_gamma, dx = dim_xi;
    if (!(k1 > 0.0)) throw InvalidParameter("schedule: k1 > 0 violated");
    if (!(p > 0.0)) throw InvalidParameter("schedule: p > 0 violated");
    if (!(scale > 0.0)) throw InvalidParameter("schedule: k3/k4 > 0 violated");
    if (method == ScheduleMethod::Knn) {
      if (!(delta > 0.5 && delta < 1.0)) throw InvalidParameter("schedule: knn requires 1/2 < delta < 1");
      if (!(p < (1.0 - delta) / dg)) throw InvalidParameter("schedule: knn requires p < (1 - delta) / d_gamma");
      if (!(p < (2.0 * delta - 1.0) / (dx + 2.0)))
        throw InvalidParameter("schedule: knn requires p < (2 delta - 1) / (d_xi + 2)");
    } else {
      if (!(delta > 0.0 && delta < 1.0 / (2.0 * dg)))
        throw InvalidParameter("schedule: kernel requires 0 < delta < 1 / (2 d_gamma)");
      if (!(p < delta)) throw InvalidParameter("schedule: kernel requires p < delta");
      if (!(p < (1.0 - delta * dg) / (2.0 + dx)))
        throw InvalidParameter("schedule: kernel requires p < (1 - delta d_gamma) / (2 + d_xi)");
    }
  }
};

struct Schedule {
  int k = 0;        // kNN only
  double h = 0.0;   // kernel only
  double eps = 0.0;
};

inline Schedule default_schedules(int n, int dim_gamma, int dim_xi, const ScheduleParams& params) {
  if (n < 1) throw InvalidParameter("schedule: N >= 1");
  params.validate(dim_gamma, dim_xi);
  Schedule s;
  const double nn = n;
  s.eps = params.k1 * std::pow(nn, -params.p);
  if (params.method == ScheduleMethod::Knn) {
    const double k = std::ceil(params.scale * std::pow(nn, params.delta));
    s.k = static_cast<int>(std::clamp(k, 1.0, std::max(1.0, nn - 1.0)));
  } else {
    s.h = params.scale * std::pow(nn, -params.delta);
  }
  return s;
}

inline nlohmann::json to_json(const ScheduleParams& p) {
  nlohmann::json j = {{"method", p.method == ScheduleMethod::Knn ? "knn" : "kernel"},
                      {"k1", p.k1}, {"p", p.p}, {"delta", p.delta}};
  j[p.method == ScheduleMethod::Knn ? "k3" : "k4"] = p.scale;
  return j;
}

inline ScheduleParams schedule_from_json(const nlohmann::json& j) {
  ScheduleParams p;
  const std::string m = j.at("method").get<std::string>();
  if (m == "knn") p.method = ScheduleMethod::Knn;
  else if (m == "kernel") p.method = ScheduleMethod::Kernel;
  else throw InvalidParameter("schedule: unknown method '" + m + "'");
  p.k1 = j.at("k1").get<double>();
  p.p = j.at("p").get<double>();
  p.delta = j.at("delta").get<double>();
  p.scale = j.at(p.method == ScheduleMethod::Knn ? "k3" : "k4").get<double>();
  return p;
}

}  // namespace srosi
