#pragma once

// Experiment drivers: method comparisons with validation tuning, and the
// concentration / convergence studies on the newsvendor generator.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "srosi/data.hpp"
#include "srosi/error.hpp"
#include "srosi/generators.hpp"
#include "srosi/singleperiod.hpp"
#include "srosi/srolp.hpp"
#include "srosi/transport.hpp"
#include "srosi/weights.hpp"

namespace srosi::harness {

// ---------------------------------------------------------------- generators

enum class Generator { Newsvendor, Inventory, Portfolio, Shipment };

inline const char* to_string(Generator g) {
  switch (g) {
    case Generator::Newsvendor: return "newsvendor";
    case Generator::Inventory: return "inventory";
    case Generator::Portfolio: return "portfolio";
    case Generator::Shipment: return "shipment";
  }
  return "?";
}

inline Generator parse_generator(const std::string& s) {
  if (s == "newsvendor") return Generator::Newsvendor;
  if (s == "inventory") return Generator::Inventory;
  if (s == "portfolio") return Generator::Portfolio;
  if (s == "shipment") return Generator::Shipment;
  throw InvalidParameter("unknown generator '" + s + "'");
}

/// splitmix64 finalizer over the combined words; used to derive
/// independent seeds for replications.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t z = a;
  for (std::uint64_t v : {b, c}) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

inline Dataset generate(Generator g, int n, std::uint64_t seed) {
  switch (g) {
    case Generator::Newsvendor: return gen::newsvendor_data(n, seed);
    case Generator::Inventory: return gen::inventory_data(n, seed);
    case Generator::Portfolio: return gen::portfolio_data(n, seed);
    case Generator::Shipment: return gen::shipment_data(n, seed);
  }
  throw InvalidParameter("unknown generator");
}

inline Eigen::VectorXd draw_gamma(Generator g, std::mt19937_64& rng) {
  if (g == Generator::Newsvendor) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Eigen::VectorXd::Constant(1, u(rng));
  }
  std::normal_distribution<double> z;
  Eigen::VectorXd out(3);
  for (auto& v : out) v = z(rng);
  return out;
}

inline Eigen::VectorXd draw_xi(Generator g, const Eigen::VectorXd& gamma, std::mt19937_64& rng) {
  switch (g) {
    case Generator::Newsvendor: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return Eigen::VectorXd::Constant(1, gamma[0] + u(rng));
    }
    case Generator::Inventory: return gen::inventory_path(gamma, rng);
    case Generator::Portfolio: return gen::portfolio_returns(gamma, rng);
    case Generator::Shipment: return gen::shipment_demand(gamma, rng);
  }
  throw InvalidParameter("unknown generator");
}

inline DynamicProblem problem_for(Generator g) {
  switch (g) {
    case Generator::Newsvendor: return gen::newsvendor_problem();
    case Generator::Inventory: return gen::inventory_problem();
    case Generator::Shipment: return gen::shipment_problem();
    case Generator::Portfolio: break;
  }
  throw InvalidParameter("portfolio has no dynamic problem encoding");
}

/// Test points: `queries` side-information draws, each with `draws`
/// conditional sample paths.
struct TestSet {
  std::vector<Eigen::VectorXd> gammas;
  std::vector<std::vector<Eigen::VectorXd>> paths;
};

inline TestSet make_test_set(Generator g, int queries, int draws, std::uint64_t seed) {
  if (queries < 1 || draws < 1) throw InvalidParameter("test set: queries and draws must be positive");
  std::mt19937_64 rng(seed);
  TestSet t;
  for (int q = 0; q < queries; ++q) {
    t.gammas.push_back(draw_gamma(g, rng));
    std::vector<Eigen::VectorXd> ps;
    for (int m = 0; m < draws; ++m) ps.push_back(draw_xi(g, t.gammas.back(), rng));
    t.paths.push_back(std::move(ps));
  }
  return t;
}

// ---------------------------------------------------------------- methods

enum class Method { Saa, Sro, PtpKnn, PtpKernel, PtpCart, PtpRf, SrosiKnn, SrosiKernel, SrosiCart, SrosiRf };
enum class WeightKind { Uniform, Knn, Kernel, Cart, Forest };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Saa,     Method::Sro,       Method::PtpKnn,      Method::PtpKernel,
                                     Method::PtpCart, Method::PtpRf,     Method::SrosiKnn,    Method::SrosiKernel,
                                     Method::SrosiCart, Method::SrosiRf};
  return m;
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Saa: return "SAA";
    case Method::Sro: return "SRO";
    case Method::PtpKnn: return "PtP-knn";
    case Method::PtpKernel: return "PtP-kernel";
    case Method::PtpCart: return "PtP-cart";
    case Method::PtpRf: return "PtP-rf";
    case Method::SrosiKnn: return "SROSI-knn";
    case Method::SrosiKernel: return "SROSI-kernel";
    case Method::SrosiCart: return "SROSI-cart";
    case Method::SrosiRf: return "SROSI-rf";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (s == to_string(m)) return m;
  throw InvalidParameter("unknown method '" + s + "'");
}

/// Robust methods use eps > 0; the others solve at eps = 0.
inline bool is_robust(Method m) {
  return m == Method::Sro || m == Method::SrosiKnn || m == Method::SrosiKernel || m == Method::SrosiCart ||
         m == Method::SrosiRf;
}

inline WeightKind weight_kind(Method m) {
  switch (m) {
    case Method::Saa:
    case Method::Sro: return WeightKind::Uniform;
    case Method::PtpKnn:
    case Method::SrosiKnn: return WeightKind::Knn;
    case Method::PtpKernel:
    case Method::SrosiKernel: return WeightKind::Kernel;
    case Method::PtpCart:
    case Method::SrosiCart: return WeightKind::Cart;
    case Method::PtpRf:
    case Method::SrosiRf: return WeightKind::Forest;
  }
  return WeightKind::Uniform;
}

// ---------------------------------------------------------------- config

struct ExperimentConfig {
  Generator generator = Generator::Newsvendor;
  std::vector<Method> methods;
  std::vector<double> eps_grid;        // robust methods only; SAA and PtP-* use 0
  std::vector<int> knn_grid;           // k, clamped to the sample size
  std::vector<double> bandwidth_grid;
  std::vector<int> leaf_grid;          // CART / forest minimum leaf size
  KernelKind kernel = KernelKind::Gaussian;
  int trees = 50;
  std::vector<int> n_grid;
  int reps = 1;
  int test_queries = 20;
  int test_draws = 50;
  double validation_fraction = 0.25;
  Norm norm = Norm::LInf;
  double alpha = 0.05;   // portfolio
  double lambda = 1.0;   // portfolio
  std::uint64_t seed = 1;

  void validate() const {
    if (methods.empty()) throw InvalidParameter("experiment: method grid is empty");
    if (n_grid.empty()) throw InvalidParameter("experiment: N grid is empty");
    if (reps < 1) throw InvalidParameter("experiment: need at least one replication");
    if (test_queries < 1 || test_draws < 1) throw InvalidParameter("experiment: test set must be nonempty");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw InvalidParameter("experiment: validation fraction must lie in [0, 1)");
    for (int n : n_grid)
      if (n < 1) throw InvalidParameter("experiment: N must be positive");
    for (double e : eps_grid)
      if (!(e >= 0.0) || !std::isfinite(e)) throw InvalidParameter("experiment: eps grid values must be nonnegative");
    for (int k : knn_grid)
      if (k < 1) throw InvalidParameter("experiment: k must be positive");
    for (double h : bandwidth_grid)
      if (!(h > 0.0)) throw InvalidParameter("experiment: bandwidths must be positive");
    for (int l : leaf_grid)
      if (l < 1) throw InvalidParameter("experiment: leaf sizes must be positive");
    if (trees < 1) throw InvalidParameter("experiment: need at least one tree");
    for (Method m : methods) {
      if (is_robust(m) && eps_grid.empty()) throw InvalidParameter("experiment: eps grid is empty");
      const WeightKind w = weight_kind(m);
      if (w == WeightKind::Knn && knn_grid.empty()) throw InvalidParameter("experiment: k grid is empty");
      if (w == WeightKind::Kernel && bandwidth_grid.empty())
        throw InvalidParameter("experiment: bandwidth grid is empty");
      if ((w == WeightKind::Cart || w == WeightKind::Forest) && leaf_grid.empty())
        throw InvalidParameter("experiment: leaf grid is empty");
    }
    if (norm == Norm::L2) throw UnsupportedNorm("experiment: l2 balls need second-order cones; use l1 or linf");
    if (generator == Generator::Portfolio) PortfolioProblem{gen::kAssets, alpha, lambda}.validate();
  }
};

//   {"format": "srosi-experiment", "version": 1, "generator": "shipment",
//    "methods": ["SAA", ...], "eps": [..], "k": [..], "bandwidth": [..],
//    "leaf": [..], "kernel": "gaussian", "trees": 50, "N": [..], "reps": 10,
//    "test_queries": 20, "test_draws": 50, "validation_fraction": 0.25,
//    "norm": "linf", "alpha": 0.05, "lambda": 1.0, "seed": 1}
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return {{"format", "srosi-experiment"},
          {"version", 1},
          {"generator", to_string(c.generator)},
          {"methods", methods},
          {"eps", c.eps_grid},
          {"k", c.knn_grid},
          {"bandwidth", c.bandwidth_grid},
          {"leaf", c.leaf_grid},
          {"kernel", srosi::to_string(c.kernel)},
          {"trees", c.trees},
          {"N", c.n_grid},
          {"reps", c.reps},
          {"test_queries", c.test_queries},
          {"test_draws", c.test_draws},
          {"validation_fraction", c.validation_fraction},
          {"norm", srosi::to_string(c.norm)},
          {"alpha", c.alpha},
          {"lambda", c.lambda},
          {"seed", c.seed}};
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "srosi-experiment" || j.value("version", 0) != 1)
      throw InvalidParameter("experiment json: unsupported format or version");
    ExperimentConfig c;
    c.generator = parse_generator(j.at("generator").get<std::string>());
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    c.eps_grid = j.value("eps", std::vector<double>{});
    c.knn_grid = j.value("k", std::vector<int>{});
    c.bandwidth_grid = j.value("bandwidth", std::vector<double>{});
    c.leaf_grid = j.value("leaf", std::vector<int>{});
    c.kernel = parse_kernel(j.value("kernel", std::string("gaussian")));
    c.trees = j.value("trees", c.trees);
    c.n_grid = j.at("N").get<std::vector<int>>();
    c.reps = j.value("reps", c.reps);
    c.test_queries = j.value("test_queries", c.test_queries);
    c.test_draws = j.value("test_draws", c.test_draws);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.norm = parse_norm(j.value("norm", std::string("linf")));
    c.alpha = j.value("alpha", c.alpha);
    c.lambda = j.value("lambda", c.lambda);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("experiment json: ") + e.what());
  }
}

// ---------------------------------------------------------------- rows and CSV

struct ResultRow {
  std::string method;
  int n = 0;
  double eps = 0.0;
  std::string params;   // selected weight parameters, "-" when none
  int rep = 0;
  double oos_cost = std::numeric_limits<double>::quiet_NaN();
  double solve_s = 0.0;
  std::string status = "ok";

  [[nodiscard]] bool ok() const { return status == "ok"; }
  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultHeader = "method,N,eps,params,rep,oos_cost,solve_s,status";

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InvalidParameter("csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Keeps free text inside one CSV cell.
inline std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

template <class Row, class Parse>
std::vector<Row> read_rows(std::istream& is, const std::string& header, std::size_t cells, Parse parse) {
  std::string line;
  if (!std::getline(is, line) || line != header) throw InvalidParameter("csv: expected header '" + header + "'");
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != cells) throw InvalidParameter("csv: wrong cell count in '" + line + "'");
    rows.push_back(parse(c));
  }
  return rows;
}

}  // namespace detail

inline void write_results(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << kResultHeader << '\n';
  for (const auto& r : rows)
    os << detail::clean(r.method) << ',' << r.n << ',' << detail::fmt(r.eps) << ',' << detail::clean(r.params) << ','
       << r.rep << ',' << detail::fmt(r.oos_cost) << ',' << detail::fmt(r.solve_s) << ',' << detail::clean(r.status)
       << '\n';
}

inline std::vector<ResultRow> read_results(std::istream& is) {
  return detail::read_rows<ResultRow>(is, kResultHeader, 8, [](const std::vector<std::string>& c) {
    ResultRow r;
    r.method = c[0];
    r.n = std::stoi(c[1]);
    r.eps = detail::parse_double(c[2]);
    r.params = c[3];
    r.rep = std::stoi(c[4]);
    r.oos_cost = detail::parse_double(c[5]);
    r.solve_s = detail::parse_double(c[6]);
    r.status = c[7];
    return r;
  });
}

// ---------------------------------------------------------------- tasks

/// A decision for one query: an affine primary policy for dynamic problems,
/// or a portfolio with its cVaR threshold.
struct Decision {
  PrimaryPolicy policy;
  Eigen::VectorXd x;
  double beta = 0.0;
};

/// Solves the weighted problem for a generator and prices decisions on
/// realized paths with exact recourse.
class Task {
 public:
  explicit Task(const ExperimentConfig& c) : kind_(c.generator), norm_(c.norm) {
    if (kind_ == Generator::Portfolio) port_ = PortfolioProblem{gen::kAssets, c.alpha, c.lambda};
    else prob_ = problem_for(kind_);
  }

  [[nodiscard]] Decision solve(const Dataset& train, const WeightVector& w, double eps) const {
    Decision d;
    if (kind_ == Generator::Portfolio) {
      const auto s = solve_cvar_portfolio(port_, train, w, eps, norm_);
      d.x = s.x;
      d.beta = s.beta;
    } else {
      d.policy = solve_sro(prob_, train, w, UncertaintySpec{eps, norm_}).policy.primary;
    }
    return d;
  }

  [[nodiscard]] double cost(const Decision& d, const Eigen::VectorXd& xi) const {
    if (kind_ == Generator::Portfolio) {
      const double ret = d.x.dot(xi);
      return d.beta + std::max(0.0, -ret - d.beta) / port_.alpha - port_.lambda * ret;
    }
    return evaluate_policy(prob_, d.policy, xi);
  }

 private:
  Generator kind_;
  Norm norm_;
  DynamicProblem prob_;
  PortfolioProblem port_;
};

/// One tuning candidate: a radius plus the weight-function parameter.
struct Candidate {
  double eps = 0.0;
  int k = 0;
  double h = 0.0;
  int leaf = 0;

  [[nodiscard]] std::string label(WeightKind w) const {
    std::ostringstream os;
    os << std::setprecision(6);
    switch (w) {
      case WeightKind::Uniform: return "-";
      case WeightKind::Knn: os << "k=" << k; break;
      case WeightKind::Kernel: os << "h=" << h; break;
      case WeightKind::Cart:
      case WeightKind::Forest: os << "leaf=" << leaf; break;
    }
    return os.str();
  }
};

inline std::vector<Candidate> candidates(Method m, const ExperimentConfig& c) {
  const std::vector<double> eps = is_robust(m) ? c.eps_grid : std::vector<double>{0.0};
  std::vector<Candidate> out;
  for (double e : eps) {
    switch (weight_kind(m)) {
      case WeightKind::Uniform: out.push_back({e, 0, 0.0, 0}); break;
      case WeightKind::Knn:
        for (int k : c.knn_grid) out.push_back({e, k, 0.0, 0});
        break;
      case WeightKind::Kernel:
        for (double h : c.bandwidth_grid) out.push_back({e, 0, h, 0});
        break;
      case WeightKind::Cart:
      case WeightKind::Forest:
        for (int l : c.leaf_grid) out.push_back({e, 0, 0.0, l});
        break;
    }
  }
  return out;
}

/// Weight function fitted to a training set for one candidate.
class Weigher {
 public:
  Weigher(WeightKind kind, const Dataset& train, const Candidate& c, const ExperimentConfig& cfg, std::uint64_t seed)
      : kind_(kind), train_(train), c_(c), kernel_(cfg.kernel) {
    if (kind == WeightKind::Cart) {
      tree_ = fit_cart(train, CartOptions{c.leaf, 16});
    } else if (kind == WeightKind::Forest) {
      ForestOptions fo;
      fo.trees = cfg.trees;
      fo.cart.min_leaf = c.leaf;
      forest_ = fit_forest(train, fo, seed);
    }
  }

  /// True when the weights do not depend on the query.
  [[nodiscard]] bool constant() const { return kind_ == WeightKind::Uniform; }

  [[nodiscard]] WeightVector operator()(const Eigen::VectorXd& query) const {
    const int n = train_.size();
    switch (kind_) {
      case WeightKind::Uniform: return WeightVector::Constant(n, 1.0 / n);
      case WeightKind::Knn: return knn_weights(train_, query, std::min(c_.k, n));
      case WeightKind::Kernel: return kernel_weights(train_, query, c_.h, kernel_);
      case WeightKind::Cart: return cart_weights(tree_, n, query);
      case WeightKind::Forest: return rf_weights(forest_, query);
    }
    throw InvalidParameter("unknown weight kind");
  }

 private:
  WeightKind kind_;
  const Dataset& train_;
  Candidate c_;
  KernelKind kernel_;
  TreeModel tree_;
  ForestModel forest_;
};

/// Mean cost over (query, paths) groups; decisions are solved per query
/// (once in total for query-independent weights).
inline double mean_cost(const Task& task, const Weigher& weigher, const Dataset& train, double eps,
                        const std::vector<Eigen::VectorXd>& queries,
                        const std::vector<std::vector<Eigen::VectorXd>>& paths, double* solve_s = nullptr) {
  double total = 0.0, seconds = 0.0;
  long count = 0;
  std::optional<Decision> shared;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto t0 = std::chrono::steady_clock::now();
    Decision d;
    if (weigher.constant() && shared) {
      d = *shared;
    } else {
      d = task.solve(train, weigher(queries[q]), eps);
      if (weigher.constant()) shared = d;
    }
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& xi : paths[q]) {
      total += task.cost(d, xi);
      ++count;
    }
  }
  if (solve_s) *solve_s = seconds;
  return total / static_cast<double>(count);
}

/// Picks the candidate with the lowest validation cost (first on ties).
/// Without a validation split the first candidate is used.
inline Candidate tune(Method m, const ExperimentConfig& cfg, const Task& task, const Dataset& train,
                      std::uint64_t seed) {
  const auto cands = candidates(m, cfg);
  const int n = train.size();
  const int nval = static_cast<int>(std::lround(cfg.validation_fraction * n));
  if (cands.size() == 1 || nval < 1 || n - nval < 1) return cands.front();
  std::vector<int> fit_idx(n - nval), val_idx(nval);
  std::iota(fit_idx.begin(), fit_idx.end(), 0);
  std::iota(val_idx.begin(), val_idx.end(), n - nval);
  const Dataset fit = train.subset(fit_idx);
  std::vector<Eigen::VectorXd> queries;
  std::vector<std::vector<Eigen::VectorXd>> paths;
  for (int i : val_idx) {
    queries.push_back(train.gammas.row(i).transpose());
    paths.push_back({train.xis.row(i).transpose()});
  }
  double best = std::numeric_limits<double>::infinity();
  std::optional<Candidate> choice;
  for (const auto& c : cands) {
    try {
      const Weigher w(weight_kind(m), fit, c, cfg, seed);
      const double v = mean_cost(task, w, fit, c.eps, queries, paths);
      if (v < best) {
        best = v;
        choice = c;
      }
    } catch (const Error&) {
      // A candidate that cannot be solved on the split is not selectable.
    }
  }
  if (!choice) throw SolveFailure("tuning: no candidate could be evaluated on the validation split");
  return *choice;
}

/// Runs every (N, replication, method) cell.  Failures become rows with a
/// non-"ok" status.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  const Task task(cfg);
  std::vector<ResultRow> rows;
  for (int n : cfg.n_grid) {
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const Dataset train = generate(cfg.generator, n, mix_seed(cfg.seed, static_cast<std::uint64_t>(n), rep));
      const TestSet test = make_test_set(cfg.generator, cfg.test_queries, cfg.test_draws,
                                         mix_seed(cfg.seed, 0x7e57, rep));
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const Method m = cfg.methods[mi];
        const std::uint64_t fseed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n) * 1000003ULL + rep, mi);
        ResultRow row;
        row.method = to_string(m);
        row.n = n;
        row.rep = rep;
        try {
          const Candidate c = tune(m, cfg, task, train, fseed);
          row.eps = c.eps;
          row.params = c.label(weight_kind(m));
          const Weigher w(weight_kind(m), train, c, cfg, fseed);
          row.oos_cost = mean_cost(task, w, train, c.eps, test.gammas, test.paths, &row.solve_s);
          if (!std::isfinite(row.oos_cost)) row.status = "error: non-finite cost";
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
          if (row.params.empty()) row.params = "-";
        }
        if (progress)
          *progress << row.method << " N=" << n << " rep=" << rep << " cost=" << row.oos_cost << ' ' << row.status
                    << '\n';
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------- studies

struct ConcentrationRow {
  int n = 0;
  int rep = 0;
  double d1 = 0.0;
  double eps = 0.0;
  bool operator==(const ConcentrationRow&) const = default;
};

struct ConvergenceRow {
  int n = 0;
  int rep = 0;
  double v_hat = 0.0;
  double v_star = 0.0;
  bool operator==(const ConvergenceRow&) const = default;
};

inline constexpr double kStudyQuery = 0.5;
inline constexpr const char* kConcentrationHeader = "N,rep,d1,eps_N";
inline constexpr const char* kConvergenceHeader = "N,rep,v_hat,v_star";

namespace detail {
inline void check_study(const std::vector<int>& ngrid, int reps, const ScheduleParams& s) {
  if (ngrid.empty()) throw InvalidParameter("study: N grid is empty");
  for (int n : ngrid)
    if (n < 1) throw InvalidParameter("study: N must be positive");
  if (reps < 1) throw InvalidParameter("study: need at least one replication");
  s.validate(1, 1);
}

inline WeightVector scheduled_weights(const Dataset& data, const ScheduleParams& s, const Schedule& sch) {
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, kStudyQuery);
  if (s.method == ScheduleMethod::Knn) return knn_weights(data, q, sch.k);
  return kernel_weights(data, q, sch.h, KernelKind::Gaussian);
}
}  // namespace detail

/// Exact W1 distance between the scheduled empirical conditional at
/// gamma = 0.5 and the true conditional U[0.5, 1.5].
inline std::vector<ConcentrationRow> run_concentration(const std::vector<int>& ngrid, int reps,
                                                       const ScheduleParams& schedule, std::uint64_t seed) {
  detail::check_study(ngrid, reps, schedule);
  std::vector<ConcentrationRow> rows;
  for (int n : ngrid) {
    const Schedule sch = default_schedules(n, 1, 1, schedule);
    for (int rep = 0; rep < reps; ++rep) {
      const Dataset data = gen::newsvendor_data(n, mix_seed(seed, static_cast<std::uint64_t>(n), rep));
      const auto mu = empirical_conditional(data, detail::scheduled_weights(data, schedule, sch));
      rows.push_back({n, rep, wasserstein1_1d_vs_uniform(mu, kStudyQuery, kStudyQuery + 1.0), sch.eps});
    }
  }
  return rows;
}

/// Robust newsvendor value at gamma = 0.5 with scheduled weights and radius.
inline std::vector<ConvergenceRow> run_convergence(const std::vector<int>& ngrid, int reps,
                                                   const ScheduleParams& schedule, std::uint64_t seed) {
  detail::check_study(ngrid, reps, schedule);
  const DynamicProblem prob = gen::newsvendor_problem();
  std::vector<ConvergenceRow> rows;
  for (int n : ngrid) {
    const Schedule sch = default_schedules(n, 1, 1, schedule);
    for (int rep = 0; rep < reps; ++rep) {
      const Dataset data = gen::newsvendor_data(n, mix_seed(seed, static_cast<std::uint64_t>(n), rep));
      const auto w = detail::scheduled_weights(data, schedule, sch);
      const double v = solve_sro(prob, data, w, UncertaintySpec{sch.eps, Norm::LInf}).objective;
      rows.push_back({n, rep, v, gen::newsvendor_optimal_value(kStudyQuery)});
    }
  }
  return rows;
}

inline void write_concentration(const std::vector<ConcentrationRow>& rows, std::ostream& os) {
  os << kConcentrationHeader << '\n';
  for (const auto& r : rows) os << r.n << ',' << r.rep << ',' << detail::fmt(r.d1) << ',' << detail::fmt(r.eps) << '\n';
}

inline std::vector<ConcentrationRow> read_concentration(std::istream& is) {
  return detail::read_rows<ConcentrationRow>(is, kConcentrationHeader, 4, [](const std::vector<std::string>& c) {
    return ConcentrationRow{std::stoi(c[0]), std::stoi(c[1]), detail::parse_double(c[2]), detail::parse_double(c[3])};
  });
}

inline void write_convergence(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
  os << kConvergenceHeader << '\n';
  for (const auto& r : rows)
    os << r.n << ',' << r.rep << ',' << detail::fmt(r.v_hat) << ',' << detail::fmt(r.v_star) << '\n';
}

inline std::vector<ConvergenceRow> read_convergence(std::istream& is) {
  return detail::read_rows<ConvergenceRow>(is, kConvergenceHeader, 4, [](const std::vector<std::string>& c) {
    return ConvergenceRow{std::stoi(c[0]), std::stoi(c[1]), detail::parse_double(c[2]), detail::parse_double(c[3])};
  });
}

// ---------------------------------------------------------------- statistics

/// P(X >= wins) for X ~ Binomial(wins + losses, 1/2): the one-sided sign
/// test p-value with ties already removed.
inline double sign_test_pvalue(int wins, int losses) {
  if (wins < 0 || losses < 0) throw InvalidParameter("sign test: counts must be nonnegative");
  const int n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (int k = wins; k <= n; ++k)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return std::min(1.0, p);
}

/// Paired comparison of two methods' per-replication costs (lower wins).
struct PairedComparison {
  int wins = 0, losses = 0, ties = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double p_value = 1.0;
};

inline PairedComparison compare_methods(const std::vector<ResultRow>& rows, const std::string& a,
                                        const std::string& b, int n) {
  std::vector<double> ca, cb;
  auto find = [&](const std::string& m, int rep) -> const ResultRow* {
    for (const auto& r : rows)
      if (r.method == m && r.n == n && r.rep == rep && r.ok()) return &r;
    return nullptr;
  };
  PairedComparison out;
  int count = 0;
  for (const auto& r : rows) {
    if (r.method != a || r.n != n || !r.ok()) continue;
    const ResultRow* other = find(b, r.rep);
    if (!other) continue;
    ++count;
    out.mean_a += r.oos_cost;
    out.mean_b += other->oos_cost;
    if (r.oos_cost < other->oos_cost) ++out.wins;
    else if (r.oos_cost > other->oos_cost) ++out.losses;
    else ++out.ties;
  }
  if (count > 0) {
    out.mean_a /= count;
    out.mean_b /= count;
  }
  out.p_value = sign_test_pvalue(out.wins, out.losses);
  return out;
}

}  // namespace srosi::harness
