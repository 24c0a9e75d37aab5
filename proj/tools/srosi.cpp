// Command-line front end: data generation, single solves, experiments and
// the concentration / convergence studies.
//
// Exit codes: 0 success, 1 configuration error, 2 a solve or result row
// failed.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "srosi/harness.hpp"

using namespace srosi;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kFailed = 2;

// Writes to `path`, or to stdout when it is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidParameter("cannot write " + path);
  write(out);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidParameter(path + ": " + e.what());
  }
}

Eigen::VectorXd parse_query(const std::string& s, int dim) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidParameter("query: cannot parse '" + item + "'");
    }
  }
  if (static_cast<int>(v.size()) != dim)
    throw InvalidParameter("query: expected " + std::to_string(dim) + " coordinates");
  return Eigen::Map<Eigen::VectorXd>(v.data(), dim);
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

// Weight options shared by `solve` and `portfolio`.
struct WeightArgs {
  std::string method = "uniform";
  std::string query;
  int k = 5;
  double h = 0.5;
  std::string kernel = "gaussian";
  int leaf = 5;
  int trees = 100;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--weights", method, "uniform, knn, kernel, cart or rf")
        ->check(CLI::IsMember({"uniform", "knn", "kernel", "cart", "rf"}));
    app->add_option("--query", query, "side information, comma separated");
    app->add_option("--k", k, "kNN neighbours");
    app->add_option("--bandwidth", h, "kernel bandwidth");
    app->add_option("--kernel", kernel, "gaussian, triangular or epanechnikov");
    app->add_option("--leaf", leaf, "minimum leaf size for cart and rf");
    app->add_option("--trees", trees, "forest size");
    app->add_option("--seed", seed, "forest seed");
  }

  [[nodiscard]] WeightVector weights(const Dataset& data) const {
    const int n = data.size();
    if (method == "uniform") return WeightVector::Constant(n, 1.0 / n);
    if (query.empty()) throw InvalidParameter("--query is required for " + method + " weights");
    const Eigen::VectorXd q = parse_query(query, data.dim_gamma());
    if (method == "knn") return knn_weights(data, q, k);
    if (method == "kernel") return kernel_weights(data, q, h, parse_kernel(kernel));
    if (method == "cart") return cart_weights(fit_cart(data, CartOptions{leaf, 16}), n, q);
    ForestOptions fo;
    fo.trees = trees;
    fo.cart.min_leaf = leaf;
    return rf_weights(fit_forest(data, fo, seed), q);
  }
};

// Schedule options shared by the two studies.
struct StudyArgs {
  std::vector<int> ngrid{50, 200, 800, 3200};
  int reps = 20;
  std::uint64_t seed = 1;
  std::string schedule_file;
  std::string method = "knn";
  double k1 = 1.0, p = 0.08, delta = 0.75, scale = 1.0;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--N", ngrid, "sample sizes")->delimiter(',');
    app->add_option("--reps", reps, "replications per sample size");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--schedule", schedule_file, "schedule JSON (overrides the flags below)");
    app->add_option("--method", method, "knn or kernel")->check(CLI::IsMember({"knn", "kernel"}));
    app->add_option("--k1", k1, "radius constant");
    app->add_option("--p", p, "radius exponent");
    app->add_option("--delta", delta, "neighbour or bandwidth exponent");
    app->add_option("--scale", scale, "k3 (knn) or k4 (kernel)");
    app->add_option("-o,--out", out, "output CSV (default stdout)");
  }

  [[nodiscard]] ScheduleParams schedule() const {
    if (!schedule_file.empty()) return schedule_from_json(read_json_file(schedule_file));
    ScheduleParams s;
    s.method = method == "knn" ? ScheduleMethod::Knn : ScheduleMethod::Kernel;
    s.k1 = k1;
    s.p = p;
    s.delta = delta;
    s.scale = scale;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample robust optimization with side information"};
  app.require_subcommand(1);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "draw a synthetic dataset");
  std::string gen_name = "newsvendor", gen_out, gen_problem;
  int gen_n = 100;
  std::uint64_t gen_seed = 1;
  gen_cmd->add_option("--generator", gen_name, "newsvendor, inventory, portfolio or shipment");
  gen_cmd->add_option("--N", gen_n, "number of samples")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_seed, "seed");
  gen_cmd->add_option("-o,--out", gen_out, "dataset CSV (default stdout)");
  gen_cmd->add_option("--problem", gen_problem, "also write the matching problem JSON");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve one weighted sample robust problem");
  std::string solve_problem, solve_data, solve_out, solve_norm = "linf", solve_support = "nonneg";
  double solve_eps = 0.0;
  bool solve_shared = false;
  WeightArgs solve_w;
  solve_cmd->add_option("--problem", solve_problem, "problem JSON")->required();
  solve_cmd->add_option("--data", solve_data, "dataset CSV")->required();
  solve_cmd->add_option("--eps", solve_eps, "ball radius");
  solve_cmd->add_option("--norm", solve_norm, "l1 or linf");
  solve_cmd->add_option("--support", solve_support, "nonneg or free")->check(CLI::IsMember({"nonneg", "free"}));
  solve_cmd->add_flag("--shared", solve_shared, "one recourse rule for all samples");
  solve_cmd->add_option("-o,--out", solve_out, "result JSON (default stdout)");
  solve_w.add(solve_cmd);

  // portfolio
  auto* port_cmd = app.add_subcommand("portfolio", "robust mean-cVaR portfolio");
  std::string port_data, port_out, port_norm = "linf";
  double port_eps = 0.0, port_alpha = 0.05, port_lambda = 1.0;
  WeightArgs port_w;
  port_cmd->add_option("--data", port_data, "return CSV")->required();
  port_cmd->add_option("--eps", port_eps, "ball radius");
  port_cmd->add_option("--norm", port_norm, "l1 or linf");
  port_cmd->add_option("--alpha", port_alpha, "cVaR level");
  port_cmd->add_option("--lambda", port_lambda, "weight of the mean return");
  port_cmd->add_option("-o,--out", port_out, "result JSON (default stdout)");
  port_w.add(port_cmd);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a method comparison from a config file");
  std::string exp_config, exp_out;
  bool exp_progress = false;
  exp_cmd->add_option("config", exp_config, "experiment JSON")->required();
  exp_cmd->add_option("-o,--out", exp_out, "result CSV (default stdout)");
  exp_cmd->add_flag("--progress", exp_progress, "one line per row on stderr");

  // studies
  auto* conc_cmd = app.add_subcommand("concentration", "W1 distance of the empirical conditional");
  StudyArgs conc;
  conc.add(conc_cmd);
  auto* conv_cmd = app.add_subcommand("convergence", "robust newsvendor value against the oracle");
  StudyArgs conv;
  conv.ngrid = {50, 2000};
  conv.reps = 10;
  conv.p = 0.15;
  conv.k1 = 0.02;
  conv.add(conv_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen_cmd) {
      const harness::Generator g = harness::parse_generator(gen_name);
      const Dataset data = harness::generate(g, gen_n, gen_seed);
      emit(gen_out, [&](std::ostream& os) { write_csv(data, os); });
      if (!gen_problem.empty()) {
        if (g == harness::Generator::Portfolio)
          throw InvalidParameter("the portfolio generator has no dynamic problem; use `srosi portfolio`");
        emit(gen_problem, [&](std::ostream& os) { os << to_json(harness::problem_for(g)).dump(2) << '\n'; });
      }
      return kOk;
    }

    if (*solve_cmd) {
      const DynamicProblem prob = read_problem_file(solve_problem);
      const Dataset data = read_csv_file(solve_data, prob.dim_xi);
      const WeightVector w = solve_w.weights(data);
      const UncertaintySpec u{solve_eps, parse_norm(solve_norm),
                              solve_support == "free" ? Support::Free : Support::NonnegOrthant};
      try {
        const SroSolution s = solve_sro(prob, data, w, u, solve_shared);
        const json out = {{"status", "ok"},
                          {"objective", s.objective},
                          {"x0", vec(s.policy.primary.x0)},
                          {"X", mat(s.policy.primary.X)},
                          {"weights", vec(w)},
                          {"contributions", vec(s.contributions)},
                          {"lp", {{"variables", s.counts.variables()}, {"rows", s.counts.rows()},
                                  {"iterations", s.lp_result.iterations}}}};
        emit(solve_out, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
        return kOk;
      } catch (const SolveFailure& e) {
        emit(solve_out, [&](std::ostream& os) { os << json{{"status", e.what()}}.dump(2) << '\n'; });
        return kFailed;
      }
    }

    if (*port_cmd) {
      const Dataset data = read_csv_file(port_data);
      const PortfolioProblem p{data.dim_xi(), port_alpha, port_lambda};
      const WeightVector w = port_w.weights(data);
      try {
        const PortfolioSolution s = solve_cvar_portfolio(p, data, w, port_eps, parse_norm(port_norm));
        const json out = {{"status", "ok"}, {"value", s.value}, {"x", vec(s.x)}, {"beta", s.beta}};
        emit(port_out, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
        return kOk;
      } catch (const SolveFailure& e) {
        emit(port_out, [&](std::ostream& os) { os << json{{"status", e.what()}}.dump(2) << '\n'; });
        return kFailed;
      }
    }

    if (*exp_cmd) {
      const harness::ExperimentConfig cfg = harness::experiment_from_json(read_json_file(exp_config));
      const auto rows = harness::run_experiment(cfg, exp_progress ? &std::cerr : nullptr);
      emit(exp_out, [&](std::ostream& os) { harness::write_results(rows, os); });
      for (const auto& r : rows)
        if (!r.ok()) return kFailed;
      return kOk;
    }

    if (*conc_cmd) {
      const auto rows = harness::run_concentration(conc.ngrid, conc.reps, conc.schedule(), conc.seed);
      emit(conc.out, [&](std::ostream& os) { harness::write_concentration(rows, os); });
      return kOk;
    }

    if (*conv_cmd) {
      const auto rows = harness::run_convergence(conv.ngrid, conv.reps, conv.schedule(), conv.seed);
      emit(conv.out, [&](std::ostream& os) { harness::write_convergence(rows, os); });
      return kOk;
    }
  } catch (const InvalidParameter& e) {
    std::cerr << "srosi: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedNorm& e) {
    std::cerr << "srosi: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "srosi: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "srosi: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
