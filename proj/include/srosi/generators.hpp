#pragma once

// Synthetic data generators and the problem encodings that go with them.
//
// newsvendor: gamma ~ U[0,1], xi = gamma + U[0,1].  The conditional law moves
//   1-Lipschitz in gamma (W1 distance |gamma - gamma'|), xi is bounded.
// inventory: gamma ~ N(0, I_3), demand_t = max(0, 100 + 30 sin(2 pi t / 12)
//   + 40 tanh(gamma_1 + gamma_2 t / 12) + 10 z_t), z_t ~ N(0, 1), t = 1..12.
// portfolio: gamma ~ N(0, I_3), xi = 0.03 tanh(W gamma) + S^{1/2} z with
//   W_ij = 2 sin(1 + 2i + 3j) (0-based) and S = 0.0004 (0.8 I + 0.2 11^T).
// shipment: gamma ~ N(0, I_3), demand at location l uses the inventory
//   formula at period t = l + 1 with a location phase of 2 pi l / 12 shifted
//   by 3 months, and an independent z_l.
//
// All conditional laws are Gaussian-tailed (or bounded) and continuous in
// gamma; gamma has a density bounded below on compact sets.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "srosi/data.hpp"
#include "srosi/srolp.hpp"

namespace srosi::gen {

// ---------------------------------------------------------------- newsvendor

inline Dataset newsvendor_data(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("newsvendor: N >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  d.gammas.resize(n, 1);
  d.xis.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    d.gammas(i, 0) = u(rng);
    d.xis(i, 0) = d.gammas(i, 0) + u(rng);
  }
  d.stage_dims = {1};
  return d;
}

/// Order x before demand xi, pay |x - xi| (holding = backorder = 1).
inline DynamicProblem newsvendor_problem(double holding = 1.0, double backorder = 1.0) {
  DynamicProblem p;
  p.dim_x = {1};
  p.dim_xi = {1};
  p.dim_y = {1};
  p.rows = {2};
  p.f = Eigen::VectorXd::Zero(1);
  p.g = Eigen::VectorXd::Zero(1);
  p.h = Eigen::VectorXd::Ones(1);
  p.d = Eigen::VectorXd::Zero(2);
  p.A = Eigen::Vector2d(holding, -backorder);
  p.B = Eigen::Vector2d(-holding, backorder);
  p.C = Eigen::Vector2d(-1.0, -1.0);
  return p;
}

/// Optimal conditional cost for the unit-cost newsvendor: E|x - U[g, g+1]|
/// is minimized at the median g + 1/2, where it equals 1/4.
inline double newsvendor_optimal_value(double /*gamma*/) { return 0.25; }
inline double newsvendor_optimal_order(double gamma) { return gamma + 0.5; }

// ---------------------------------------------------------------- inventory

struct InventoryParams {
  int periods = 12;
  std::vector<double> order_cost{1.0, 0.5};
  std::vector<int> lead_time{0, 1};
  double holding = 0.25;
  double backorder = 11.0;
};

/// Per period t: orders x_t (one per supplier, nonnegative), demand xi_t and
/// cost y_t >= max(holding * I_t, -backorder * I_t), where I_t is the
/// inventory after period t's demand.
inline DynamicProblem inventory_problem(const InventoryParams& ip = {}) {
  const int T = ip.periods, S = static_cast<int>(ip.order_cost.size());
  if (T < 1 || S < 1 || ip.lead_time.size() != ip.order_cost.size())
    throw InvalidParameter("inventory: bad parameters");
  DynamicProblem p;
  p.dim_x.assign(T, S);
  p.dim_xi.assign(T, 1);
  p.dim_y.assign(T, 1);
  p.rows.assign(T, 2);
  p.f.resize(T * S);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < S; ++k) p.f[t * S + k] = ip.order_cost[k];
  p.g = Eigen::VectorXd::Zero(T);
  p.h = Eigen::VectorXd::Ones(T);
  p.d = Eigen::VectorXd::Zero(2 * T);
  p.A = Eigen::MatrixXd::Zero(2 * T, T * S);
  p.B = Eigen::MatrixXd::Zero(2 * T, T);
  p.C = Eigen::MatrixXd::Zero(2 * T, T);
  for (int t = 0; t < T; ++t) {
    const int r = 2 * t;
    for (int s = 0; s <= t; ++s) {
      for (int k = 0; k < S; ++k) {
        if (s + ip.lead_time[k] <= t) {
          p.A(r, s * S + k) = ip.holding;
          p.A(r + 1, s * S + k) = -ip.backorder;
        }
      }
      p.B(r, s) = -ip.holding;
      p.B(r + 1, s) = ip.backorder;
    }
    p.C(r, t) = -1.0;
    p.C(r + 1, t) = -1.0;
  }
  p.x_lower = Eigen::VectorXd::Zero(T * S);
  return p;
}

inline double inventory_demand(const Eigen::Vector3d& gamma, int t, double z, int periods = 12) {
  const double tt = t;
  return std::max(0.0, 100.0 + 30.0 * std::sin(2.0 * std::numbers::pi * tt / periods) +
                           40.0 * std::tanh(gamma[0] + gamma[1] * tt / periods) + 10.0 * z);
}

/// Demand path given side information; periods are numbered 1..T.
inline Eigen::VectorXd inventory_path(const Eigen::Vector3d& gamma, std::mt19937_64& rng, int periods = 12) {
  std::normal_distribution<double> z;
  Eigen::VectorXd xi(periods);
  for (int t = 0; t < periods; ++t) xi[t] = inventory_demand(gamma, t + 1, z(rng), periods);
  return xi;
}

inline Dataset inventory_data(int n, std::uint64_t seed, int periods = 12) {
  if (n < 1) throw InvalidParameter("inventory: N >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Dataset d;
  d.gammas.resize(n, 3);
  d.xis.resize(n, periods);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d g(z(rng), z(rng), z(rng));
    d.gammas.row(i) = g.transpose();
    d.xis.row(i) = inventory_path(g, rng, periods).transpose();
  }
  d.stage_dims.assign(periods, 1);
  return d;
}

// ---------------------------------------------------------------- portfolio

inline constexpr int kAssets = 10;

inline Eigen::MatrixXd portfolio_loadings() {
  Eigen::MatrixXd w(kAssets, 3);
  for (int i = 0; i < kAssets; ++i)
    for (int j = 0; j < 3; ++j) w(i, j) = 2.0 * std::sin(1.0 + 2.0 * i + 3.0 * j);
  return w;
}

inline Eigen::MatrixXd portfolio_covariance() {
  return 0.0004 * (0.8 * Eigen::MatrixXd::Identity(kAssets, kAssets) +
                   0.2 * Eigen::MatrixXd::Ones(kAssets, kAssets));
}

/// Symmetric square root of a I + b 11^T: sqrt(a) I + c 11^T with
/// c = (sqrt(a + n b) - sqrt(a)) / n.
inline Eigen::MatrixXd portfolio_covariance_sqrt() {
  const double a = 0.0004 * 0.8, b = 0.0004 * 0.2, n = kAssets;
  const double c = (std::sqrt(a + n * b) - std::sqrt(a)) / n;
  return std::sqrt(a) * Eigen::MatrixXd::Identity(kAssets, kAssets) +
         c * Eigen::MatrixXd::Ones(kAssets, kAssets);
}

inline Eigen::VectorXd portfolio_mean(const Eigen::VectorXd& gamma) {
  return 0.03 * (portfolio_loadings() * gamma).array().tanh().matrix();
}

inline Eigen::VectorXd portfolio_returns(const Eigen::VectorXd& gamma, std::mt19937_64& rng) {
  static const Eigen::MatrixXd root = portfolio_covariance_sqrt();
  std::normal_distribution<double> z;
  Eigen::VectorXd e(kAssets);
  for (auto& v : e) v = z(rng);
  return portfolio_mean(gamma) + root * e;
}

inline Dataset portfolio_data(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("portfolio: N >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Dataset d;
  d.gammas.resize(n, 3);
  d.xis.resize(n, kAssets);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d g(z(rng), z(rng), z(rng));
    d.gammas.row(i) = g.transpose();
    d.xis.row(i) = portfolio_returns(g, rng).transpose();
  }
  d.stage_dims = {kAssets};
  return d;
}

// ---------------------------------------------------------------- shipment

struct ShipmentParams {
  int facilities = 4;
  int locations = 12;
  double advance_cost = 5.0;   // per unit produced before demand is seen
  double rush_cost = 100.0;    // per unit produced after demand is seen
  double price = 90.0;         // revenue per unit of demand
  bool local_rules = true;     // shipment rules to l react to xi_l only
};

inline double shipment_cost(int f, int l) {
  const int raw = std::abs(3 * f - l) % 12;
  return 1.0 + 0.3 * std::min(raw, 12 - raw);
}

/// Two decision epochs: advance production x_f, then demands xi_l, then rush
/// production y_f and shipments s_fl.  Rows: demand covered at every
/// location, shipments out of f bounded by x_f + y_f, y and s nonnegative.
/// The revenue -price * sum xi enters through g.
inline DynamicProblem shipment_problem(const ShipmentParams& sp = {}) {
  const int F = sp.facilities, L = sp.locations;
  const int ny = F + F * L, m = L + F + ny;
  DynamicProblem p;
  p.dim_x = {F};
  p.dim_xi = {L};
  p.dim_y = {ny};
  p.rows = {m};
  p.f = Eigen::VectorXd::Constant(F, sp.advance_cost);
  p.g = Eigen::VectorXd::Constant(L, -sp.price);
  p.h.resize(ny);
  for (int f = 0; f < F; ++f) {
    p.h[f] = sp.rush_cost;
    for (int l = 0; l < L; ++l) p.h[F + f * L + l] = shipment_cost(f, l);
  }
  p.d = Eigen::VectorXd::Zero(m);
  p.A = Eigen::MatrixXd::Zero(m, F);
  p.B = Eigen::MatrixXd::Zero(m, L);
  p.C = Eigen::MatrixXd::Zero(m, ny);
  for (int l = 0; l < L; ++l) {
    p.B(l, l) = 1.0;
    for (int f = 0; f < F; ++f) p.C(l, F + f * L + l) = -1.0;
  }
  for (int f = 0; f < F; ++f) {
    const int r = L + f;
    p.A(r, f) = -1.0;
    p.C(r, f) = -1.0;
    for (int l = 0; l < L; ++l) p.C(r, F + f * L + l) = 1.0;
  }
  for (int k = 0; k < ny; ++k) p.C(L + F + k, k) = -1.0;
  p.x_lower = Eigen::VectorXd::Zero(F);
  if (sp.local_rules) {
    p.y_mask = Eigen::MatrixXd::Zero(ny, L);
    p.y_mask.topRows(F).setOnes();
    for (int f = 0; f < F; ++f)
      for (int l = 0; l < L; ++l) p.y_mask(F + f * L + l, l) = 1.0;
  }
  return p;
}

inline Eigen::VectorXd shipment_demand(const Eigen::Vector3d& gamma, std::mt19937_64& rng, int locations = 12) {
  std::normal_distribution<double> z;
  Eigen::VectorXd xi(locations);
  for (int l = 0; l < locations; ++l) {
    // Location l behaves like month l + 1 shifted by a quarter.
    xi[l] = inventory_demand(gamma, l + 1 + 3, z(rng), 12);
  }
  return xi;
}

inline Dataset shipment_data(int n, std::uint64_t seed, int locations = 12) {
  if (n < 1) throw InvalidParameter("shipment: N >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Dataset d;
  d.gammas.resize(n, 3);
  d.xis.resize(n, locations);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d g(z(rng), z(rng), z(rng));
    d.gammas.row(i) = g.transpose();
    d.xis.row(i) = shipment_demand(g, rng, locations).transpose();
  }
  d.stage_dims = {locations};
  return d;
}

}  // namespace srosi::gen
