#pragma once

#include <random>

#include "srosi/srolp.hpp"

namespace fixtures {

struct Instance {
  srosi::DynamicProblem prob;
  srosi::Dataset data;
  srosi::WeightVector w;
};

// Small random stage-wise problem with complete recourse: every y_l is
// bounded below by two affine functions of earlier decisions and
// uncertainty, has positive cost, and decisions live in [-2, 2].
inline Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 1.5), path(0.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 2), stages(1, 2), samples(1, 5);
  Instance in;
  auto& p = in.prob;
  const int T = stages(rng);
  for (int t = 0; t < T; ++t) {
    p.dim_x.push_back(dim(rng));
    p.dim_xi.push_back(dim(rng));
    p.dim_y.push_back(dim(rng));
    p.rows.push_back(2 * p.dim_y.back());
  }
  const auto xs = srosi::DynamicProblem::stage_map(p.dim_x);
  const auto zs = srosi::DynamicProblem::stage_map(p.dim_xi);
  const auto ys = srosi::DynamicProblem::stage_map(p.dim_y);
  const int nx = static_cast<int>(xs.size()), nxi = static_cast<int>(zs.size()), ny = static_cast<int>(ys.size());
  const int m = 2 * ny;
  p.f.resize(nx);
  for (auto& v : p.f) v = u(rng);
  p.g.resize(nxi);
  for (auto& v : p.g) v = 0.5 * u(rng);
  p.h.resize(ny);
  for (auto& v : p.h) v = pos(rng);
  p.d.resize(m);
  for (auto& v : p.d) v = u(rng);
  p.A = Eigen::MatrixXd::Zero(m, nx);
  p.B = Eigen::MatrixXd::Zero(m, nxi);
  p.C = Eigen::MatrixXd::Zero(m, ny);
  for (int l = 0; l < ny; ++l) {
    for (int r = 2 * l; r < 2 * l + 2; ++r) {
      p.C(r, l) = -1.0;
      for (int k = 0; k < nx; ++k)
        if (xs[k] <= ys[l]) p.A(r, k) = 2.0 * u(rng);
      for (int j = 0; j < nxi; ++j)
        if (zs[j] <= ys[l]) p.B(r, j) = 2.0 * u(rng);
    }
  }
  p.x_lower = Eigen::VectorXd::Constant(nx, -2.0);
  p.x_upper = Eigen::VectorXd::Constant(nx, 2.0);

  const int n = samples(rng);
  in.data.gammas = Eigen::MatrixXd::Zero(n, 1);
  in.data.xis.resize(n, nxi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < nxi; ++j) in.data.xis(i, j) = path(rng);
  in.data.stage_dims = p.dim_xi;
  in.w.resize(n);
  for (auto& v : in.w) v = 0.1 + std::abs(u(rng));
  in.w /= in.w.sum();
  return in;
}

}  // namespace fixtures
