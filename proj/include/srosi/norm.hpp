#pragma once

#include <string>

#include <Eigen/Dense>

#include "srosi/error.hpp"

namespace srosi {

enum class Norm { L1, L2, LInf };

inline double norm_of(const Eigen::Ref<const Eigen::VectorXd>& v, Norm n) {
  switch (n) {
    case Norm::L1: return v.lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::LInf: return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
  }
  return 0.0;
}

/// The norm whose unit ball is polar to `n`'s.
inline Norm dual_norm(Norm n) {
  switch (n) {
    case Norm::L1: return Norm::LInf;
    case Norm::L2: return Norm::L2;
    case Norm::LInf: return Norm::L1;
  }
  return n;
}

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::LInf: return "linf";
  }
  return "?";
}

inline Norm parse_norm(const std::string& s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::LInf;
  throw InvalidParameter("unknown norm '" + s + "'");
}

}  // namespace srosi
