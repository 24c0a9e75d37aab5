#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srosi/error.hpp"

namespace srosi {

/// N historical pairs (gamma^i, xi^i).  Row i of `gammas` is the side
/// information of sample i; row i of `xis` is its sample path, laid out stage
/// by stage according to `stage_dims`.
struct Dataset {
  Eigen::MatrixXd gammas;
  Eigen::MatrixXd xis;
  std::vector<int> stage_dims;

  [[nodiscard]] int size() const { return static_cast<int>(gammas.rows()); }
  [[nodiscard]] int dim_gamma() const { return static_cast<int>(gammas.cols()); }
  [[nodiscard]] int dim_xi() const { return static_cast<int>(xis.cols()); }
  [[nodiscard]] int stages() const { return static_cast<int>(stage_dims.size()); }

  /// Offset of stage t's first coordinate inside a path.
  [[nodiscard]] int stage_offset(int t) const {
    return std::accumulate(stage_dims.begin(), stage_dims.begin() + t, 0);
  }

  void validate() const {
    if (gammas.rows() < 1) throw InvalidParameter("dataset: need at least one sample");
    if (xis.rows() != gammas.rows()) throw InvalidParameter("dataset: gamma/xi row counts differ");
    if (!gammas.allFinite() || !xis.allFinite()) throw InvalidParameter("dataset: non-finite entry");
    int total = 0;
    for (int d : stage_dims) {
      if (d < 1) throw InvalidParameter("dataset: stage dimensions must be positive");
      total += d;
    }
    if (total != xis.cols()) throw InvalidParameter("dataset: stage dimensions do not sum to d_xi");
  }

  /// Rows listed in `idx`, in that order.
  [[nodiscard]] Dataset subset(const std::vector<int>& idx) const {
    Dataset out;
    out.stage_dims = stage_dims;
    out.gammas.resize(static_cast<Eigen::Index>(idx.size()), gammas.cols());
    out.xis.resize(static_cast<Eigen::Index>(idx.size()), xis.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.gammas.row(static_cast<Eigen::Index>(k)) = gammas.row(idx[k]);
      out.xis.row(static_cast<Eigen::Index>(k)) = xis.row(idx[k]);
    }
    return out;
  }
};

/// Header `g1..g{d_gamma},x1..x{d_xi}`, one sample per line.
inline void write_csv(const Dataset& data, std::ostream& os) {
  const auto old = os.precision(17);
  for (int j = 0; j < data.dim_gamma(); ++j) os << (j ? "," : "") << 'g' << j + 1;
  for (int j = 0; j < data.dim_xi(); ++j) os << (j || data.dim_gamma() ? "," : "") << 'x' << j + 1;
  os << '\n';
  for (int i = 0; i < data.size(); ++i) {
    bool first = true;
    for (int j = 0; j < data.dim_gamma(); ++j, first = false) os << (first ? "" : ",") << data.gammas(i, j);
    for (int j = 0; j < data.dim_xi(); ++j, first = false) os << (first ? "" : ",") << data.xis(i, j);
    os << '\n';
  }
  os.precision(old);
}

/// Parses the CSV layout written by `write_csv`.  Without `stage_dims` the
/// path is treated as one coordinate per stage.
inline Dataset read_csv(std::istream& is, std::vector<int> stage_dims = {}) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidParameter("csv: empty input");
  int dg = 0, dx = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
      if (tok.size() < 2) throw InvalidParameter("csv: bad header field '" + tok + "'");
      if (tok[0] == 'g' && dx == 0) ++dg;
      else if (tok[0] == 'x') ++dx;
      else throw InvalidParameter("csv: bad header field '" + tok + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InvalidParameter("csv: bad number '" + tok + "'");
      }
    }
    if (static_cast<int>(row.size()) != dg + dx) throw InvalidParameter("csv: wrong field count");
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.gammas.resize(static_cast<Eigen::Index>(rows.size()), dg);
  data.xis.resize(static_cast<Eigen::Index>(rows.size()), dx);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dg; ++j) data.gammas(static_cast<Eigen::Index>(i), j) = rows[i][j];
    for (int j = 0; j < dx; ++j) data.xis(static_cast<Eigen::Index>(i), j) = rows[i][dg + j];
  }
  data.stage_dims = stage_dims.empty() ? std::vector<int>(dx, 1) : std::move(stage_dims);
  data.validate();
  return data;
}

inline Dataset read_csv_file(const std::string& path, std::vector<int> stage_dims = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path);
  return read_csv(in, std::move(stage_dims));
}

}  // namespace srosi
