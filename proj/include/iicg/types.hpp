#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace iicg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// sgn(0) = 0, and -0.0 counts as zero.
inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline Vector sgn(const Vector& v) { return v.unaryExpr([](double t) { return sgn(t); }); }

inline double soft_threshold(double z, double t) {
  const double mag = std::abs(z) - t;
  return mag > 0.0 ? mag * sgn(z) : 0.0;
}

inline std::int64_t count_nonzeros(const Vector& x) {
  std::int64_t nnz = 0;
  for (Index i = 0; i < x.size(); ++i) nnz += (x[i] != 0.0);
  return nnz;
}

}  // namespace iicg
