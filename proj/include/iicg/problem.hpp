#pragma once

#include "iicg/types.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>

namespace iicg {

/// Full symmetric n-by-n matrix A.
struct DenseOperator {
  Matrix a;
};

/// A = B^T B + 2 gamma I, with B stored row-major (m x n).
struct FactoredOperator {
  RowMatrix b;
  double gamma = 0.0;
};

enum class OperatorKind : std::uint8_t { Dense = 0, Factored = 1 };

/// Matrix-free application of a symmetric PSD operator with a matrix-vector
/// product counter. The matrix data is immutable and shared between copies;
/// the counter belongs to each copy, so a solve works on its own copy.
class CountingOperator {
 public:
  CountingOperator() = default;
  explicit CountingOperator(DenseOperator dense);
  explicit CountingOperator(FactoredOperator factored);

  Index size() const { return n_; }
  OperatorKind kind() const;
  const DenseOperator* dense() const { return std::get_if<DenseOperator>(data_.get()); }
  const FactoredOperator* factored() const {
    return std::get_if<FactoredOperator>(data_.get());
  }

  /// Returns A v and charges one MV unit.
  Vector apply(const Vector& v);

  std::int64_t mv_count() const { return mv_count_; }

  /// Copy sharing the matrix data with a zeroed counter.
  CountingOperator fresh() const;

  /// Explicit dense expansion of A (test and oracle use; not charged).
  Matrix to_dense() const;

 private:
  using Data = std::variant<DenseOperator, FactoredOperator>;
  std::shared_ptr<const Data> data_;
  Index n_ = 0;
  std::int64_t mv_count_ = 0;
};

/// minimize F(x) = 1/2 x^T A x - b^T x + tau ||x||_1
struct QuadraticProblem {
  CountingOperator op;
  Vector b;
  double tau = 0.0;

  QuadraticProblem() = default;
  QuadraticProblem(CountingOperator op, Vector b, double tau);

  Index n() const { return op.size(); }

  /// Same data, private zeroed MV counter.
  QuadraticProblem fresh() const { return {op.fresh(), b, tau}; }
};

/// F(x); charges one MV unit.
double eval_objective(QuadraticProblem& p, const Vector& x);
/// F(x) from a precomputed Ax; charges nothing.
double eval_objective(const QuadraticProblem& p, const Vector& x, const Vector& ax);

/// g(x) = Ax - b; charges one MV unit.
Vector eval_gradient(QuadraticProblem& p, const Vector& x);
/// g(x) from a precomputed Ax; charges nothing.
Vector eval_gradient(const QuadraticProblem& p, const Vector& x, const Vector& ax);

/// F(x) when g = Ax - b is already known: 1/2 x^T (g - b) + tau ||x||_1.
double objective_from_gradient(const QuadraticProblem& p, const Vector& x, const Vector& g);

struct OperatorProbe {
  double symmetry_defect = 0.0;  // max |u^T A v - v^T A u| / (|u||v| normA)
  double min_curvature = 0.0;    // min v^T A v / (|v|^2 normA)
};

/// Randomized symmetry/PSD probe of the operator (uncharged).
OperatorProbe probe_operator(const CountingOperator& op, int probes, std::uint64_t seed);

}  // namespace iicg
