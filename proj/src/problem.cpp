#include "iicg/problem.hpp"

#include "iicg/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace iicg {
namespace {

void require_length(Index got, Index want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(got) + ", expected " + std::to_string(want) +
                                ")");
  }
}

Vector apply_data(const DenseOperator& d, const Vector& v) { return d.a * v; }

Vector apply_data(const FactoredOperator& f, const Vector& v) {
  const Vector bv = f.b * v;
  Vector out = f.b.transpose() * bv;
  if (f.gamma != 0.0) out += (2.0 * f.gamma) * v;
  return out;
}

}  // namespace

CountingOperator::CountingOperator(DenseOperator dense) {
  if (dense.a.rows() != dense.a.cols()) {
    throw std::invalid_argument("dense operator must be square");
  }
  n_ = dense.a.rows();
  data_ = std::make_shared<const Data>(std::move(dense));
}

CountingOperator::CountingOperator(FactoredOperator factored) {
  if (!(factored.gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  n_ = factored.b.cols();
  data_ = std::make_shared<const Data>(std::move(factored));
}

OperatorKind CountingOperator::kind() const {
  return dense() != nullptr ? OperatorKind::Dense : OperatorKind::Factored;
}

Vector CountingOperator::apply(const Vector& v) {
  if (!data_) throw std::logic_error("apply on an empty operator");
  require_length(v.size(), n_, "apply");
  ++mv_count_;
  return std::visit([&](const auto& d) { return apply_data(d, v); }, *data_);
}

CountingOperator CountingOperator::fresh() const {
  CountingOperator copy = *this;
  copy.mv_count_ = 0;
  return copy;
}

Matrix CountingOperator::to_dense() const {
  if (const auto* d = dense()) return d->a;
  const auto* f = factored();
  Matrix a = f->b.transpose() * f->b;
  a.diagonal().array() += 2.0 * f->gamma;
  return a;
}

QuadraticProblem::QuadraticProblem(CountingOperator op_in, Vector b_in, double tau_in)
    : op(std::move(op_in)), b(std::move(b_in)), tau(tau_in) {
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be nonnegative");
  require_length(b.size(), op.size(), "problem rhs");
}

double eval_objective(QuadraticProblem& p, const Vector& x) {
  require_length(x.size(), p.n(), "eval_objective");
  const Vector ax = p.op.apply(x);
  return eval_objective(p, x, ax);
}

double eval_objective(const QuadraticProblem& p, const Vector& x, const Vector& ax) {
  require_length(x.size(), p.n(), "eval_objective");
  require_length(ax.size(), p.n(), "eval_objective Ax");
  return 0.5 * x.dot(ax) - p.b.dot(x) + p.tau * x.lpNorm<1>();
}

Vector eval_gradient(QuadraticProblem& p, const Vector& x) {
  require_length(x.size(), p.n(), "eval_gradient");
  return p.op.apply(x) - p.b;
}

Vector eval_gradient(const QuadraticProblem& p, const Vector& x, const Vector& ax) {
  require_length(x.size(), p.n(), "eval_gradient");
  require_length(ax.size(), p.n(), "eval_gradient Ax");
  return ax - p.b;
}

double objective_from_gradient(const QuadraticProblem& p, const Vector& x, const Vector& g) {
  return 0.5 * x.dot(g - p.b) + p.tau * x.lpNorm<1>();
}

OperatorProbe probe_operator(const CountingOperator& op, int probes, std::uint64_t seed) {
  CountingOperator local = op.fresh();
  Rng rng(seed);
  const Index n = op.size();
  auto draw = [&] {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
  };
  // crude norm estimate from the probes themselves
  std::vector<std::pair<Vector, Vector>> samples;
  double norm_est = 0.0;
  for (int k = 0; k < probes; ++k) {
    Vector u = draw();
    Vector au = local.apply(u);
    norm_est = std::max(norm_est, au.norm() / u.norm());
    samples.emplace_back(std::move(u), std::move(au));
  }
  norm_est = std::max(norm_est, 1e-300);
  OperatorProbe out;
  out.min_curvature = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& [u, au] = samples[k];
    out.min_curvature = std::min(out.min_curvature, u.dot(au) / (u.squaredNorm() * norm_est));
    const auto& [v, av] = samples[(k + 1) % samples.size()];
    const double defect = std::abs(u.dot(av) - v.dot(au)) / (u.norm() * v.norm() * norm_est);
    out.symmetry_defect = std::max(out.symmetry_defect, defect);
  }
  return out;
}

}  // namespace iicg
