#include "iicg/first_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iicg {
namespace {

void check_step_args(const Vector& x, const Vector& g, double alpha) {
  if (x.size() != g.size()) throw std::invalid_argument("ista: dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("ista: alpha must be positive");
}

Vector trial_point(const Vector& x, const Vector& g, double tau, double alpha, IstaMode mode) {
  return mode == IstaMode::Full ? ista_step(x, g, tau, alpha)
                                : subspace_ista_step(x, g, tau, alpha);
}

}  // namespace

Vector ista_step(const Vector& x, const Vector& g, double tau, double alpha) {
  check_step_args(x, g, alpha);
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i] - alpha * g[i], alpha * tau);
  return out;
}

Vector subspace_ista_step(const Vector& x, const Vector& g, double tau, double alpha) {
  check_step_args(x, g, alpha);
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out[i] = soft_threshold(x[i] - alpha * g[i], alpha * tau);
  }
  return out;
}

LineSearchMemory::LineSearchMemory(int window_size, double xi, int max_halvings,
                                   double initial_f)
    : xi_(xi), max_halvings_(max_halvings) {
  if (window_size < 1) throw std::invalid_argument("line search window must be >= 1");
  if (max_halvings < 1) throw std::invalid_argument("max_halvings must be >= 1");
  if (!std::isfinite(initial_f)) throw std::invalid_argument("initial F must be finite");
  window_.assign(static_cast<std::size_t>(window_size), initial_f);
}

double LineSearchMemory::reference() const {
  return *std::max_element(window_.begin(), window_.end());
}

void LineSearchMemory::push(double f) {
  window_.pop_back();
  window_.push_front(f);
}

double bb_steplength(const Vector* x_prev, const Vector& x, const Vector* g_prev,
                     const Vector& g, double l_est) {
  const double fallback = 1.0 / l_est;
  if (x_prev == nullptr || g_prev == nullptr) return fallback;
  const Vector s = x - *x_prev;
  const double num = s.squaredNorm();
  // A s = g - g_prev for the quadratic, so no operator application is needed
  const double den = s.dot(g - *g_prev);
  if (!(num > 0.0) || !(den > 0.0) || !std::isfinite(num / den)) return fallback;
  return num / den;
}

BBStepResult ista_bb_ls(const BBStepInput& in, LineSearchMemory& mem, QuadraticProblem& p,
                        double l_est, std::int64_t mv_allowance) {
  BBStepResult res;
  double alpha = bb_steplength(in.x_prev, in.x, in.g_prev, in.g, l_est);
  const double reference = mem.reference();

  auto evaluate = [&](Vector candidate, double step) {
    const Vector ax = p.op.apply(candidate);
    ++res.mv_used;
    res.g = ax - p.b;
    res.f = eval_objective(p, candidate, ax);
    res.x = std::move(candidate);
    res.alpha = step;
  };

  for (int trial = 0; trial <= mem.max_halvings(); ++trial) {
    if (res.mv_used >= mv_allowance) {
      res.out_of_budget = true;
      return res;
    }
    evaluate(trial_point(in.x, in.g, p.tau, alpha, in.mode), alpha);
    const double decrease = alpha * mem.xi() * (in.x - res.x).squaredNorm();
    if (res.f <= reference - decrease) {
      mem.push(res.f);
      return res;
    }
    alpha *= 0.5;
  }

  if (res.mv_used >= mv_allowance) {
    res.out_of_budget = true;
    return res;
  }
  evaluate(trial_point(in.x, in.g, p.tau, 1.0 / l_est, in.mode), 1.0 / l_est);
  res.fallback = true;
  mem.push(res.f);
  return res;
}

}  // namespace iicg
