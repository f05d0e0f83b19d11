#include "iicg/subspace_cg.hpp"

#include <limits>
#include <stdexcept>

namespace iicg {

Vector project_to_anchor(const Vector& v, const Vector& x_cg) {
  Vector out = v;
  for (Index i = 0; i < v.size(); ++i) {
    if (x_cg[i] == 0.0) out[i] = 0.0;
  }
  return out;
}

bool same_sign_pattern(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) != sgn(b[i])) return false;
  }
  return true;
}

CGState init_cg_cycle(const Vector& x, const Vector& g, double tau) {
  if (x.size() != g.size()) throw std::invalid_argument("init_cg_cycle: dimension mismatch");
  CGState s;
  s.x = x;
  s.x_cg = x;
  s.r = g + tau * sgn(x);
  s.rho = project_to_anchor(s.r, x);
  s.d = -s.rho;
  s.rho_dot = s.r.dot(s.rho);
  return s;
}

CGStepResult cg_step(const CGState& s, CountingOperator& op, double curvature_floor) {
  CGStepResult res;
  res.ad = op.apply(s.d);
  const double curvature = s.d.dot(res.ad);
  if (!(curvature > curvature_floor * s.d.squaredNorm())) {
    res.outcome = CGStepOutcome::CurvatureBreak;
    return res;
  }
  res.step = s.rho_dot / curvature;

  CGState& t = res.next;
  t.x_cg = s.x_cg;
  t.x = s.x + res.step * s.d;
  t.r = s.r + res.step * res.ad;
  t.rho = project_to_anchor(t.r, t.x_cg);
  t.rho_dot = t.r.dot(t.rho);
  const double beta = s.rho_dot > 0.0 ? t.rho_dot / s.rho_dot : 0.0;
  t.d = -t.rho + beta * s.d;
  res.crossed = !same_sign_pattern(t.x, t.x_cg);
  return res;
}

Vector cutback(const Vector& x_k, const Vector& x_cg, const Vector& d, double* step_taken) {
  if (step_taken != nullptr) *step_taken = 0.0;
  if (!same_sign_pattern(x_k, x_cg)) return x_k;

  double alpha_b = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x_k.size(); ++i) {
    if (x_cg[i] != 0.0 && sgn(d[i]) == -sgn(x_cg[i]) && x_k[i] * d[i] < 0.0) {
      alpha_b = std::min(alpha_b, -x_k[i] / d[i]);
    }
  }
  if (alpha_b == std::numeric_limits<double>::infinity()) {
    // nothing can cross; not reachable from the solver loop
    if (step_taken != nullptr) *step_taken = 1.0;
    return x_k + d;
  }

  Vector out = x_k + alpha_b * d;
  for (Index i = 0; i < out.size(); ++i) {
    const bool blocking = x_cg[i] != 0.0 && x_k[i] * d[i] < 0.0 && -x_k[i] / d[i] == alpha_b;
    if (blocking || sgn(out[i]) != sgn(x_cg[i])) out[i] = 0.0;
  }
  if (step_taken != nullptr) *step_taken = alpha_b;
  return out;
}

double orthant_model_value(const Vector& x, const Vector& x_cg, const Vector& ax,
                           const Vector& b, double tau) {
  return 0.5 * x.dot(ax) + (-b + tau * sgn(x_cg)).dot(x);
}

bool sufficient_decrease(double f_next, double f_curr, const Vector& v_curr, double c) {
  return f_next <= f_curr - c * v_curr.squaredNorm();
}

}  // namespace iicg
