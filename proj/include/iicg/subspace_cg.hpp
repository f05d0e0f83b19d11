#pragma once

#include "iicg/problem.hpp"

namespace iicg {

/// Projected CG state for one cycle on the orthant model
///   q(x; x_cg) = 1/2 x^T A x + (-b + tau sgn(x_cg))^T x
/// restricted to H = {x : x_i = 0 wherever x_cg_i = 0}.
struct CGState {
  Vector x;
  Vector r;       // A x - b + tau sgn(x_cg)
  Vector rho;     // P(r)
  Vector d;
  Vector x_cg;    // orthant anchor
  double rho_dot = 0.0;  // r^T rho
};

/// Starts a cycle at x given g = Ax - b.
CGState init_cg_cycle(const Vector& x, const Vector& g, double tau);

/// Zeroes the coordinates outside the anchor's support.
Vector project_to_anchor(const Vector& v, const Vector& x_cg);

enum class CGStepOutcome { Ok, CurvatureBreak };

struct CGStepResult {
  CGStepOutcome outcome = CGStepOutcome::Ok;
  CGState next;           // valid when outcome == Ok
  Vector ad;              // A d (computed in either case)
  double step = 0.0;      // alpha_cg
  bool crossed = false;   // sgn(x') != sgn(x_cg) somewhere
};

/// One projected CG iteration; costs one MV. `curvature_floor` is
/// eps_curv = 1e-14 * ||A||_est: d^T A d <= eps_curv ||d||^2 breaks the cycle.
CGStepResult cg_step(const CGState& s, CountingOperator& op, double curvature_floor);

/// Truncates the step x_k + alpha d to the boundary of the x_cg orthant,
/// snapping crossing coordinates to exactly 0. Returns x_k if x_k is already
/// outside the orthant. `step_taken` receives alpha_b (0 when x_k is returned).
Vector cutback(const Vector& x_k, const Vector& x_cg, const Vector& d, double* step_taken = nullptr);

/// q(x; x_cg) from a precomputed Ax.
double orthant_model_value(const Vector& x, const Vector& x_cg, const Vector& ax,
                           const Vector& b, double tau);

/// F_next <= F_curr - c ||v_curr||^2.
bool sufficient_decrease(double f_next, double f_curr, const Vector& v_curr, double c);

bool same_sign_pattern(const Vector& a, const Vector& b);

}  // namespace iicg
