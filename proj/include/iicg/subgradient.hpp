#pragma once

#include "iicg/types.hpp"

namespace iicg {

// Pieces of the minimum-norm subgradient of F at x, given g = Ax - b.
// A coordinate counts as zero by numeric equality with 0.0 (the sign bit of
// -0.0 is ignored).

/// Violation of |g_i| <= tau on zero coordinates: g_i - tau sgn(g_i), else 0.
Vector compute_omega(const Vector& x, const Vector& g, double tau);

/// Scaled prox displacement on nonzero coordinates:
/// (x_i - soft(x_i - alpha g_i, alpha tau)) / alpha, 0 where x_i = 0.
Vector compute_psi(const Vector& x, const Vector& g, double tau, double alpha);

/// g_i + tau sgn(x_i) on nonzero coordinates, 0 elsewhere.
Vector compute_phi(const Vector& x, const Vector& g, double tau);

/// v = omega + phi; zero exactly at minimizers.
Vector compute_v(const Vector& x, const Vector& g, double tau);

/// ||omega||^2 <= ||psi||^2. Ties count as balanced.
bool gradient_balance(const Vector& omega, const Vector& psi);

struct SubgradientParts {
  Vector omega;
  Vector psi;
  Vector phi;
  Vector v;
  double alpha_used = 0.0;
};

SubgradientParts compute_parts(const Vector& x, const Vector& g, double tau, double alpha);

}  // namespace iicg
