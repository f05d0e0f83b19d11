#include "iicg/subgradient.hpp"

#include <stdexcept>

namespace iicg {
namespace {

void require_same(const Vector& x, const Vector& g) {
  if (x.size() != g.size()) throw std::invalid_argument("subgradient: dimension mismatch");
}

}  // namespace

Vector compute_omega(const Vector& x, const Vector& g, double tau) {
  require_same(x, g);
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0 && std::abs(g[i]) > tau) out[i] = g[i] - tau * sgn(g[i]);
  }
  return out;
}

Vector compute_psi(const Vector& x, const Vector& g, double tau, double alpha) {
  require_same(x, g);
  if (!(alpha > 0.0)) throw std::invalid_argument("compute_psi: alpha must be positive");
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out[i] = (x[i] - soft_threshold(x[i] - alpha * g[i], alpha * tau)) / alpha;
  }
  return out;
}

Vector compute_phi(const Vector& x, const Vector& g, double tau) {
  require_same(x, g);
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out[i] = g[i] + tau * sgn(x[i]);
  }
  return out;
}

Vector compute_v(const Vector& x, const Vector& g, double tau) {
  return compute_omega(x, g, tau) + compute_phi(x, g, tau);
}

bool gradient_balance(const Vector& omega, const Vector& psi) {
  if (omega.size() != psi.size()) {
    throw std::invalid_argument("gradient_balance: dimension mismatch");
  }
  return omega.squaredNorm() <= psi.squaredNorm();
}

SubgradientParts compute_parts(const Vector& x, const Vector& g, double tau, double alpha) {
  SubgradientParts parts;
  parts.omega = compute_omega(x, g, tau);
  parts.psi = compute_psi(x, g, tau, alpha);
  parts.phi = compute_phi(x, g, tau);
  parts.v = parts.omega + parts.phi;
  parts.alpha_used = alpha;
  return parts;
}

}  // namespace iicg
