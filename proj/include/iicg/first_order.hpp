#pragma once

#include "iicg/problem.hpp"

#include <cstdint>
#include <deque>

namespace iicg {

/// Full ISTA step: soft(x - alpha g, alpha tau) componentwise, which equals
/// x - alpha omega - alpha psi.
Vector ista_step(const Vector& x, const Vector& g, double tau, double alpha);

/// ISTA on the nonzero coordinates only; zeros of x stay exactly zero.
Vector subspace_ista_step(const Vector& x, const Vector& g, double tau, double alpha);

enum class IstaMode { Full, Subspace };

/// Nonmonotone line-search window: the M most recent accepted objective
/// values, seeded with F(x0).
class LineSearchMemory {
 public:
  LineSearchMemory(int window_size, double xi, int max_halvings, double initial_f);

  double reference() const;  // max over the window
  void push(double f);       // shift in the newest accepted value

  int window_size() const { return static_cast<int>(window_.size()); }
  double xi() const { return xi_; }
  int max_halvings() const { return max_halvings_; }
  const std::deque<double>& window() const { return window_; }

 private:
  std::deque<double> window_;
  double xi_;
  int max_halvings_;
};

struct BBStepResult {
  Vector x;        // accepted point
  Vector g;        // A x - b at the accepted point
  double f = 0.0;  // F at the accepted point
  double alpha = 0.0;
  std::int64_t mv_used = 0;
  bool fallback = false;     // halvings exhausted, 1/L_est step taken
  bool out_of_budget = false;  // stopped before acceptance; x/g/f unset
};

struct BBStepInput {
  const Vector& x;
  const Vector* x_prev;  // nullptr on the first iteration
  const Vector& g;
  const Vector* g_prev;
  IstaMode mode;
};

/// ISTA step with Barzilai-Borwein steplength and nonmonotone backtracking.
/// The BB coefficient reuses the gradient difference (no MV); each trial point
/// costs one MV. `mv_allowance` caps the MVs this call may spend.
BBStepResult ista_bb_ls(const BBStepInput& in, LineSearchMemory& mem, QuadraticProblem& p,
                        double l_est, std::int64_t mv_allowance);

/// BB steplength s^T s / s^T (g - g_prev), with 1/L_est when undefined.
double bb_steplength(const Vector* x_prev, const Vector& x, const Vector* g_prev,
                     const Vector& g, double l_est);

}  // namespace iicg
