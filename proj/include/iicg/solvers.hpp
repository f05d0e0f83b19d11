#pragma once

#include "iicg/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace iicg {

enum class Algorithm { IICG1, IICG2, FISTA, ISTABB };
enum class AlphaPolicy { ConstantInvL, BBLineSearch };
enum class StepType { ISTA, SubISTA, CG, Cutback, LSFallback };
enum class RunStatus { Converged, BudgetExhausted, Stalled };

/// Stop once (F - F*)/max(|F*|, 1e-12) <= tol.
struct ReferenceObjective {
  double f_star = 0.0;
};
/// Stop once ||v(x)||_inf <= tol * max(1, ||v(x0)||_inf).
struct SubgradientNorm {};
using Termination = std::variant<SubgradientNorm, ReferenceObjective>;

struct LineSearchParams {
  int window = 5;
  double xi = 0.005;
  int max_halvings = 60;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::IICG2;
  double c = 1e-4;
  // unset: BBLineSearch for iiCG and ISTA-BB-LS, ConstantInvL for FISTA
  std::optional<AlphaPolicy> alpha_policy;
  // steplength for psi in the gradient balance test; unset: 1/L
  std::optional<double> alpha_bal;
  // known largest eigenvalue; unset: power-iteration estimate (charged)
  std::optional<double> lipschitz;
  double tol = 1e-6;
  Termination termination = SubgradientNorm{};
  std::int64_t mv_budget = 50000;
  LineSearchParams ls;
  // record every iterate alongside the trace (small instances only)
  bool theory_checks = false;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;  // unset: zero vector

  AlphaPolicy effective_alpha_policy() const;
  void validate() const;
};

struct TraceRecord {
  std::int64_t mv = 0;
  std::int64_t k = 0;
  double f = 0.0;
  std::int64_t nnz = 0;
  StepType step = StepType::ISTA;
  double seconds = 0.0;  // wall time since the solve started; not serialized
};

struct RunTrace {
  std::vector<TraceRecord> records;
  double initial_f = 0.0;
  std::int64_t initial_mv = 0;  // MVs spent before the first step
  Vector initial_x;
  std::vector<Vector> iterates;  // theory_checks: one per record
  Vector final_x;
  double final_f = 0.0;
  double final_v_inf = 0.0;  // from the solver's running gradient
  RunStatus status = RunStatus::BudgetExhausted;
  std::int64_t total_mv = 0;
  double l_used = 0.0;
  double seconds = 0.0;
  std::int64_t fallback_steps = 0;
  std::int64_t curvature_breaks = 0;
};

/// Power iteration from a seeded random unit vector; stops when the
/// Rayleigh quotient changes by <= 1e-4 relative or after 200 iterations.
/// Returns 1.01 times the estimate (1.0 for the zero operator).
double estimate_L(CountingOperator& op, std::uint64_t seed);

RunTrace solve_iicg1(const QuadraticProblem& p, const SolverConfig& cfg);
RunTrace solve_iicg2(const QuadraticProblem& p, const SolverConfig& cfg);
RunTrace solve_fista(const QuadraticProblem& p, const SolverConfig& cfg);
RunTrace solve_istabb(const QuadraticProblem& p, const SolverConfig& cfg);
RunTrace solve(const QuadraticProblem& p, const SolverConfig& cfg);

double accuracy(double f_k, double f_star);

struct ReferenceSolution {
  double f_star = 0.0;
  RunStatus status = RunStatus::BudgetExhausted;
  std::int64_t mv = 0;
  Vector x;
};

/// High-accuracy reference: iiCG-2, subgradient-norm tol 1e-13, 4x the budget.
ReferenceSolution reference_objective(const QuadraticProblem& p,
                                      std::int64_t mv_budget = 4 * 50000);

std::string to_string(Algorithm a);
std::string to_string(StepType s);
std::string to_string(RunStatus s);
Algorithm parse_algorithm(const std::string& name);
StepType parse_step_type(const std::string& name);

void write_trace_csv(std::ostream& out, const RunTrace& trace);
/// Reads the records of a trace CSV (mv,k,F,nnz,step).
std::vector<TraceRecord> read_trace_csv(std::istream& in);

}  // namespace iicg
