#include "iicg/solvers.hpp"

#include "iicg/first_order.hpp"
#include "iicg/probgen.hpp"
#include "iicg/subgradient.hpp"
#include "iicg/subspace_cg.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace iicg {

AlphaPolicy SolverConfig::effective_alpha_policy() const {
  if (alpha_policy) return *alpha_policy;
  return algorithm == Algorithm::FISTA ? AlphaPolicy::ConstantInvL : AlphaPolicy::BBLineSearch;
}

void SolverConfig::validate() const {
  if (mv_budget < 1) throw std::invalid_argument("mv_budget must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(c >= 0.0)) throw std::invalid_argument("c must be nonnegative");
  if (alpha_bal && !(*alpha_bal > 0.0)) throw std::invalid_argument("alpha_bal must be positive");
  if (lipschitz && !(*lipschitz > 0.0)) throw std::invalid_argument("lipschitz must be positive");
}

double accuracy(double f_k, double f_star) {
  return (f_k - f_star) / std::max(std::abs(f_star), 1e-12);
}

double estimate_L(CountingOperator& op, std::uint64_t seed) {
  const Index n = op.size();
  if (n < 1) throw std::invalid_argument("estimate_L: empty operator");
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();

  double rayleigh = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector av = op.apply(v);
    const double next = v.dot(av);
    const double norm = av.norm();
    if (!(norm > 0.0)) return 1.0;
    const bool settled = it > 0 && std::abs(next - rayleigh) <= 1e-4 * std::abs(next);
    rayleigh = next;
    if (settled) break;
    v = av / norm;
  }
  if (!(rayleigh > 0.0)) return 1.0;
  return 1.01 * rayleigh;
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::int64_t kStallWindow = 1000;

/// Shared bookkeeping for one solve: iterate, running gradient, trace,
/// termination, budget and stall detection.
class Run {
 public:
  Run(const QuadraticProblem& problem, const SolverConfig& cfg)
      : p(problem.fresh()), cfg_(cfg), start_(Clock::now()) {
    cfg.validate();
    const Index n = p.n();
    l = cfg.lipschitz ? *cfg.lipschitz : estimate_L(p.op, cfg.seed);
    x = cfg.x0 ? *cfg.x0 : Vector::Zero(n);
    if (x.size() != n) throw std::invalid_argument("x0 has the wrong dimension");
    g = x.isZero(0.0) ? Vector(-p.b) : eval_gradient(p, x);
    f = objective_from_gradient(p, x, g);

    alpha_bal = cfg.alpha_bal ? *cfg.alpha_bal : 1.0 / l;
    v0_inf_ = compute_v(x, g, p.tau).lpNorm<Eigen::Infinity>();

    trace.initial_f = f;
    trace.initial_mv = p.op.mv_count();
    trace.initial_x = x;
    trace.l_used = l;
    best_f_ = f;
    best_x_ = x;
    best_g_ = g;
    anchor_f_ = f;
    anchor_mv_ = p.op.mv_count();
    if (terminated()) finish(RunStatus::Converged);
  }

  QuadraticProblem p;
  Vector x;
  Vector g;
  double f = 0.0;
  double l = 1.0;
  double alpha_bal = 1.0;
  std::int64_t k = 0;
  RunTrace trace;
  bool done = false;

  const SolverConfig& cfg() const { return cfg_; }
  std::int64_t mv() const { return p.op.mv_count(); }
  std::int64_t mv_left() const { return cfg_.mv_budget - mv(); }

  /// True if `count` more MVs fit in the budget; otherwise ends the run.
  bool reserve(std::int64_t count = 1) {
    if (mv_left() >= count) return true;
    finish(RunStatus::BudgetExhausted);
    return false;
  }

  void accept(Vector x_new, Vector g_new, double f_new, StepType type) {
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    ++k;
    const double seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    trace.records.push_back({mv(), k, f, count_nonzeros(x), type, seconds});
    if (cfg_.theory_checks) trace.iterates.push_back(x);
    if (f < best_f_) {
      best_f_ = f;
      best_x_ = x;
      best_g_ = g;
    }
    if (terminated()) {
      finish(RunStatus::Converged);
      return;
    }
    if (std::abs(f - anchor_f_) > 1e-16 * std::abs(anchor_f_) ||
        (anchor_f_ == 0.0 && f != 0.0)) {
      anchor_f_ = f;
      anchor_mv_ = mv();
    } else if (mv() - anchor_mv_ >= kStallWindow) {
      finish(RunStatus::Stalled);
    }
  }

  void finish(RunStatus status) {
    if (done) return;
    done = true;
    trace.status = status;
    if (status == RunStatus::Converged) {
      trace.final_x = x;
      trace.final_f = f;
      trace.final_v_inf = compute_v(x, g, p.tau).lpNorm<Eigen::Infinity>();
    } else {
      trace.final_x = best_x_;
      trace.final_f = best_f_;
      trace.final_v_inf = compute_v(best_x_, best_g_, p.tau).lpNorm<Eigen::Infinity>();
    }
    trace.total_mv = mv();
    trace.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  }

  RunTrace take() {
    if (!done) finish(RunStatus::BudgetExhausted);
    return std::move(trace);
  }

 private:
  bool terminated() const {
    if (const auto* ref = std::get_if<ReferenceObjective>(&cfg_.termination)) {
      return accuracy(f, ref->f_star) <= cfg_.tol;
    }
    const double v_inf = compute_v(x, g, p.tau).lpNorm<Eigen::Infinity>();
    return v_inf <= cfg_.tol * std::max(1.0, v0_inf_);
  }

  SolverConfig cfg_;
  Clock::time_point start_;
  double v0_inf_ = 0.0;
  double best_f_ = 0.0;
  Vector best_x_;
  Vector best_g_;
  double anchor_f_ = 0.0;
  std::int64_t anchor_mv_ = 0;
};

/// First-order steps for the iiCG and ISTA-BB-LS drivers. Keeps the previous
/// iterate for the BB coefficient and the nonmonotone window.
class FirstOrderStepper {
 public:
  explicit FirstOrderStepper(Run& run)
      : run_(run),
        policy_(run.cfg().effective_alpha_policy()),
        memory_(run.cfg().ls.window, run.cfg().ls.xi, run.cfg().ls.max_halvings, run.f) {}

  /// Remember the current iterate as x^{k-1} before any step changes it.
  void note_previous() {
    prev_x_ = run_.x;
    prev_g_ = run_.g;
    has_prev_ = true;
  }

  void step(IstaMode mode) {
    if (policy_ == AlphaPolicy::ConstantInvL) {
      if (!run_.reserve()) return;
      const double alpha = 1.0 / run_.l;
      Vector x_new = mode == IstaMode::Full ? ista_step(run_.x, run_.g, run_.p.tau, alpha)
                                            : subspace_ista_step(run_.x, run_.g, run_.p.tau, alpha);
      const Vector ax = run_.p.op.apply(x_new);
      const double f_new = eval_objective(run_.p, x_new, ax);
      note_previous();
      run_.accept(std::move(x_new), ax - run_.p.b, f_new,
                  mode == IstaMode::Full ? StepType::ISTA : StepType::SubISTA);
      return;
    }

    BBStepInput in{run_.x, has_prev_ ? &prev_x_ : nullptr, run_.g, has_prev_ ? &prev_g_ : nullptr,
                   mode};
    BBStepResult res = ista_bb_ls(in, memory_, run_.p, run_.l, run_.mv_left());
    if (res.out_of_budget) {
      run_.finish(RunStatus::BudgetExhausted);
      return;
    }
    StepType type = mode == IstaMode::Full ? StepType::ISTA : StepType::SubISTA;
    if (res.fallback) {
      type = StepType::LSFallback;
      ++run_.trace.fallback_steps;
    }
    note_previous();
    run_.accept(std::move(res.x), std::move(res.g), res.f, type);
  }

 private:
  Run& run_;
  AlphaPolicy policy_;
  LineSearchMemory memory_;
  Vector prev_x_;
  Vector prev_g_;
  bool has_prev_ = false;
};

/// Inner CG loop shared by iiCG-1 and iiCG-2. Returns when the gradient
/// balance fails, the subspace is solved, curvature breaks down, or a
/// crossing step without sufficient decrease is cut back.
void cg_phase(Run& run, FirstOrderStepper& stepper) {
  const double tau = run.p.tau;
  const double stationary = 1e-14 * (1.0 + run.p.b.norm());
  const double curvature_floor = 1e-14 * run.l;
  CGState state = init_cg_cycle(run.x, run.g, tau);

  while (!run.done) {
    const Vector omega = compute_omega(run.x, run.g, tau);
    const Vector psi = compute_psi(run.x, run.g, tau, run.alpha_bal);
    if (!gradient_balance(omega, psi)) return;
    if (state.rho.norm() <= stationary) return;
    if (!run.reserve()) return;

    CGStepResult step = cg_step(state, run.p.op, curvature_floor);
    if (step.outcome == CGStepOutcome::CurvatureBreak) {
      ++run.trace.curvature_breaks;
      return;
    }
    Vector g_new = run.g + step.step * step.ad;
    const double f_new = objective_from_gradient(run.p, step.next.x, g_new);

    if (step.crossed) {
      const Vector v = omega + compute_phi(run.x, run.g, tau);
      if (!sufficient_decrease(f_new, run.f, v, run.cfg().c)) {
        double alpha_b = 0.0;
        Vector x_cut = cutback(run.x, state.x_cg, state.d, &alpha_b);
        Vector g_cut = run.g + alpha_b * step.ad;
        const double f_cut = objective_from_gradient(run.p, x_cut, g_cut);
        stepper.note_previous();
        run.accept(std::move(x_cut), std::move(g_cut), f_cut, StepType::Cutback);
        return;
      }
    }
    stepper.note_previous();
    state = std::move(step.next);
    run.accept(state.x, std::move(g_new), f_new, StepType::CG);
  }
}

RunTrace solve_iicg(const QuadraticProblem& p, const SolverConfig& cfg, bool subspace_variant) {
  Run run(p, cfg);
  FirstOrderStepper stepper(run);
  while (!run.done) {
    IstaMode mode = IstaMode::Full;
    if (subspace_variant) {
      const Vector omega = compute_omega(run.x, run.g, p.tau);
      const Vector psi = compute_psi(run.x, run.g, p.tau, run.alpha_bal);
      if (gradient_balance(omega, psi)) mode = IstaMode::Subspace;
    }
    stepper.step(mode);
    if (run.done) break;
    cg_phase(run, stepper);
  }
  return run.take();
}

void require_algorithm(const SolverConfig& cfg, Algorithm want) {
  if (cfg.algorithm != want) {
    throw std::invalid_argument("solver called with algorithm " + to_string(cfg.algorithm) +
                                ", expected " + to_string(want));
  }
}

}  // namespace

RunTrace solve_iicg1(const QuadraticProblem& p, const SolverConfig& cfg) {
  require_algorithm(cfg, Algorithm::IICG1);
  return solve_iicg(p, cfg, false);
}

RunTrace solve_iicg2(const QuadraticProblem& p, const SolverConfig& cfg) {
  require_algorithm(cfg, Algorithm::IICG2);
  return solve_iicg(p, cfg, true);
}

RunTrace solve_fista(const QuadraticProblem& p, const SolverConfig& cfg) {
  require_algorithm(cfg, Algorithm::FISTA);
  Run run(p, cfg);
  const double alpha = 1.0 / run.l;
  Vector y = run.x;
  Vector ay = run.g + p.b;
  Vector x_prev = run.x;
  Vector ax_prev = ay;
  double t = 1.0;
  while (!run.done) {
    if (!run.reserve()) break;
    Vector x_new = ista_step(y, ay - run.p.b, p.tau, alpha);
    Vector ax = run.p.op.apply(x_new);
    const double f_new = eval_objective(run.p, x_new, ax);
    run.accept(x_new, ax - run.p.b, f_new, StepType::ISTA);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    // A y is a combination of products already computed
    y = x_new + momentum * (x_new - x_prev);
    ay = ax + momentum * (ax - ax_prev);
    x_prev = std::move(x_new);
    ax_prev = std::move(ax);
    t = t_next;
  }
  return run.take();
}

RunTrace solve_istabb(const QuadraticProblem& p, const SolverConfig& cfg) {
  require_algorithm(cfg, Algorithm::ISTABB);
  Run run(p, cfg);
  FirstOrderStepper stepper(run);
  while (!run.done) stepper.step(IstaMode::Full);
  return run.take();
}

RunTrace solve(const QuadraticProblem& p, const SolverConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::IICG1: return solve_iicg1(p, cfg);
    case Algorithm::IICG2: return solve_iicg2(p, cfg);
    case Algorithm::FISTA: return solve_fista(p, cfg);
    case Algorithm::ISTABB: return solve_istabb(p, cfg);
  }
  throw std::invalid_argument("unknown algorithm");
}

ReferenceSolution reference_objective(const QuadraticProblem& p, std::int64_t mv_budget) {
  SolverConfig cfg;
  cfg.algorithm = Algorithm::IICG2;
  cfg.termination = SubgradientNorm{};
  cfg.tol = 1e-13;
  cfg.mv_budget = mv_budget;
  RunTrace trace = solve_iicg2(p, cfg);
  return {trace.final_f, trace.status, trace.total_mv, std::move(trace.final_x)};
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::IICG1: return "iicg1";
    case Algorithm::IICG2: return "iicg2";
    case Algorithm::FISTA: return "fista";
    case Algorithm::ISTABB: return "istabb";
  }
  return "?";
}

std::string to_string(StepType s) {
  switch (s) {
    case StepType::ISTA: return "ISTA";
    case StepType::SubISTA: return "SUBISTA";
    case StepType::CG: return "CG";
    case StepType::Cutback: return "CUTBACK";
    case StepType::LSFallback: return "LSFALLBACK";
  }
  return "?";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::BudgetExhausted: return "BudgetExhausted";
    case RunStatus::Stalled: return "Stalled";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::IICG1, Algorithm::IICG2, Algorithm::FISTA, Algorithm::ISTABB}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected iicg1, iicg2, fista or istabb)");
}

StepType parse_step_type(const std::string& name) {
  for (StepType s : {StepType::ISTA, StepType::SubISTA, StepType::CG, StepType::Cutback,
                     StepType::LSFallback}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown step type '" + name + "'");
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "mv,k,F,nnz,step\n";
  std::ostringstream row;
  row << std::setprecision(17);
  for (const auto& r : trace.records) {
    row.str("");
    row << r.mv << ',' << r.k << ',' << r.f << ',' << r.nnz << ',' << to_string(r.step) << '\n';
    out << row.str();
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("mv,k,F,nnz,step", 0) != 0) {
    throw std::runtime_error("trace CSV: missing header 'mv,k,F,nnz,step'");
  }
  std::vector<TraceRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string mv, k, f, nnz, step;
    if (!std::getline(ss, mv, ',') || !std::getline(ss, k, ',') || !std::getline(ss, f, ',') ||
        !std::getline(ss, nnz, ',') || !std::getline(ss, step)) {
      throw std::runtime_error("trace CSV line " + std::to_string(line_no) + ": expected 5 fields");
    }
    if (!step.empty() && step.back() == '\r') step.pop_back();
    TraceRecord r;
    r.mv = std::stoll(mv);
    r.k = std::stoll(k);
    r.f = std::stod(f);
    r.nnz = std::stoll(nnz);
    r.step = parse_step_type(step);
    out.push_back(r);
  }
  return out;
}

}  // namespace iicg
