// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "iicg/bench.hpp"
#include "iicg/first_order.hpp"
#include "iicg/probgen.hpp"
#include "iicg/solvers.hpp"
#include "iicg/subgradient.hpp"
#include "iicg/subspace_cg.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace iicg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- 1

void prox_oracle() {
  const auto t0 = Clock::now();
  const double resolution = 1e-4;
  Rng rng(20240901);
  double worst = 0.0;
  int bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double x = rng.uniform() < 0.4 ? 0.0 : rng.normal();
    const double g = rng.normal();
    const double tau = rng.uniform();
    const double alpha = 0.05 + 0.95 * rng.uniform();
    const double step = ista_step(Vector::Constant(1, x), Vector::Constant(1, g), tau, alpha)[0];
    // the prox displacement is at most alpha (|g| + tau), so this window holds the minimizer
    const double half = alpha * (std::abs(g) + tau) + 10 * resolution;
    const long points = static_cast<long>(std::ceil(2 * half / resolution));
    double best = INFINITY, best_z = x;
    for (long i = 0; i <= points; ++i) {
      const double z = x - half + i * resolution;
      const double m = g * (z - x) + tau * std::abs(z) + (z - x) * (z - x) / (2 * alpha);
      if (m < best) {
        best = m;
        best_z = z;
      }
    }
    const double dev = std::abs(step - best_z);
    worst = std::max(worst, dev);
    bad += dev > resolution;
  }
  const double t = seconds_since(t0);
  report(1, "prox oracle equivalence", bad == 0 && t < 10.0,
         "10000 coordinates, max |ista - grid| = " + fmt("%.2e", worst) + " (grid 1e-4), " +
             std::to_string(bad) + " outside, " + fmt("%.2f", t) + " s");
}

// ---------------------------------------------------------------- 2-4

struct TheoryInstance {
  std::string name;
  QuadraticProblem p;
  Matrix a;
  double lambda = 0, L = 0, f_star = 0;
};

double exact_f(const TheoryInstance& t, const Vector& x) {
  return 0.5 * x.dot(t.a * x) - t.p.b.dot(x) + t.p.tau * x.lpNorm<1>();
}

std::vector<TheoryInstance> theory_instances() {
  std::vector<TheoryInstance> out;
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    TheoryInstance t;
    const Index n = 20 + static_cast<Index>(rng.uniform() * 31);  // 20..50
    const double tau = std::pow(10.0, -2 + 2 * rng.uniform());
    if (i % 2 == 0) {
      const double cond = std::pow(10.0, 1 + 2 * rng.uniform());
      const Index nnz = 1 + static_cast<Index>(rng.uniform() * (n - 1));
      auto inst = gen_strict_comp(n, nnz, cond, tau, 0.2, 500 + i);
      t.p = inst.problem;
      t.name = "strict_comp/" + std::to_string(500 + i);
    } else {
      const Index m = n / 2 + static_cast<Index>(rng.uniform() * n);
      const double gamma = std::pow(10.0, -2 + 2 * rng.uniform());
      auto inst = gen_elastic_net(m, n, 1.0, gamma, tau, 500 + i);
      t.p = inst.problem;
      t.name = "elastic_net/" + std::to_string(500 + i);
    }
    t.a = t.p.op.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(t.a);
    t.lambda = eig.eigenvalues().minCoeff();
    t.L = eig.eigenvalues().maxCoeff();
    const auto ref = reference_objective(t.p);
    t.f_star = exact_f(t, ref.x);
    out.push_back(std::move(t));
  }
  return out;
}

struct TheoryStats {
  long ista = 0, subista = 0, philess = 0, cgstep = 0, cg_skipped = 0, recursion = 0;
  long ista_bad = 0, subista_bad = 0, philess_bad = 0, cgstep_bad = 0, recursion_bad = 0;
  double worst_step = -INFINITY, worst_recursion = -INFINITY;
  long bound_runs = 0, bound_bad = 0;
  double bound_max_ratio = 0.0;
  long unconverged = 0;
};

void theory_run(const TheoryInstance& t, Algorithm algorithm, TheoryStats& s) {
  const double alpha = 1.0 / t.L;
  const double beta = 1.0 / (8.0 * t.L);  // min(c, 1/8L) with c = 1/8L
  SolverConfig cfg;
  cfg.algorithm = algorithm;
  cfg.alpha_policy = AlphaPolicy::ConstantInvL;
  cfg.lipschitz = t.L;
  cfg.c = beta;
  cfg.theory_checks = true;
  cfg.tol = 1e-11;
  cfg.mv_budget = 400000;
  const RunTrace trace = solve(t.p, cfg);
  if (trace.status != RunStatus::Converged) ++s.unconverged;

  std::vector<Vector> xs{trace.initial_x};
  for (const auto& x : trace.iterates) xs.push_back(x);
  std::vector<double> fs;
  for (const auto& x : xs) fs.push_back(exact_f(t, x));
  auto gap = [&](std::size_t j) { return fs[j] - t.f_star; };

  auto note = [&](double violation, long& count, long& bad) {
    ++count;
    s.worst_step = std::max(s.worst_step, violation);
    if (violation > 1e-10) ++bad;
  };

  for (const auto& x : xs) {
    const Vector g = t.a * x - t.p.b;
    note(compute_psi(x, g, t.p.tau, alpha).norm() - compute_phi(x, g, t.p.tau).norm(), s.philess,
         s.philess_bad);
  }

  Vector anchor = xs[0];
  bool in_phase = false;
  for (std::size_t j = 0; j < trace.records.size(); ++j) {
    const StepType type = trace.records[j].step;
    const Vector& xk = xs[j];
    const Vector& xn = xs[j + 1];
    const bool cg = type == StepType::CG || type == StepType::Cutback;
    if (cg && !in_phase) anchor = xk;
    in_phase = cg;
    switch (type) {
      case StepType::ISTA:
        note(gap(j + 1) - (1 - t.lambda * alpha) * gap(j), s.ista, s.ista_bad);
        break;
      case StepType::SubISTA:
        note(gap(j + 1) - (1 - 0.5 * t.lambda * alpha) * gap(j), s.subista, s.subista_bad);
        break;
      case StepType::CG: {
        const bool crossed = !same_sign_pattern(xn, anchor);
        if (!crossed && !same_sign_pattern(xk, anchor)) {
          // x^k left the orthant on an accepted crossing step; the decrease
          // argument needs x^k on the anchor orthant
          ++s.cg_skipped;
          break;
        }
        const Vector g = t.a * xk - t.p.b;
        const double v2 = compute_v(xk, g, t.p.tau).squaredNorm();
        note(fs[j + 1] - (fs[j] - beta * v2), s.cgstep, s.cgstep_bad);
        break;
      }
      default:
        break;
    }
  }

  const double rate = 1 - t.lambda * beta / 2;
  for (std::size_t k = 0; k + 2 < fs.size(); ++k) {
    const double violation = gap(k + 2) - rate * gap(k);
    ++s.recursion;
    s.worst_recursion = std::max(s.worst_recursion, violation);
    if (violation > 1e-10) ++s.recursion_bad;
  }

  const double eps = 1e-6;
  if (gap(0) > eps) {
    ++s.bound_runs;
    const double bound = std::log(eps / gap(0)) / std::log(std::sqrt(rate));
    std::int64_t mv = -1;
    for (std::size_t j = 0; j < trace.records.size(); ++j) {
      if (gap(j + 1) <= eps) {
        mv = trace.records[j].mv;
        break;
      }
    }
    if (mv < 0 || static_cast<double>(mv) > bound) {
      ++s.bound_bad;
    } else {
      s.bound_max_ratio = std::max(s.bound_max_ratio, mv / bound);
    }
  }
}

void theory_suite() {
  const auto t0 = Clock::now();
  const auto instances = theory_instances();
  TheoryStats s;
  for (const auto& t : instances) {
    theory_run(t, Algorithm::IICG1, s);
    theory_run(t, Algorithm::IICG2, s);
  }
  const double t = seconds_since(t0);
  std::ostringstream d2;
  d2 << "50 instances x {iiCG-1, iiCG-2}; violations ista " << s.ista_bad << "/" << s.ista
     << ", subista " << s.subista_bad << "/" << s.subista << ", philess " << s.philess_bad << "/"
     << s.philess << ", cgstep " << s.cgstep_bad << "/" << s.cgstep << " (" << s.cg_skipped
     << " CG steps from off-orthant x^k not applicable); worst excess " << fmt("%.2e", s.worst_step)
     << ", unconverged " << s.unconverged << ", " << fmt("%.1f", t) << " s";
  const bool steps_ok = s.ista_bad + s.subista_bad + s.philess_bad + s.cgstep_bad == 0 &&
                         s.ista > 0 && s.subista > 0 && s.cgstep > 0 && t < 60.0;
  report(2, "per-step decrease bounds", steps_ok, d2.str());

  std::ostringstream d3;
  d3 << s.recursion_bad << " violations over " << s.recursion << " two-step pairs, worst excess "
     << fmt("%.2e", s.worst_recursion);
  report(3, "two-step Q-linear recursion", s.recursion_bad == 0 && s.recursion > 0, d3.str());

  std::ostringstream d4;
  d4 << s.bound_bad << " of " << s.bound_runs
     << " runs exceed the MV bound at eps=1e-6; largest measured/bound ratio "
     << fmt("%.2e", s.bound_max_ratio);
  report(4, "MV complexity bound", s.bound_bad == 0 && s.bound_runs > 0, d4.str());
}

// ---------------------------------------------------------------- 5

void termination_suite() {
  const auto t0 = Clock::now();
  Rng rng(99);
  int runs = 0, converged = 0, v_ok = 0, sign_ok = 0, phase_ok = 0, no_phase = 0;
  double worst_v = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double cond = std::pow(10.0, 1 + 3 * rng.uniform());
    const Index nnz = 5 + static_cast<Index>(rng.uniform() * 56);
    const double tau = std::pow(10.0, -2 + 2 * rng.uniform());
    const auto inst = gen_strict_comp(100, nnz, cond, tau, 0.2, 7000 + i);
    const Matrix a = inst.problem.op.to_dense();
    const Vector sx = sgn(*inst.x_star);
    const double v0 = compute_v(Vector::Zero(100), -inst.problem.b, tau).lpNorm<Eigen::Infinity>();
    for (Algorithm alg : {Algorithm::IICG1, Algorithm::IICG2}) {
      ++runs;
      SolverConfig cfg;
      cfg.algorithm = alg;
      cfg.tol = 1e-10 / std::max(1.0, v0);  // absolute ||v||_inf <= 1e-10
      cfg.theory_checks = true;
      const RunTrace trace = solve(inst.problem, cfg);
      converged += trace.status == RunStatus::Converged;
      const Vector g = a * trace.final_x - inst.problem.b;
      const double v = compute_v(trace.final_x, g, tau).lpNorm<Eigen::Infinity>();
      worst_v = std::max(worst_v, v);
      v_ok += v <= 1e-10;
      sign_ok += sgn(trace.final_x) == sx;
      // last maximal run of CG/CUTBACK records
      long end = static_cast<long>(trace.records.size()) - 1;
      auto is_cg = [&](long j) {
        return trace.records[j].step == StepType::CG || trace.records[j].step == StepType::Cutback;
      };
      while (end >= 0 && !is_cg(end)) --end;
      if (end < 0) {
        ++no_phase;
        ++phase_ok;
        continue;
      }
      long begin = end;
      while (begin > 0 && is_cg(begin - 1)) --begin;
      bool constant = true;
      for (long j = begin; j <= end; ++j) {
        constant &= same_sign_pattern(trace.iterates[j], trace.iterates[begin]);
      }
      phase_ok += constant;
    }
  }
  std::ostringstream d;
  d << runs << " runs: converged " << converged << ", ||v||_inf <= 1e-10 " << v_ok << " (worst "
    << fmt("%.2e", worst_v) << "), sign pattern = sgn(x*) " << sign_ok
    << ", constant over last CG phase " << phase_ok << " (" << no_phase << " without CG), "
    << fmt("%.1f", seconds_since(t0)) << " s";
  report(5, "finite identification on strict-complementarity instances",
         converged == runs && v_ok == runs && sign_ok == runs && phase_ok == runs, d.str());
}

// ---------------------------------------------------------------- 6-8

std::vector<std::uint8_t> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void desk_suite_checks() {
  const fs::path dir_a = fs::absolute("desk_suite");
  const fs::path dir_b = fs::absolute("desk_suite_again");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const auto suite = desk_suite();
  materialize_suite(suite, dir_a);
  materialize_suite(suite, dir_b);
  const auto manifest = read_manifest(dir_a / "manifest.csv");

  auto t0 = Clock::now();
  const auto f_star = compute_f_stars(manifest, 1);
  std::cout << "  reference objectives for " << f_star.size() << " instances in "
            << fmt("%.1f", seconds_since(t0)) << " s\n";

  // 6: cross-agreement and SPD solves
  t0 = Clock::now();
  SuiteOptions opts;
  opts.tols = {1e-4, 1e-10};
  opts.f_star = f_star;
  const auto rows = run_suite(manifest, opts);
  {
    std::ofstream out("desk_bench.csv");
    write_bench_csv(out, rows);
  }
  std::map<std::string, bool> spd;
  for (const auto& e : manifest) spd[e.id] = is_spd_instance(e.meta);
  std::map<std::string, std::vector<const BenchResult*>> loose;
  int disagreements = 0, below_reference = 0, spd_failures = 0, spd_runs = 0, errors = 0;
  std::map<std::string, int> fails_1e10;
  for (const auto& r : rows) {
    errors += r.status == "Error";
    if (r.tol == 1e-4 && r.mv_to_tol) loose[r.problem].push_back(&r);
    if (r.tol == 1e-10) {
      if (!r.mv_to_tol) ++fails_1e10[r.solver];
      if (spd[r.problem] && (r.solver == "iicg1" || r.solver == "iicg2")) {
        ++spd_runs;
        if (!r.mv_to_tol) {
          ++spd_failures;
          std::cout << "  " << r.problem << " " << r.solver << " did not reach 1e-10 ("
                    << r.status << ")\n";
        }
      }
    }
  }
  for (const auto& [problem, list] : loose) {
    const double scale = std::max(std::abs(list.front()->f_star), 1.0);
    for (const auto* a : list) {
      if (a->final_f < a->f_star - 10 * 1e-4 * scale) ++below_reference;
      for (const auto* b : list) {
        if (std::abs(a->final_f - b->final_f) > 10 * 1e-4 * scale) ++disagreements;
      }
    }
  }
  std::ostringstream d6;
  d6 << manifest.size() << " instances; pairwise F disagreements at 1e-4: " << disagreements
     << ", below reference: " << below_reference << "; iiCG SPD runs solved at 1e-10: "
     << (spd_runs - spd_failures) << "/" << spd_runs << "; failures at 1e-10 by solver:";
  for (const char* s : {"iicg1", "iicg2", "fista", "istabb"}) d6 << " " << s << "=" << fails_1e10[s];
  d6 << "; " << fmt("%.1f", seconds_since(t0)) << " s";
  report(6, "solver cross-agreement on the desk suite",
         manifest.size() == 48 && errors == 0 && disagreements == 0 && below_reference == 0 &&
             spd_failures == 0 && spd_runs > 0,
         d6.str());

  // 7: alpha_bal sweep on the SPD instances
  t0 = Clock::now();
  std::vector<ManifestEntry> spd_manifest;
  for (const auto& e : manifest) {
    if (spd[e.id]) spd_manifest.push_back(e);
  }
  const auto sweep = alpha_sweep(spd_manifest, {1, 10, 100}, opts);
  {
    std::ofstream out("desk_sweep.csv");
    write_sweep_csv(out, sweep);
  }
  bool sweep_ok = sweep.size() == 3;
  std::ostringstream d7;
  d7 << spd_manifest.size() << " SPD instances;";
  for (const auto& r : sweep) {
    sweep_ok &= r.converged == r.attempted && std::isfinite(r.mean_inflation);
    d7 << " factor " << r.factor << ": " << r.converged << "/" << r.attempted
       << " converged, mean inflation " << fmt("%.3f", r.mean_inflation) << ";";
  }
  d7 << " " << fmt("%.1f", seconds_since(t0)) << " s";
  report(7, "alpha_bal sensitivity sweep", sweep_ok, d7.str());

  // 8: tooling
  std::vector<std::string> problems;
  const std::vector<BenchResult> table = [] {
    auto cell = [](const char* p, const char* s, std::int64_t mv) {
      BenchResult r;
      r.problem = p;
      r.solver = s;
      r.tol = 1e-4;
      r.mv_to_tol = mv;
      return r;
    };
    return std::vector<BenchResult>{cell("p1", "s1", 1), cell("p1", "s2", 2), cell("p2", "s1", 2),
                                    cell("p2", "s2", 2)};
  }();
  const auto prof = dolan_more(table, ProfileMetric::MV);
  const bool profile_ok = prof.curves.size() == 2 && prof.curves[0].rho_at(1) == 1.0 &&
                          prof.curves[1].rho_at(1) == 0.5 && prof.curves[1].rho_at(2) == 1.0;
  const std::vector<ParetoPoint> three{{0.05, 7}, {0.1, 4}, {0.2, 2}};
  const bool pareto_ok =
      pareto_frontier(three) == three &&
      pareto_frontier(std::vector<ParetoPoint>{{0.05, 4}, {0.05, 7}}) ==
          std::vector<ParetoPoint>{{0.05, 4}} &&
      pareto_frontier(std::vector<ParetoPoint>{{0.3, 9}}) == std::vector<ParetoPoint>{{0.3, 9}};
  int roundtrip_bad = 0, identical_bad = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    ++files;
    const auto name = entry.path().filename();
    const auto bytes = file_bytes(entry.path());
    if (bytes != file_bytes(dir_b / name)) ++identical_bad;
    if (entry.path().extension() == ".ql1p") {
      if (encode_problem(read_problem(entry.path())) != bytes) ++roundtrip_bad;
    }
  }
  for (const auto& e : manifest) {
    if (encode_problem(generate(e.meta).problem) != file_bytes(e.path)) ++roundtrip_bad;
  }
  std::ostringstream d8;
  d8 << "profile example " << (profile_ok ? "ok" : "WRONG") << ", pareto examples "
     << (pareto_ok ? "ok" : "WRONG") << ", QL1P roundtrip mismatches " << roundtrip_bad
     << ", differing files across two suite builds " << identical_bad << "/" << files;
  report(8, "benchmark tooling", profile_ok && pareto_ok && roundtrip_bad == 0 &&
                                     identical_bad == 0 && files == 49,
         d8.str());
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    prox_oracle();
    theory_suite();
    termination_suite();
    desk_suite_checks();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed; total %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
