#include "iicg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace iicg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs `task(i)` for i in [0, count) on up to `threads` workers.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct LoadedProblem {
  std::optional<QuadraticProblem> problem;
  std::string error;
};

LoadedProblem load(const ManifestEntry& e) {
  try {
    return {read_problem(e.path), {}};
  } catch (const std::exception& ex) {
    return {std::nullopt, ex.what()};
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::map<std::string, double> compute_f_stars(const std::vector<ManifestEntry>& manifest,
                                              unsigned threads,
                                              const std::function<void(const std::string&)>& log) {
  std::vector<std::optional<double>> values(manifest.size());
  std::mutex log_mutex;
  parallel_for(manifest.size(), threads, [&](std::size_t i) {
    LoadedProblem lp = load(manifest[i]);
    if (!lp.problem) return;
    const ReferenceSolution ref = reference_objective(*lp.problem);
    values[i] = ref.f_star;
    if (log) {
      std::lock_guard lock(log_mutex);
      log(manifest[i].id + ": F* = " + format_double(ref.f_star) + " (" + to_string(ref.status) +
          ", " + std::to_string(ref.mv) + " MV)");
    }
  });
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (values[i]) out[manifest[i].id] = *values[i];
  }
  return out;
}

std::vector<BenchResult> run_suite(const std::vector<ManifestEntry>& manifest,
                                   const SuiteOptions& opts) {
  if (opts.solvers.empty() || opts.tols.empty()) {
    throw std::invalid_argument("run_suite needs at least one solver and one tolerance");
  }
  for (double tol : opts.tols) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  }
  const double tightest = *std::min_element(opts.tols.begin(), opts.tols.end());
  const std::size_t per_problem = opts.solvers.size() * opts.tols.size();
  std::vector<BenchResult> rows(manifest.size() * per_problem);
  std::mutex log_mutex;

  parallel_for(manifest.size() * opts.solvers.size(), opts.threads, [&](std::size_t cell) {
    const std::size_t pi = cell / opts.solvers.size();
    const std::size_t si = cell % opts.solvers.size();
    const ManifestEntry& entry = manifest[pi];
    const Algorithm algorithm = opts.solvers[si];
    auto slot = [&](std::size_t ti) -> BenchResult& {
      return rows[pi * per_problem + si * opts.tols.size() + ti];
    };
    auto fill_error = [&](const std::string& message) {
      for (std::size_t ti = 0; ti < opts.tols.size(); ++ti) {
        BenchResult& r = slot(ti);
        r.problem = entry.id;
        r.solver = to_string(algorithm);
        r.tol = opts.tols[ti];
        r.status = "Error";
        r.error = message;
        r.final_accuracy = std::numeric_limits<double>::quiet_NaN();
      }
    };

    LoadedProblem lp = load(entry);
    if (!lp.problem) {
      fill_error(lp.error);
      return;
    }
    double f_star = 0.0;
    if (auto it = opts.f_star.find(entry.id); it != opts.f_star.end()) {
      f_star = it->second;
    } else {
      f_star = reference_objective(*lp.problem).f_star;
    }

    SolverConfig cfg;
    cfg.algorithm = algorithm;
    cfg.tol = tightest;
    cfg.termination = ReferenceObjective{f_star};
    cfg.mv_budget = opts.mv_budget;
    RunTrace trace;
    try {
      trace = solve(*lp.problem, cfg);
    } catch (const std::exception& ex) {
      fill_error(ex.what());
      return;
    }

    for (std::size_t ti = 0; ti < opts.tols.size(); ++ti) {
      const double tol = opts.tols[ti];
      BenchResult& r = slot(ti);
      r.problem = entry.id;
      r.solver = to_string(algorithm);
      r.tol = tol;
      r.f_star = f_star;
      if (accuracy(trace.initial_f, f_star) <= tol) {
        r.mv_to_tol = trace.initial_mv;
        r.final_f = trace.initial_f;
        r.wall_time = 0.0;
      } else {
        for (const TraceRecord& rec : trace.records) {
          if (accuracy(rec.f, f_star) <= tol) {
            r.mv_to_tol = rec.mv;
            r.final_f = rec.f;
            r.wall_time = rec.seconds;
            break;
          }
        }
      }
      if (r.mv_to_tol) {
        r.status = "Converged";
      } else {
        r.status = to_string(trace.status);
        r.final_f = trace.final_f;
        r.wall_time = trace.seconds;
      }
      r.final_accuracy = accuracy(r.final_f, f_star);
    }
    if (opts.log) {
      std::lock_guard lock(log_mutex);
      std::ostringstream os;
      os << entry.id << ' ' << to_string(algorithm) << ": " << to_string(trace.status) << " after "
         << trace.total_mv << " MV";
      opts.log(os.str());
    }
  });
  return rows;
}

double ProfileCurve::rho_at(double theta) const {
  double rho = 0.0;
  for (const auto& p : points) {
    if (p.theta <= theta) rho = p.rho;
  }
  return rho;
}

Profile dolan_more(const std::vector<BenchResult>& table, ProfileMetric metric) {
  Profile profile;
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  std::set<double> tols;
  for (const auto& r : table) {
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) {
      solvers.push_back(r.solver);
    }
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) {
      problems.push_back(r.problem);
    }
    tols.insert(r.tol);
  }
  if (tols.size() > 1) throw std::invalid_argument("dolan_more: rows mix several tolerances");
  if (problems.empty()) throw std::invalid_argument("dolan_more: empty table");
  if (solvers.size() < 2) {
    profile.warnings.push_back("profile computed for a single solver");
  }

  // metric[p][s], +inf for failures and missing cells
  std::vector<std::vector<double>> values(problems.size(),
                                          std::vector<double>(solvers.size(), kInf));
  for (const auto& r : table) {
    const auto p = std::find(problems.begin(), problems.end(), r.problem) - problems.begin();
    const auto s = std::find(solvers.begin(), solvers.end(), r.solver) - solvers.begin();
    if (!r.mv_to_tol) continue;
    values[p][s] = metric == ProfileMetric::MV ? static_cast<double>(*r.mv_to_tol) : r.wall_time;
  }

  std::vector<std::vector<double>> ratios;  // per kept problem
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const double best = *std::min_element(values[p].begin(), values[p].end());
    if (best == kInf) {
      profile.warnings.push_back("problem " + problems[p] + " failed for every solver; excluded");
      continue;
    }
    std::vector<double> row;
    for (double v : values[p]) {
      if (v == kInf) {
        row.push_back(kInf);
      } else if (best <= 0.0) {
        row.push_back(v <= 0.0 ? 1.0 : kInf);
      } else {
        row.push_back(v / best);
      }
    }
    ratios.push_back(std::move(row));
  }
  profile.problems_used = ratios.size();

  std::set<double> breakpoints{1.0};
  for (const auto& row : ratios) {
    for (double r : row) {
      if (r != kInf) breakpoints.insert(r);
    }
  }
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    ProfileCurve curve{solvers[s], {}};
    for (double theta : breakpoints) {
      std::size_t hits = 0;
      for (const auto& row : ratios) hits += row[s] <= theta;
      const double rho =
          ratios.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ratios.size());
      curve.points.push_back({theta, std::log2(theta), rho});
    }
    profile.curves.push_back(std::move(curve));
  }
  return profile;
}

std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points) {
  std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return a.accuracy != b.accuracy ? a.accuracy < b.accuracy : a.nnz < b.nnz;
  });
  std::vector<ParetoPoint> frontier;
  for (const auto& p : points) {
    if (frontier.empty() || p.nnz < frontier.back().nnz) frontier.push_back(p);
  }
  return frontier;
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<TraceRecord>& records, double f_star) {
  std::vector<ParetoPoint> points;
  points.reserve(records.size());
  for (const auto& r : records) points.push_back({accuracy(r.f, f_star), r.nnz});
  return pareto_frontier(std::move(points));
}

std::vector<SweepRow> alpha_sweep(const std::vector<ManifestEntry>& manifest,
                                  const std::vector<double>& factors, const SuiteOptions& opts) {
  for (double f : factors) {
    if (!(f >= 1.0)) throw std::invalid_argument("alpha_sweep factors must be >= 1");
  }
  std::vector<double> all = factors;
  if (std::find(all.begin(), all.end(), 1.0) == all.end()) all.insert(all.begin(), 1.0);

  std::map<std::string, double> f_star = opts.f_star;
  std::vector<ManifestEntry> missing;
  for (const auto& e : manifest) {
    if (!f_star.count(e.id)) missing.push_back(e);
  }
  if (!missing.empty()) {
    for (auto& [id, v] : compute_f_stars(missing, opts.threads, opts.log)) f_star[id] = v;
  }

  // mv[factor][instance]
  std::vector<std::vector<std::int64_t>> mv(all.size(),
                                            std::vector<std::int64_t>(manifest.size(), -1));
  parallel_for(manifest.size(), opts.threads, [&](std::size_t pi) {
    const ManifestEntry& e = manifest[pi];
    auto it = f_star.find(e.id);
    if (it == f_star.end()) return;
    LoadedProblem lp = load(e);
    if (!lp.problem) return;
    CountingOperator probe = lp.problem->op.fresh();
    const double l_est = estimate_L(probe, 0);
    for (std::size_t fi = 0; fi < all.size(); ++fi) {
      SolverConfig cfg;
      cfg.algorithm = Algorithm::IICG2;
      cfg.tol = 1e-4;
      cfg.termination = ReferenceObjective{it->second};
      cfg.mv_budget = opts.mv_budget;
      cfg.alpha_bal = 1.0 / (all[fi] * l_est);
      const RunTrace trace = solve_iicg2(*lp.problem, cfg);
      if (trace.status == RunStatus::Converged) mv[fi][pi] = trace.total_mv;
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t fi = 0; fi < all.size(); ++fi) {
    if (std::find(factors.begin(), factors.end(), all[fi]) == factors.end()) continue;
    SweepRow row;
    row.factor = all[fi];
    row.attempted = manifest.size();
    row.mv = mv[fi];
    double sum = 0.0;
    bool failed = false;
    for (std::size_t pi = 0; pi < manifest.size(); ++pi) {
      if (mv[fi][pi] >= 0) ++row.converged;
      if (mv[fi][pi] < 0 || mv[0][pi] < 0) {
        failed = true;
        continue;
      }
      sum += static_cast<double>(mv[fi][pi]) / static_cast<double>(std::max<std::int64_t>(mv[0][pi], 1));
    }
    row.mean_inflation =
        failed || manifest.empty() ? kInf : sum / static_cast<double>(manifest.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::pair<int, int>> cg_phase_histogram(const std::vector<TraceRecord>& records) {
  std::vector<std::pair<int, int>> phases;
  bool in_phase = false;
  for (const auto& r : records) {
    const bool cg = r.step == StepType::CG || r.step == StepType::Cutback;
    if (!cg) {
      in_phase = false;
      continue;
    }
    if (!in_phase) {
      phases.emplace_back(static_cast<int>(phases.size()) + 1, 0);
      in_phase = true;
    }
    ++phases.back().second;
  }
  return phases;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows) {
  out << "problem,solver,tol,mv,seconds,accuracy,status\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << r.solver << ',' << format_double(r.tol) << ','
        << (r.mv_to_tol ? std::to_string(*r.mv_to_tol) : std::string("FAIL")) << ','
        << format_double(r.wall_time) << ',' << format_double(r.final_accuracy) << ',' << r.status
        << '\n';
  }
}

std::vector<BenchResult> read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("problem,solver,tol,mv,seconds,accuracy,status", 0) != 0) {
    throw std::runtime_error("bench CSV: missing header");
  }
  std::vector<BenchResult> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 7) {
      throw std::runtime_error("bench CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    BenchResult r;
    r.problem = cols[0];
    r.solver = cols[1];
    r.tol = std::stod(cols[2]);
    if (cols[3] != "FAIL") r.mv_to_tol = std::stoll(cols[3]);
    r.wall_time = std::stod(cols[4]);
    r.final_accuracy = std::stod(cols[5]);
    r.status = cols[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "solver,log2_theta,rho\n";
  for (const auto& c : profile.curves) {
    for (const auto& p : c.points) {
      out << c.solver << ',' << format_double(p.log2_theta) << ',' << format_double(p.rho) << '\n';
    }
  }
}

void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& frontier) {
  out << "accuracy,nnz\n";
  for (const auto& p : frontier) out << format_double(p.accuracy) << ',' << p.nnz << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "factor,mean_inflation\n";
  for (const auto& r : rows) {
    out << format_double(r.factor) << ',' << format_double(r.mean_inflation) << '\n';
  }
}

}  // namespace iicg
