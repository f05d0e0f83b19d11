#pragma once

#include "iicg/probgen.hpp"
#include "iicg/solvers.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iicg {

/// One cell of the benchmark table. `mv_to_tol` is empty for failures.
struct BenchResult {
  std::string problem;
  std::string solver;
  double tol = 0.0;
  std::optional<std::int64_t> mv_to_tol;
  double wall_time = 0.0;
  double final_accuracy = 0.0;
  std::string status;  // Converged, BudgetExhausted, Stalled or Error
  // not serialized:
  double final_f = 0.0;
  double f_star = 0.0;
  std::string error;
};

struct SuiteOptions {
  std::vector<Algorithm> solvers{Algorithm::IICG1, Algorithm::IICG2, Algorithm::FISTA,
                                 Algorithm::ISTABB};
  std::vector<double> tols{1e-4, 1e-10};
  std::int64_t mv_budget = 50000;
  unsigned threads = 1;
  // per-problem reference objectives; missing ones are computed
  std::map<std::string, double> f_star;
  std::function<void(const std::string&)> log;
};

/// Reference objective for every manifest entry (by id). Entries whose file
/// cannot be read are skipped.
std::map<std::string, double> compute_f_stars(const std::vector<ManifestEntry>& manifest,
                                              unsigned threads = 1,
                                              const std::function<void(const std::string&)>& log = {});

/// Runs every (problem, solver) once to the tightest tolerance and reads the
/// MV count for each tolerance off the trace, which gives the same numbers
/// as separate runs per tolerance.
std::vector<BenchResult> run_suite(const std::vector<ManifestEntry>& manifest,
                                   const SuiteOptions& opts);

enum class ProfileMetric { MV, Time };

struct ProfilePoint {
  double theta = 1.0;
  double log2_theta = 0.0;
  double rho = 0.0;
};

struct ProfileCurve {
  std::string solver;
  std::vector<ProfilePoint> points;

  /// rho(theta) evaluated from the step function.
  double rho_at(double theta) const;
};

struct Profile {
  std::vector<ProfileCurve> curves;
  std::vector<std::string> warnings;
  std::size_t problems_used = 0;
};

/// Dolan-More performance profile over rows sharing one tolerance. Failures
/// count as an infinite ratio; problems where every solver fails are dropped
/// with a warning.
Profile dolan_more(const std::vector<BenchResult>& table, ProfileMetric metric);

struct ParetoPoint {
  double accuracy = 0.0;
  std::int64_t nnz = 0;
  bool operator==(const ParetoPoint&) const = default;
};

/// Non-dominated (accuracy, nnz) pairs over all records, accuracy ascending.
std::vector<ParetoPoint> pareto_frontier(const std::vector<TraceRecord>& records, double f_star);
std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points);

struct SweepRow {
  double factor = 1.0;
  double mean_inflation = 0.0;
  std::size_t converged = 0;
  std::size_t attempted = 0;
  std::vector<std::int64_t> mv;  // per instance, -1 on failure
};

/// iiCG-2 at tol 1e-4 with alpha_bal = 1/(factor * L_est) for each factor.
/// Inflation is relative to factor 1 (run as the baseline if not listed).
std::vector<SweepRow> alpha_sweep(const std::vector<ManifestEntry>& manifest,
                                  const std::vector<double>& factors, const SuiteOptions& opts);

/// (phase index, CG steps) for each run of CG/CUTBACK records.
std::vector<std::pair<int, int>> cg_phase_histogram(const std::vector<TraceRecord>& records);

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows);
std::vector<BenchResult> read_bench_csv(std::istream& in);
void write_profile_csv(std::ostream& out, const Profile& profile);
void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& frontier);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace iicg
