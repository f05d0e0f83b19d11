#include "iicg/bench.hpp"
#include "iicg/probgen.hpp"
#include "iicg/solvers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using namespace iicg;

constexpr int kOk = 0;
constexpr int kRowError = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("bad --param '" + item + "', want key=value");
    try {
      params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad --param value in '" + item + "'");
    }
  }
  return params;
}

std::vector<Algorithm> parse_solvers(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_algorithm(n));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

/// Optional `problem,f_star` CSV with precomputed reference values.
std::map<std::string, double> read_fstar_csv(const std::string& path) {
  std::map<std::string, double> out;
  if (path.empty()) return out;
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad F* row: " + line);
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

void log_stderr(const std::string& msg) { std::cerr << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interleaved ISTA-CG solvers for quadratic l1 problems"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate one instance or the desk-scale suite");
  std::string gen_family, gen_out, gen_suite;
  std::vector<std::string> gen_params;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family, "elastic_net, sigrec or strict_comp");
  gen->add_option("--param", gen_params, "Generator parameter key=value (repeatable)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output QL1P file");
  gen->add_option("--suite", gen_suite, "Write the desk-scale suite and manifest.csv to this directory");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  std::string solve_problem, solve_alg = "iicg2", solve_mode = "subgrad", solve_trace;
  double solve_tol = 1e-6;
  std::optional<double> solve_fstar, solve_alpha_bal;
  std::int64_t solve_budget = 50000;
  solve_cmd->add_option("--problem", solve_problem, "QL1P file")->required();
  solve_cmd->add_option("--algorithm", solve_alg, "iicg1, iicg2, fista or istabb");
  solve_cmd->add_option("--tol", solve_tol, "Termination tolerance");
  solve_cmd->add_option("--mode", solve_mode, "subgrad or fstar");
  solve_cmd->add_option("--fstar", solve_fstar, "Reference objective for --mode fstar");
  solve_cmd->add_option("--alpha-bal", solve_alpha_bal, "Steplength used in the balance test");
  solve_cmd->add_option("--budget", solve_budget, "MV budget");
  solve_cmd->add_option("--trace-out", solve_trace, "Trace CSV output");

  // fstar
  auto* fstar_cmd = app.add_subcommand("fstar", "High-accuracy reference objective");
  std::string fstar_problem, fstar_manifest, fstar_out;
  unsigned fstar_threads = 1;
  fstar_cmd->add_option("--problem", fstar_problem, "QL1P file");
  fstar_cmd->add_option("--manifest", fstar_manifest, "Suite manifest (writes problem,f_star CSV)");
  fstar_cmd->add_option("--out", fstar_out, "CSV output for --manifest");
  fstar_cmd->add_option("--threads", fstar_threads, "Worker threads");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run every solver on a manifest");
  std::string bench_manifest, bench_out, bench_fstar;
  std::vector<std::string> bench_solvers{"iicg1", "iicg2", "fista", "istabb"};
  std::vector<double> bench_tols{1e-4, 1e-10};
  std::int64_t bench_budget = 50000;
  unsigned bench_threads = 1;
  bench_cmd->add_option("--manifest", bench_manifest, "Suite manifest CSV")->required();
  bench_cmd->add_option("--solvers", bench_solvers, "Solvers")->delimiter(',');
  bench_cmd->add_option("--tols", bench_tols, "Accuracy targets")->delimiter(',');
  bench_cmd->add_option("--budget", bench_budget, "MV budget per run");
  bench_cmd->add_option("--threads", bench_threads, "Worker threads");
  bench_cmd->add_option("--fstar-csv", bench_fstar, "Precomputed problem,f_star CSV");
  bench_cmd->add_option("--out", bench_out, "Bench CSV output")->required();

  // profile
  auto* profile_cmd = app.add_subcommand("profile", "Dolan-More profile from a bench CSV");
  std::string profile_in, profile_out, profile_metric = "mv";
  std::optional<double> profile_tol;
  profile_cmd->add_option("--bench", profile_in, "Bench CSV")->required();
  profile_cmd->add_option("--tol", profile_tol, "Tolerance to profile (required if several)");
  profile_cmd->add_option("--metric", profile_metric, "mv or time");
  profile_cmd->add_option("--out", profile_out, "Profile CSV output")->required();

  // pareto
  auto* pareto_cmd = app.add_subcommand("pareto", "Accuracy/sparsity frontier of a trace");
  std::string pareto_trace, pareto_out;
  double pareto_fstar = 0.0;
  pareto_cmd->add_option("--trace", pareto_trace, "Trace CSV")->required();
  pareto_cmd->add_option("--fstar", pareto_fstar, "Reference objective")->required();
  pareto_cmd->add_option("--out", pareto_out, "Frontier CSV output")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "alpha_bal sensitivity of iiCG-2");
  std::string sweep_manifest, sweep_out, sweep_fstar;
  std::vector<double> sweep_factors{1, 10, 100};
  std::int64_t sweep_budget = 50000;
  unsigned sweep_threads = 1;
  sweep_cmd->add_option("--manifest", sweep_manifest, "Suite manifest CSV")->required();
  sweep_cmd->add_option("--factors", sweep_factors, "Factors >= 1")->delimiter(',');
  sweep_cmd->add_option("--budget", sweep_budget, "MV budget per run");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads");
  sweep_cmd->add_option("--fstar-csv", sweep_fstar, "Precomputed problem,f_star CSV");
  sweep_cmd->add_option("--out", sweep_out, "Sweep CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) {
      if (!gen_suite.empty()) {
        materialize_suite(desk_suite(), gen_suite);
        std::cout << "wrote " << desk_suite().size() << " instances to " << gen_suite << '\n';
        return kOk;
      }
      if (gen_family.empty() || gen_out.empty()) throw UsageError("gen needs --family and --out (or --suite)");
      InstanceMeta meta{gen_family, gen_seed, parse_params(gen_params)};
      GeneratedInstance inst = [&] {
        try {
          return generate(meta);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }();
      write_problem(gen_out, inst.problem);
      std::cout << "wrote " << gen_out << " (n=" << inst.problem.n() << ")\n";
      return kOk;
    }

    if (*solve_cmd) {
      SolverConfig cfg;
      cfg.algorithm = parse_solvers({solve_alg}).front();
      cfg.tol = solve_tol;
      cfg.mv_budget = solve_budget;
      cfg.alpha_bal = solve_alpha_bal;
      if (solve_mode == "fstar") {
        if (!solve_fstar) throw UsageError("--mode fstar needs --fstar");
        cfg.termination = ReferenceObjective{*solve_fstar};
      } else if (solve_mode != "subgrad") {
        throw UsageError("--mode must be subgrad or fstar");
      }
      try {
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const QuadraticProblem p = read_problem(solve_problem);
      const RunTrace trace = solve(p, cfg);
      if (!solve_trace.empty()) {
        auto out = open_out(solve_trace);
        write_trace_csv(out, trace);
      }
      std::cout << std::setprecision(17) << "status " << to_string(trace.status) << "\nF "
                << trace.final_f << "\nmv " << trace.total_mv << "\nnnz "
                << count_nonzeros(trace.final_x) << "\nv_inf " << trace.final_v_inf << '\n';
      return kOk;
    }

    if (*fstar_cmd) {
      if (!fstar_problem.empty()) {
        const ReferenceSolution ref = reference_objective(read_problem(fstar_problem));
        std::cout << std::setprecision(17) << ref.f_star << '\n';
        std::cerr << to_string(ref.status) << " after " << ref.mv << " MV\n";
        return kOk;
      }
      if (fstar_manifest.empty() || fstar_out.empty()) {
        throw UsageError("fstar needs --problem, or --manifest with --out");
      }
      const auto manifest = read_manifest(fstar_manifest);
      const auto values = compute_f_stars(manifest, fstar_threads, log_stderr);
      auto out = open_out(fstar_out);
      out << "problem,f_star\n";
      for (const auto& e : manifest) {
        if (auto it = values.find(e.id); it != values.end()) out << e.id << ',' << it->second << '\n';
      }
      return values.size() == manifest.size() ? kOk : kRowError;
    }

    if (*bench_cmd) {
      SuiteOptions opts;
      opts.solvers = parse_solvers(bench_solvers);
      opts.tols = bench_tols;
      opts.mv_budget = bench_budget;
      opts.threads = bench_threads;
      opts.f_star = read_fstar_csv(bench_fstar);
      opts.log = log_stderr;
      const auto rows = run_suite(read_manifest(bench_manifest), opts);
      auto out = open_out(bench_out);
      write_bench_csv(out, rows);
      bool errors = false;
      for (const auto& r : rows) {
        if (r.status == "Error") {
          std::cerr << r.problem << ' ' << r.solver << ": " << r.error << '\n';
          errors = true;
        }
      }
      return errors ? kRowError : kOk;
    }

    if (*profile_cmd) {
      ProfileMetric metric;
      if (profile_metric == "mv") {
        metric = ProfileMetric::MV;
      } else if (profile_metric == "time") {
        metric = ProfileMetric::Time;
      } else {
        throw UsageError("--metric must be mv or time");
      }
      auto in = open_in(profile_in);
      auto rows = read_bench_csv(in);
      std::set<double> tols;
      for (const auto& r : rows) tols.insert(r.tol);
      if (!profile_tol) {
        if (tols.size() != 1) throw UsageError("bench CSV has several tolerances; pass --tol");
        profile_tol = *tols.begin();
      }
      std::erase_if(rows, [&](const BenchResult& r) { return r.tol != *profile_tol; });
      if (rows.empty()) throw UsageError("no rows at the requested tolerance");
      const Profile profile = dolan_more(rows, metric);
      for (const auto& w : profile.warnings) std::cerr << "warning: " << w << '\n';
      auto out = open_out(profile_out);
      write_profile_csv(out, profile);
      return kOk;
    }

    if (*pareto_cmd) {
      auto in = open_in(pareto_trace);
      const auto records = read_trace_csv(in);
      if (records.empty()) throw std::runtime_error("trace has no records");
      auto out = open_out(pareto_out);
      write_pareto_csv(out, pareto_frontier(records, pareto_fstar));
      return kOk;
    }

    if (*sweep_cmd) {
      SuiteOptions opts;
      opts.mv_budget = sweep_budget;
      opts.threads = sweep_threads;
      opts.f_star = read_fstar_csv(sweep_fstar);
      opts.log = log_stderr;
      std::vector<SweepRow> rows;
      try {
        rows = alpha_sweep(read_manifest(sweep_manifest), sweep_factors, opts);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      auto out = open_out(sweep_out);
      write_sweep_csv(out, rows);
      for (const auto& r : rows) {
        if (r.converged != r.attempted) return kRowError;
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRowError;
  }
  return kUsage;
}
