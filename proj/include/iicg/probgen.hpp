#pragma once

#include "iicg/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace iicg {

/// SplitMix64 with Box-Muller normals. The exact sequence is part of the
/// problem-suite contract, so do not swap in <random> engines here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();  // [0, 1), 53 random bits
  double normal();   // cosine branch only; the sine partner is discarded

 private:
  std::uint64_t state_;
};

struct InstanceMeta {
  std::string family;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
};

struct GeneratedInstance {
  QuadraticProblem problem;
  std::optional<Vector> x_star;
  InstanceMeta meta;
};

/// 1/2||y - Bx||^2 + gamma||x||^2 + tau||x||_1 with B ~ N(0,1) (m x n) and
/// y = scale * N(0,1); canonical form A = B^T B + 2 gamma I, b = B^T y.
GeneratedInstance gen_elastic_net(Index m, Index n, double scale, double gamma, double tau,
                                  std::uint64_t seed);

/// Sparse +-1 spike signal, B ~ N(0,1)/sqrt(m), y = B s + noise.
GeneratedInstance gen_sigrec(Index m, Index n, Index signal_nnz, double noise_sigma,
                             double gamma, double tau, std::uint64_t seed);

/// Dense SPD instance with a known solution satisfying strict complementarity.
/// Spectrum is log-uniform in [1/cond_target, 1] (largest eigenvalue 1).
GeneratedInstance gen_strict_comp(Index n, Index nnz, double cond_target, double tau,
                                  double margin, std::uint64_t seed);

/// Error reading a QL1P file; `offset()` is the byte position of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

void write_problem(const std::filesystem::path& path, const QuadraticProblem& p);
QuadraticProblem read_problem(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_problem(const QuadraticProblem& p);
QuadraticProblem decode_problem(const std::vector<std::uint8_t>& bytes);

/// One row of a suite manifest CSV: `id,family,seed,params,path`, where
/// params is `key=value;key=value`.
struct ManifestEntry {
  std::string id;
  InstanceMeta meta;
  std::filesystem::path path;
};

GeneratedInstance generate(const InstanceMeta& meta);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& rows);

/// The 48-instance desk-scale suite: four families, each with three
/// conditioning regimes (s, i, m) and four tau values. Paths are relative
/// file names `<id>.ql1p`.
std::vector<ManifestEntry> desk_suite();

/// Writes every instance of `suite` under `dir` plus `dir/manifest.csv`.
void materialize_suite(const std::vector<ManifestEntry>& suite,
                       const std::filesystem::path& dir);

/// True for instances whose Hessian is positive definite by construction.
bool is_spd_instance(const InstanceMeta& meta);

}  // namespace iicg
