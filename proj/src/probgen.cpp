#include "iicg/probgen.hpp"

#include "iicg/subgradient.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace iicg {

std::uint64_t Rng::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void check_dims(Index m, Index n) {
  if (m < 1 || n < 1) throw std::invalid_argument("dimensions must be >= 1");
  const auto um = static_cast<std::uint64_t>(m);
  const auto un = static_cast<std::uint64_t>(n);
  if (um > kMaxElements / un) {
    throw std::invalid_argument("dimensions " + std::to_string(m) + "x" + std::to_string(n) +
                                " are too large");
  }
}

RowMatrix normal_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  RowMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = scale * rng.normal();
  }
  return out;
}

// First k entries of a partial Fisher-Yates shuffle of 0..n-1.
std::vector<Index> sample_positions(Rng& rng, Index n, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto span = static_cast<double>(n - i);
    Index j = i + static_cast<Index>(rng.uniform() * span);
    if (j >= n) j = n - 1;
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

GeneratedInstance factored_instance(RowMatrix b_mat, const Vector& y, double gamma, double tau) {
  Vector rhs = b_mat.transpose() * y;
  CountingOperator op(FactoredOperator{std::move(b_mat), gamma});
  return {QuadraticProblem(std::move(op), std::move(rhs), tau), std::nullopt, {}};
}

}  // namespace

GeneratedInstance gen_elastic_net(Index m, Index n, double scale, double gamma, double tau,
                                  std::uint64_t seed) {
  check_dims(m, n);
  if (!(gamma >= 0.0) || !(tau >= 0.0)) {
    throw std::invalid_argument("gamma and tau must be nonnegative");
  }
  Rng rng(seed);
  RowMatrix b_mat = normal_matrix(rng, m, n);
  Vector y(m);
  for (Index i = 0; i < m; ++i) y[i] = scale * rng.normal();
  GeneratedInstance out = factored_instance(std::move(b_mat), y, gamma, tau);
  out.meta = {"elastic_net",
              seed,
              {{"m", double(m)}, {"n", double(n)}, {"scale", scale}, {"gamma", gamma}, {"tau", tau}}};
  return out;
}

GeneratedInstance gen_sigrec(Index m, Index n, Index signal_nnz, double noise_sigma,
                             double gamma, double tau, std::uint64_t seed) {
  check_dims(m, n);
  if (m > n) throw std::invalid_argument("sigrec requires m <= n");
  if (signal_nnz < 0 || signal_nnz > n) throw std::invalid_argument("signal_nnz out of range");
  if (!(gamma >= 0.0) || !(tau >= 0.0) || !(noise_sigma >= 0.0)) {
    throw std::invalid_argument("gamma, tau and noise_sigma must be nonnegative");
  }
  Rng rng(seed);
  Vector signal = Vector::Zero(n);
  for (Index pos : sample_positions(rng, n, signal_nnz)) {
    signal[pos] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  RowMatrix b_mat = normal_matrix(rng, m, n, 1.0 / std::sqrt(static_cast<double>(m)));
  Vector y = b_mat * signal;
  for (Index i = 0; i < m; ++i) y[i] += noise_sigma * rng.normal();
  GeneratedInstance out = factored_instance(std::move(b_mat), y, gamma, tau);
  out.meta = {"sigrec",
              seed,
              {{"m", double(m)},
               {"n", double(n)},
               {"nnz", double(signal_nnz)},
               {"noise", noise_sigma},
               {"gamma", gamma},
               {"tau", tau}}};
  return out;
}

GeneratedInstance gen_strict_comp(Index n, Index nnz, double cond_target, double tau,
                                  double margin, std::uint64_t seed) {
  check_dims(n, n);
  if (nnz < 0 || nnz > n) throw std::invalid_argument("nnz out of range");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("margin must be in (0,1)");
  if (!(cond_target >= 1.0)) throw std::invalid_argument("cond_target must be >= 1");

  Rng rng(seed);
  const Matrix gauss = normal_matrix(rng, n, n);
  const Matrix q = Eigen::HouseholderQR<Matrix>(gauss).householderQ();

  // top and bottom of the spectrum pinned so the condition number is exact
  Vector spectrum(n);
  for (Index i = 0; i < n; ++i) {
    double u = 0.0;
    if (i == n - 1 && n > 1) {
      u = 1.0;
    } else if (i > 0) {
      u = rng.uniform();
    }
    spectrum[i] = std::pow(cond_target, -u);
  }
  Matrix a = q * spectrum.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();

  Vector x_star = Vector::Zero(n);
  for (Index pos : sample_positions(rng, n, nnz)) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    x_star[pos] = sign * (0.5 + rng.uniform());
  }
  Vector u(n);
  for (Index i = 0; i < n; ++i) {
    if (x_star[i] != 0.0) {
      u[i] = sgn(x_star[i]);
    } else {
      u[i] = (1.0 - margin) * (2.0 * rng.uniform() - 1.0);
    }
  }
  Vector b = a * x_star + tau * u;

  GeneratedInstance out{QuadraticProblem(CountingOperator(DenseOperator{std::move(a)}),
                                         std::move(b), tau),
                        std::move(x_star),
                        {"strict_comp",
                         seed,
                         {{"n", double(n)},
                          {"nnz", double(nnz)},
                          {"cond", cond_target},
                          {"tau", tau},
                          {"margin", margin}}}};
  return out;
}

// ---------------------------------------------------------------------------
// QL1P format

namespace {

constexpr std::uint8_t kMagic[4] = {0x51, 0x4C, 0x31, 0x50};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    T value;
    std::memcpy(&value, raw, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void need(std::uint64_t count) const {
    if (bytes_.size() - pos_ < count) {
      throw FormatError("truncated QL1P data: need " + std::to_string(count) + " more bytes, " +
                            std::to_string(bytes_.size() - pos_) + " available",
                        pos_);
    }
  }

  std::uint64_t pos() const { return pos_; }
  std::uint64_t size() const { return bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_problem(const QuadraticProblem& p) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(p.op.kind()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.n()));
  if (const auto* d = p.op.dense()) {
    for (Index i = 0; i < d->a.rows(); ++i) {
      for (Index j = 0; j < d->a.cols(); ++j) put<double>(out, d->a(i, j));
    }
  } else {
    const auto* f = p.op.factored();
    put<std::uint64_t>(out, static_cast<std::uint64_t>(f->b.rows()));
    for (Index i = 0; i < f->b.rows(); ++i) {
      for (Index j = 0; j < f->b.cols(); ++j) put<double>(out, f->b(i, j));
    }
    put<double>(out, f->gamma);
  }
  for (Index i = 0; i < p.b.size(); ++i) put<double>(out, p.b[i]);
  put<double>(out, p.tau);
  return out;
}

QuadraticProblem decode_problem(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  for (std::uint8_t expected : kMagic) {
    const std::uint64_t at = in.pos();
    if (in.get<std::uint8_t>() != expected) throw FormatError("bad QL1P magic", at);
  }
  {
    const std::uint64_t at = in.pos();
    const auto version = in.get<std::uint32_t>();
    if (version != kVersion) {
      throw FormatError("unsupported QL1P version " + std::to_string(version), at);
    }
  }
  const std::uint64_t kind_at = in.pos();
  const auto kind = in.get<std::uint8_t>();
  if (kind > 1) throw FormatError("unknown operator kind " + std::to_string(kind), kind_at);
  const std::uint64_t n_at = in.pos();
  const auto n = in.get<std::uint64_t>();
  if (n == 0 || n > kMaxElements) throw FormatError("invalid dimension n", n_at);

  std::uint64_t m = 0;
  std::uint64_t matrix_values = 0;
  if (kind == 0) {
    if (n > kMaxElements / n) throw FormatError("dense dimension too large", n_at);
    matrix_values = n * n;
  } else {
    const std::uint64_t m_at = in.pos();
    m = in.get<std::uint64_t>();
    if (m == 0 || m > kMaxElements / n) throw FormatError("invalid dimension m", m_at);
    matrix_values = m * n;
  }
  const std::uint64_t trailing = (matrix_values + (kind == 1 ? 1 : 0) + n + 1) * 8;
  const std::uint64_t expected = in.pos() + trailing;
  if (in.size() != expected) {
    throw FormatError("QL1P length mismatch: expected " + std::to_string(expected) +
                          " bytes, file has " + std::to_string(in.size()),
                      std::min<std::uint64_t>(in.size(), expected));
  }

  const auto ni = static_cast<Index>(n);
  CountingOperator op;
  if (kind == 0) {
    Matrix a(ni, ni);
    for (Index i = 0; i < ni; ++i) {
      for (Index j = 0; j < ni; ++j) a(i, j) = in.get<double>();
    }
    op = CountingOperator(DenseOperator{std::move(a)});
  } else {
    RowMatrix b_mat(static_cast<Index>(m), ni);
    for (Index i = 0; i < b_mat.rows(); ++i) {
      for (Index j = 0; j < ni; ++j) b_mat(i, j) = in.get<double>();
    }
    const std::uint64_t gamma_at = in.pos();
    const double gamma = in.get<double>();
    if (!(gamma >= 0.0)) throw FormatError("negative gamma", gamma_at);
    op = CountingOperator(FactoredOperator{std::move(b_mat), gamma});
  }
  Vector b(ni);
  for (Index i = 0; i < ni; ++i) b[i] = in.get<double>();
  const std::uint64_t tau_at = in.pos();
  const double tau = in.get<double>();
  if (!(tau >= 0.0)) throw FormatError("negative tau", tau_at);
  return QuadraticProblem(std::move(op), std::move(b), tau);
}

void write_problem(const std::filesystem::path& path, const QuadraticProblem& p) {
  const auto bytes = encode_problem(p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

QuadraticProblem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_problem(bytes);
}

// ---------------------------------------------------------------------------
// Manifests and the desk-scale suite

namespace {

double param(const InstanceMeta& meta, const std::string& key) {
  auto it = meta.params.find(key);
  if (it == meta.params.end()) {
    throw std::invalid_argument(meta.family + ": missing parameter '" + key + "'");
  }
  return it->second;
}

Index int_param(const InstanceMeta& meta, const std::string& key) {
  const double v = param(meta, key);
  if (v != std::floor(v) || v < 0 || v > 1e12) {
    throw std::invalid_argument(meta.family + ": parameter '" + key + "' must be an integer");
  }
  return static_cast<Index>(v);
}

std::string format_params(const std::map<std::string, double>& params) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, v] : params) {
    os << (first ? "" : ";") << k << '=' << v;
    first = false;
  }
  return os.str();
}

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad parameter '" + item + "'");
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return out;
}

}  // namespace

GeneratedInstance generate(const InstanceMeta& meta) {
  if (meta.family == "elastic_net") {
    return gen_elastic_net(int_param(meta, "m"), int_param(meta, "n"), param(meta, "scale"),
                           param(meta, "gamma"), param(meta, "tau"), meta.seed);
  }
  if (meta.family == "sigrec") {
    return gen_sigrec(int_param(meta, "m"), int_param(meta, "n"), int_param(meta, "nnz"),
                      param(meta, "noise"), param(meta, "gamma"), param(meta, "tau"), meta.seed);
  }
  if (meta.family == "strict_comp") {
    return gen_strict_comp(int_param(meta, "n"), int_param(meta, "nnz"), param(meta, "cond"),
                           param(meta, "tau"), param(meta, "margin"), meta.seed);
  }
  throw std::invalid_argument("unknown problem family '" + meta.family + "'");
}

bool is_spd_instance(const InstanceMeta& meta) {
  if (meta.family == "strict_comp") return true;
  auto it = meta.params.find("gamma");
  return it != meta.params.end() && it->second > 0.0;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> rows;
  std::string line;
  std::getline(in, line);
  if (line.rfind("id,family,seed,params,path", 0) != 0) {
    throw std::runtime_error("manifest " + path.string() + ": unexpected header '" + line + "'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 5) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected 5 columns");
    }
    ManifestEntry e;
    e.id = cols[0];
    e.meta.family = cols[1];
    e.meta.seed = std::stoull(cols[2]);
    e.meta.params = parse_params(cols[3]);
    e.path = cols[4];
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    rows.push_back(std::move(e));
  }
  return rows;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "id,family,seed,params,path\n";
  for (const auto& e : rows) {
    out << e.id << ',' << e.meta.family << ',' << e.meta.seed << ','
        << format_params(e.meta.params) << ',' << e.path.string() << '\n';
  }
}

std::vector<ManifestEntry> desk_suite() {
  std::vector<ManifestEntry> suite;
  auto add = [&](const std::string& id, InstanceMeta meta) {
    suite.push_back({id, std::move(meta), id + ".ql1p"});
  };
  const char regimes[3] = {'s', 'i', 'm'};

  // myrand: B ~ N(0,1) 250x500, y = 2000 N(0,1)
  {
    const double gammas[3] = {0.0, 1e-3, 1.0};
    const double taus[3][4] = {{50, 500, 5e3, 5e4}, {0.05, 50, 5e3, 5e4}, {0.05, 50, 5e3, 5e4}};
    for (int r = 0; r < 3; ++r) {
      for (int t = 0; t < 4; ++t) {
        add("myrand" + std::string(1, regimes[r]) + std::to_string(t + 1),
            {"elastic_net",
             1000u + static_cast<std::uint64_t>(r),
             {{"m", 250}, {"n", 500}, {"scale", 2000}, {"gamma", gammas[r]}, {"tau", taus[r][t]}}});
      }
    }
  }
  // sigrec: 256 measurements of a 1024-long signal with 40 spikes
  {
    const double gammas[3] = {0.0, 1e-6, 1e-3};
    const double taus[3][4] = {{5e-5, 2e-4, 5e-3, 1e-1},
                               {5e-8, 5e-5, 2e-4, 1e-1},
                               {4.5e-7, 1e-4, 2e-3, 1e-1}};
    for (int r = 0; r < 3; ++r) {
      for (int t = 0; t < 4; ++t) {
        add("sigrec" + std::string(1, regimes[r]) + std::to_string(t + 1),
            {"sigrec",
             2000u + static_cast<std::uint64_t>(r),
             {{"m", 256},
              {"n", 1024},
              {"nnz", 40},
              {"noise", 0.01},
              {"gamma", gammas[r]},
              {"tau", taus[r][t]}}});
      }
    }
  }
  // scomp: dense SPD with a planted strictly complementary solution
  {
    const double conds[3] = {1e6, 1e4, 1e2};
    const double nnzs[4] = {375, 250, 100, 25};
    const double taus[4] = {1e-3, 1e-2, 1e-1, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int t = 0; t < 4; ++t) {
        add("scomp" + std::string(1, regimes[r]) + std::to_string(t + 1),
            {"strict_comp",
             3000u + static_cast<std::uint64_t>(10 * r + t),
             {{"n", 500}, {"nnz", nnzs[t]}, {"cond", conds[r]}, {"tau", taus[t]}, {"margin", 0.2}}});
      }
    }
  }
  // enet: small-scale regression data in the style of a Newton subproblem
  {
    const double gammas[3] = {0.0, 1e-4, 1e-2};
    const double taus[4] = {1e-2, 1e-1, 1.0, 10.0};
    for (int r = 0; r < 3; ++r) {
      for (int t = 0; t < 4; ++t) {
        add("enet" + std::string(1, regimes[r]) + std::to_string(t + 1),
            {"elastic_net",
             4000u + static_cast<std::uint64_t>(r),
             {{"m", 200}, {"n", 500}, {"scale", 1}, {"gamma", gammas[r]}, {"tau", taus[t]}}});
      }
    }
  }
  return suite;
}

void materialize_suite(const std::vector<ManifestEntry>& suite,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& e : suite) {
    const auto target = e.path.is_absolute() ? e.path : dir / e.path;
    write_problem(target, generate(e.meta).problem);
  }
  write_manifest(dir / "manifest.csv", suite);
}

}  // namespace iicg
