#ifndef NNMG_BENCH_HPP
#define NNMG_BENCH_HPP

#include <nnmg/metrics.hpp>
#include <nnmg/multigrid.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nnmg
{

inline constexpr const char *bench_schema = "nnmg-bench/1";

/// Raised for invalid benchmark configurations.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Raised when CG fails to converge or detects indefiniteness.
class SolverFailure : public Error
{
public:
  using Error::Error;
};

const std::vector<std::string> &bench_cases();

struct BenchmarkConfig
{
  std::string case_name;
  /// 0 selects the case default (2, or 3 for the 3D cases).
  unsigned int dim = 0;
  /// 0 runs every degree 1..4.
  unsigned int degree = 0;
  /// Hierarchies with 2..n_levels geometric levels are run.
  unsigned int n_levels = 3;
  int n_ranks = 1;
  PartitionPolicy policy = PartitionPolicy::default_sfc;
  CgSettings cg;
  ChebyshevSettings smoother;
  unsigned int m1 = 1;
  unsigned int m2 = 1;
  std::size_t coarse_dense_limit = 2000;
  CoarseningMode mode = CoarseningMode::hp;
  std::uint64_t seed = 1;
  unsigned int threads = 1;
  /// Optional user meshes, coarse to fine; replace the generated levels.
  std::vector<std::string> mesh_paths;
  std::string out;

  /// Throws ConfigError.
  void validate() const;
  unsigned int effective_dim() const;
};

/// Parses "key=value" lines (blank lines and '#' comments allowed) on top of
/// defaults. Unknown keys throw ConfigError.
BenchmarkConfig parse_config(std::istream &in, BenchmarkConfig defaults = {});

struct ResultRow
{
  std::string case_name;
  unsigned int dim = 0;
  unsigned int degree = 0;
  unsigned int levels = 0;
  std::size_t n_dofs = 0;
  std::size_t n_cells = 0;
  unsigned int iterations = 0;
  /// Only for nested cases: iterations with the nested fast path.
  std::optional<unsigned int> iterations_nested;
  bool converged = false;
  double setup_seconds = 0;
  double solve_seconds = 0;
  LevelTimings component;
};

struct MetricsRow
{
  unsigned int levels = 0;
  std::size_t workload = 0;
  double workload_efficiency = 0;
  double vertical_efficiency = 0;
};

struct ProfileRow
{
  /// Transfer path of the geometric levels, "non-nested" or "nested".
  std::string path;
  std::size_t level = 0;
  std::string transfer_kind;
  std::size_t n_dofs = 0;
  LevelTimings timings;
  TransferTimings transfer;
};

struct BenchmarkReport
{
  std::vector<std::string> header;
  std::vector<ResultRow> rows;
  std::vector<MetricsRow> metrics;
  std::vector<ProfileRow> profile;
  double vcycle_seconds = 0;
  std::size_t n_vcycles = 0;
  bool failed = false;
  std::string failure;
};

/// Coarse-to-fine level meshes of the generated hierarchies.
std::vector<std::shared_ptr<const Mesh>> nested_hypercube_levels(unsigned int dim,
                                                                 unsigned int n_levels);
/// Independently generated L-shape (2D) or Fichera (3D) levels: about sqrt 2
/// more cells per direction per level, growing corner grading and a smooth
/// perturbation of a quarter of the shortest edge.
std::vector<std::shared_ptr<const Mesh>> lshape_levels(unsigned int dim, unsigned int n_levels,
                                                       std::uint64_t seed = 1);
/// Independently generated perturbed meshes of [lower, upper]^dim.
std::vector<std::shared_ptr<const Mesh>> perturbed_cube_levels(unsigned int dim,
                                                               unsigned int n_levels,
                                                               std::uint64_t seed = 1,
                                                               double lower = -1,
                                                               double upper = 1);

/// Solves A x = b with CG preconditioned by one V-cycle of h and fills the
/// timing fields of a row.
ResultRow solve_with_hierarchy(const MultigridHierarchy &h, std::span<const double> rhs,
                               const CgSettings &cg);

/// Profile rows of the V-cycles run since the last timing reset.
std::vector<ProfileRow> collect_profile(const MultigridHierarchy &h, const std::string &path);

/// Runs a validated configuration. Solver failures are recorded in the
/// report instead of being thrown.
BenchmarkReport run_case(const BenchmarkConfig &config);

/// Main results table.
void write_results(const BenchmarkReport &report, std::ostream &out);
/// Partition statistics table (l, wl, wl-eff, v-eff).
void write_metrics(const BenchmarkReport &report, std::ostream &out);
/// Per-level exclusive V-cycle component times of the last solve, with the
/// transfer split into evaluation and gather/scatter.
void emit_profile(const BenchmarkReport &report, std::ostream &out);

/// Six significant digits.
std::string format_float(double v);

} // namespace nnmg

#endif
