#include <nnmg/bench.hpp>

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

namespace nnmg
{

namespace
{

constexpr double steel_young = 205e9;
constexpr double steel_poisson = 0.3;
constexpr double traction_magnitude = 1e5;
constexpr double max_bench_dofs = 5e6;

bool fixed_3d(const std::string &name)
{
  return name == "nested-sanity-3d" || name == "fichera-3d";
}

bool fixed_2d(const std::string &name)
{
  return name == "nested-sanity-2d" || name == "lshape-2d";
}

std::vector<unsigned int> degrees_of(const BenchmarkConfig &config)
{
  if (config.degree != 0)
    return {config.degree};
  return {1, 2, 3, 4};
}

std::vector<int> all_boundary_ids(const Mesh &mesh)
{
  return mesh.boundary_ids();
}

std::vector<std::shared_ptr<const Mesh>> prefix(const std::vector<std::shared_ptr<const Mesh>> &m,
                                                std::size_t n)
{
  return {m.begin(), m.begin() + std::ptrdiff_t(n)};
}

void check_size_cap(const Mesh &finest, unsigned int degree, unsigned int n_components)
{
  const double estimate =
    double(finest.n_cells()) * double(ipow(degree, finest.dim())) * n_components;
  if (estimate > max_bench_dofs)
    throw ConfigError("problem exceeds the desk-scale cap of 5e6 DoFs");
}

/// Finest-level cell count of the generated levels, before generating them.
double generated_cells(const BenchmarkConfig &config)
{
  if (config.n_levels == 0)
    return 0;
  const unsigned int dim = config.effective_dim();
  const double k = config.n_levels - 1;
  const std::string &name = config.case_name;
  if (name == "nested-sanity-2d" || name == "nested-sanity-3d")
    return std::pow(2.0, dim * k);
  if (name == "poisson-cube" || name == "elasticity-clamped")
    return std::pow(std::round(2.0 * std::pow(std::sqrt(2.0), k)), dim);
  const double n = std::round((dim == 2 ? 16.0 : 6.0) * std::pow(std::sqrt(2.0), k));
  return std::pow(2 * n, dim) - std::pow(n, dim);
}

HierarchySettings hierarchy_settings(const BenchmarkConfig &config, TransferPath path)
{
  HierarchySettings s;
  s.mode = config.mode;
  s.path = path;
  s.smoother = config.smoother;
  s.smoother.seed = config.seed;
  s.coarse_dense_limit = config.coarse_dense_limit;
  return s;
}

struct CaseRun
{
  ResultRow row;
  std::vector<ProfileRow> profile;
  double vcycle_seconds = 0;
  std::size_t n_vcycles = 0;
};

CaseRun run_one(const BenchmarkConfig &config, const std::vector<std::shared_ptr<const Mesh>> &meshes,
                unsigned int degree, const ProblemSetup &problem, TransferPath path,
                const std::function<LevelVector(const FESpace &)> &rhs)
{
  check_size_cap(*meshes.back(), degree,
                 problem.kind == ProblemSetup::Kind::elasticity ? meshes.back()->dim() : 1);
  Stopwatch watch;
  auto h = build_hp_hierarchy(meshes, degree, problem, hierarchy_settings(config, path));
  h->m1 = config.m1;
  h->m2 = config.m2;
  const LevelVector b = rhs(*h->finest().space);
  const double setup = watch.lap();
  CaseRun run;
  run.row = solve_with_hierarchy(*h, b, config.cg);
  run.row.setup_seconds = setup;
  run.row.case_name = config.case_name;
  run.row.dim = meshes.back()->dim();
  run.row.degree = degree;
  run.row.levels = unsigned(meshes.size());
  run.profile = collect_profile(*h, path == TransferPath::nested ? "nested" : "non-nested");
  run.vcycle_seconds = h->total_vcycle_time();
  run.n_vcycles = h->n_vcycles();
  return run;
}

void record(BenchmarkReport &report, const CaseRun &run)
{
  report.rows.push_back(run.row);
  report.profile = run.profile;
  report.vcycle_seconds = run.vcycle_seconds;
  report.n_vcycles = run.n_vcycles;
  if (!run.row.converged && !report.failed)
  {
    report.failed = true;
    report.failure = "CG did not converge for p=" + std::to_string(run.row.degree) +
                     " with " + std::to_string(run.row.levels) + " levels";
  }
}

LevelVector unit_load(const FESpace &space)
{
  return assemble_rhs(space, [](const Point &) { return 1.0; });
}

std::vector<std::shared_ptr<const Mesh>> read_meshes(const std::vector<std::string> &paths)
{
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (std::size_t i = 0; i < paths.size(); ++i)
  {
    try
    {
      auto m = read_msh(paths[i]);
      m.set_level_id(int(i));
      meshes.push_back(std::make_shared<Mesh>(std::move(m)));
    }
    catch (const Error &e)
    {
      throw ConfigError("cannot read mesh '" + paths[i] + "': " + e.what());
    }
  }
  return meshes;
}

std::string csv_timings(const LevelTimings &t)
{
  return format_float(t.pre_smooth) + "," + format_float(t.residual) + "," +
         format_float(t.restrict) + "," + format_float(t.coarse) + "," +
         format_float(t.prolongate) + "," + format_float(t.post_smooth);
}

} // namespace

const std::vector<std::string> &bench_cases()
{
  static const std::vector<std::string> cases{"nested-sanity-2d", "nested-sanity-3d", "lshape-2d",
                                              "fichera-3d",       "poisson-cube",     "elasticity-clamped",
                                              "metrics-only"};
  return cases;
}

unsigned int BenchmarkConfig::effective_dim() const
{
  if (dim != 0)
    return dim;
  return fixed_3d(case_name) ? 3 : 2;
}

void BenchmarkConfig::validate() const
{
  const auto &cases = bench_cases();
  if (std::find(cases.begin(), cases.end(), case_name) == cases.end())
    throw ConfigError("unknown case '" + case_name + "'");
  if (dim != 0 && dim != 2 && dim != 3)
    throw ConfigError("dim must be 2 or 3");
  if ((fixed_2d(case_name) && effective_dim() != 2) || (fixed_3d(case_name) && effective_dim() != 3))
    throw ConfigError("case '" + case_name + "' fixes the dimension");
  if (degree > 4)
    throw ConfigError("degree must be between 1 and 4 (0 runs all)");
  if (n_ranks < 1)
    throw ConfigError("ranks must be at least 1");
  if (!(cg.reduction > 0 && cg.reduction < 1))
    throw ConfigError("reduction must lie in (0, 1)");
  if (cg.max_iterations == 0)
    throw ConfigError("max iterations must be positive");
  if (smoother.degree == 0 || !(smoother.smoothing_range > 1) || smoother.lanczos_iterations == 0)
    throw ConfigError("invalid smoother settings");
  if (m1 == 0 || m2 == 0)
    throw ConfigError("m1 and m2 must be positive");
  if (threads == 0)
    throw ConfigError("threads must be at least 1");
  if (!mesh_paths.empty() && case_name != "poisson-cube" && case_name != "elasticity-clamped")
    throw ConfigError("--mesh is only supported by poisson-cube and elasticity-clamped");
}

BenchmarkConfig parse_config(std::istream &in, BenchmarkConfig c)
{
  std::string line;
  unsigned int line_no = 0;
  const auto to_uint = [&](const std::string &v, const std::string &key) {
    try
    {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size() || x < 0)
        throw ConfigError("");
      return static_cast<unsigned long long>(x);
    }
    catch (const std::exception &)
    {
      throw ConfigError("line " + std::to_string(line_no) + ": '" + key +
                        "' needs a non-negative integer");
    }
  };
  const auto to_double = [&](const std::string &v, const std::string &key) {
    try
    {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size())
        throw ConfigError("");
      return x;
    }
    catch (const std::exception &)
    {
      throw ConfigError("line " + std::to_string(line_no) + ": '" + key + "' needs a number");
    }
  };
  while (std::getline(in, line))
  {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "case")
      c.case_name = value;
    else if (key == "dim")
      c.dim = unsigned(to_uint(value, key));
    else if (key == "degree")
      c.degree = unsigned(to_uint(value, key));
    else if (key == "levels")
      c.n_levels = unsigned(to_uint(value, key));
    else if (key == "ranks")
      c.n_ranks = int(to_uint(value, key));
    else if (key == "policy")
    {
      try
      {
        c.policy = parse_partition_policy(value);
      }
      catch (const Error &e)
      {
        throw ConfigError(e.what());
      }
    }
    else if (key == "reduction")
      c.cg.reduction = to_double(value, key);
    else if (key == "max_iterations")
      c.cg.max_iterations = unsigned(to_uint(value, key));
    else if (key == "smoother_degree")
      c.smoother.degree = unsigned(to_uint(value, key));
    else if (key == "smoothing_range")
      c.smoother.smoothing_range = to_double(value, key);
    else if (key == "lanczos_iterations")
      c.smoother.lanczos_iterations = unsigned(to_uint(value, key));
    else if (key == "m1")
      c.m1 = unsigned(to_uint(value, key));
    else if (key == "m2")
      c.m2 = unsigned(to_uint(value, key));
    else if (key == "coarse_dense_limit")
      c.coarse_dense_limit = to_uint(value, key);
    else if (key == "mode")
    {
      if (value == "hp")
        c.mode = CoarseningMode::hp;
      else if (value == "h")
        c.mode = CoarseningMode::h_only;
      else
        throw ConfigError("mode must be hp or h");
    }
    else if (key == "seed")
      c.seed = to_uint(value, key);
    else if (key == "threads")
      c.threads = unsigned(to_uint(value, key));
    else if (key == "mesh")
      c.mesh_paths.push_back(value);
    else if (key == "out")
      c.out = value;
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------

std::vector<std::shared_ptr<const Mesh>> nested_hypercube_levels(unsigned int dim,
                                                                 unsigned int n_levels)
{
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (unsigned int k = 0; k < n_levels; ++k)
  {
    auto m = generate_hypercube(dim, -1, 1, k);
    m.set_level_id(int(k));
    meshes.push_back(std::make_shared<Mesh>(std::move(m)));
  }
  return meshes;
}

std::vector<std::shared_ptr<const Mesh>> lshape_levels(unsigned int dim, unsigned int n_levels,
                                                       std::uint64_t seed)
{
  const double base = dim == 2 ? 16.0 : 6.0;
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (unsigned int k = 0; k < n_levels; ++k)
  {
    const auto n = unsigned(std::lround(base * std::pow(std::sqrt(2.0), k)));
    const Mesh graded = generate_lshape_subdivided(dim, n, 1 + k / 2);
    auto m = generate_perturbed(graded, 0.25 * graded.min_edge_length(), seed + k);
    m.set_level_id(int(k));
    meshes.push_back(std::make_shared<Mesh>(std::move(m)));
  }
  return meshes;
}

std::vector<std::shared_ptr<const Mesh>> perturbed_cube_levels(unsigned int dim,
                                                               unsigned int n_levels,
                                                               std::uint64_t seed, double lower,
                                                               double upper)
{
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (unsigned int k = 0; k < n_levels; ++k)
  {
    const auto n = unsigned(std::lround(2.0 * std::pow(std::sqrt(2.0), k)));
    const Mesh base = generate_subdivided_hypercube(dim, lower, upper, n);
    auto m = generate_perturbed(base, 0.25 * base.min_edge_length(), seed + k);
    m.set_level_id(int(k));
    meshes.push_back(std::make_shared<Mesh>(std::move(m)));
  }
  return meshes;
}

ResultRow solve_with_hierarchy(const MultigridHierarchy &h, std::span<const double> rhs,
                               const CgSettings &cg)
{
  const auto &fine = h.finest();
  ResultRow row;
  row.n_dofs = fine.space->n_dofs();
  row.n_cells = fine.space->mesh().n_cells();
  LevelVector x(row.n_dofs, 0.0);
  const MultigridPreconditioner precond(h);
  h.reset_timings();
  Stopwatch watch;
  const CgResult result = cg_solve(*fine.op, precond, rhs, x, cg);
  row.solve_seconds = watch.lap();
  row.iterations = result.iterations;
  row.converged = result.converged && !result.indefinite;
  for (const auto &t : h.timings())
  {
    row.component.pre_smooth += t.pre_smooth;
    row.component.residual += t.residual;
    row.component.restrict += t.restrict;
    row.component.coarse += t.coarse;
    row.component.prolongate += t.prolongate;
    row.component.post_smooth += t.post_smooth;
  }
  return row;
}

std::vector<ProfileRow> collect_profile(const MultigridHierarchy &h, const std::string &path)
{
  std::vector<ProfileRow> rows;
  for (std::size_t l = 0; l < h.n_levels(); ++l)
  {
    ProfileRow row;
    row.path = path;
    row.level = l;
    row.n_dofs = h.level(l).space->n_dofs();
    row.timings = h.timings()[l];
    if (l > 0)
    {
      row.transfer_kind = h.transfer(l - 1).kind();
      row.transfer = h.transfer(l - 1).timings();
    }
    rows.push_back(row);
  }
  return rows;
}

BenchmarkReport run_case(const BenchmarkConfig &config)
{
  config.validate();
  if (config.mesh_paths.empty() && config.case_name != "metrics-only")
  {
    const unsigned int dim = config.effective_dim();
    const unsigned int p = config.degree == 0 ? 4 : config.degree;
    const unsigned int nc = config.case_name == "elasticity-clamped" ? dim : 1;
    if (generated_cells(config) * double(ipow(p, dim) * nc) > max_bench_dofs)
      throw ConfigError("problem exceeds the desk-scale cap of 5e6 DoFs");
  }
  set_num_threads(config.threads);
  BenchmarkReport report;
  const unsigned int dim = config.effective_dim();
  const auto first_l = [&] { return std::min(2u, config.n_levels); };
  const std::string &name = config.case_name;

  if (name == "nested-sanity-2d" || name == "nested-sanity-3d")
  {
    const auto all = nested_hypercube_levels(dim, config.n_levels);
    ProblemSetup problem;
    if (!all.empty())
      problem.dirichlet_ids = all_boundary_ids(*all.front());
    for (const unsigned int p : degrees_of(config))
      for (unsigned int l = first_l(); l <= config.n_levels && l > 0; ++l)
      {
        const auto meshes = prefix(all, l);
        const CaseRun nested = run_one(config, meshes, p, problem, TransferPath::nested, unit_load);
        CaseRun run = run_one(config, meshes, p, problem, TransferPath::non_nested, unit_load);
        run.row.iterations_nested = nested.row.iterations;
        run.profile.insert(run.profile.end(), nested.profile.begin(), nested.profile.end());
        run.vcycle_seconds += nested.vcycle_seconds;
        run.n_vcycles += nested.n_vcycles;
        record(report, run);
        if (!nested.row.converged && !report.failed)
        {
          report.failed = true;
          report.failure = "CG with nested transfers did not converge";
        }
      }
  }
  else if (name == "lshape-2d" || name == "fichera-3d" || name == "poisson-cube")
  {
    const auto all = !config.mesh_paths.empty()      ? read_meshes(config.mesh_paths)
                     : name == "poisson-cube" ? perturbed_cube_levels(dim, config.n_levels, config.seed)
                                              : lshape_levels(dim, config.n_levels, config.seed);
    ProblemSetup problem;
    if (!all.empty())
      problem.dirichlet_ids = all_boundary_ids(*all.back());
    const unsigned int n_levels = unsigned(all.size());
    for (const unsigned int p : degrees_of(config))
      for (unsigned int l = std::min(2u, n_levels); l <= n_levels && l > 0; ++l)
        record(report, run_one(config, prefix(all, l), p, problem, TransferPath::non_nested,
                               unit_load));
  }
  else if (name == "elasticity-clamped")
  {
    const auto lame = lame_from_young_poisson(steel_young, steel_poisson);
    report.header.push_back("young=" + format_float(steel_young) +
                            " poisson=" + format_float(steel_poisson));
    report.header.push_back("lambda=" + format_float(lame.lambda) +
                            " mu=" + format_float(lame.mu));
    const auto all = config.mesh_paths.empty()
                       ? perturbed_cube_levels(dim, config.n_levels, config.seed, 0.0, 1.0)
                       : read_meshes(config.mesh_paths);
    ProblemSetup problem;
    problem.kind = ProblemSetup::Kind::elasticity;
    problem.lambda = lame.lambda;
    problem.mu = lame.mu;
    problem.dirichlet_ids = {0};
    const int top = int(2 * (dim - 1) + 1);
    const auto load = [dim, top](const FESpace &space) {
      std::map<int, VectorFunction> neumann;
      neumann[top] = [dim](const Point &) {
        Point g{};
        g[dim - 1] = -traction_magnitude;
        return g;
      };
      return assemble_rhs(space, [](const Point &) { return Point{}; }, neumann);
    };
    const unsigned int n_levels = unsigned(all.size());
    for (const unsigned int p : degrees_of(config))
      for (unsigned int l = std::min(2u, n_levels); l <= n_levels && l > 0; ++l)
        record(report, run_one(config, prefix(all, l), p, problem, TransferPath::non_nested, load));
  }
  else if (name == "metrics-only")
  {
    const auto all = lshape_levels(dim, config.n_levels, config.seed);
    const unsigned int p = config.degree == 0 ? 1 : config.degree;
    const std::vector<int> ids{0};
    for (unsigned int l = first_l(); l <= config.n_levels && l > 0; ++l)
    {
      const auto meshes = prefix(all, l);
      if (std::size_t(config.n_ranks) > meshes.front()->n_cells())
        throw ConfigError("more ranks than cells on the coarsest level");
      const auto stats = hierarchy_stats(meshes, p, ids, config.n_ranks, config.policy);
      report.metrics.push_back(
        {l, stats.parallel_workload, stats.workload_efficiency, stats.mean_vertical()});
    }
  }
  return report;
}

std::string format_float(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_results(const BenchmarkReport &report, std::ostream &out)
{
  out << "# schema " << bench_schema << "\n";
  for (const auto &h : report.header)
    out << "# " << h << "\n";
  out << "case,dim,p,levels,n_dofs,n_cells,iterations,iterations_nested,converged,setup_s,"
         "solve_s,pre_smooth_s,residual_s,restrict_s,coarse_s,prolongate_s,post_smooth_s\n";
  for (const auto &r : report.rows)
  {
    out << r.case_name << "," << r.dim << "," << r.degree << "," << r.levels << "," << r.n_dofs
        << "," << r.n_cells << "," << r.iterations << ",";
    if (r.iterations_nested)
      out << *r.iterations_nested;
    out << "," << (r.converged ? 1 : 0) << "," << format_float(r.setup_seconds) << ","
        << format_float(r.solve_seconds) << "," << csv_timings(r.component) << "\n";
  }
}

void write_metrics(const BenchmarkReport &report, std::ostream &out)
{
  out << "# schema " << bench_schema << "\n";
  out << "l,wl,wl_eff,v_eff\n";
  for (const auto &m : report.metrics)
    out << m.levels << "," << m.workload << "," << format_float(m.workload_efficiency) << ","
        << format_float(m.vertical_efficiency) << "\n";
}

void emit_profile(const BenchmarkReport &report, std::ostream &out)
{
  out << "# schema " << bench_schema << "\n";
  out << "path,level,transfer,n_dofs,pre_smooth_s,residual_s,restrict_s,coarse_s,prolongate_s,"
         "post_smooth_s,prolongate_evaluate_s,prolongate_gather_s,restrict_evaluate_s,"
         "restrict_scatter_s\n";
  for (const auto &r : report.profile)
    out << r.path << "," << r.level << "," << r.transfer_kind << "," << r.n_dofs << ","
        << csv_timings(r.timings) << "," << format_float(r.transfer.prolongate_evaluate) << ","
        << format_float(r.transfer.prolongate_gather) << ","
        << format_float(r.transfer.restrict_evaluate) << ","
        << format_float(r.transfer.restrict_scatter) << "\n";
}

} // namespace nnmg
