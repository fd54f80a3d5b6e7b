#include <nnmg/bench.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{

void write_to(const std::string &path, const std::function<void(std::ostream &)> &writer)
{
  if (path.empty() || path == "-")
  {
    writer(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw nnmg::ConfigError("cannot open '" + path + "' for writing");
  writer(out);
}

} // namespace

int main(int argc, char **argv)
{
  using namespace nnmg;
  CLI::App app{"Non-nested multigrid benchmarks"};
  BenchmarkConfig cli;
  std::string config_file, policy, profile_path, mode;
  app.add_option("--config", config_file, "key=value file applied before the flags");
  app.add_option("--case", cli.case_name, "benchmark case")
    ->check(CLI::IsMember(bench_cases()));
  app.add_option("--dim", cli.dim, "spatial dimension (2 or 3)");
  app.add_option("--degree", cli.degree, "polynomial degree 1-4, 0 runs all");
  app.add_option("--levels", cli.n_levels, "largest number of geometric levels");
  app.add_option("--ranks", cli.n_ranks, "simulated ranks for metrics");
  app.add_option("--policy", policy, "partition policy: default or matching");
  app.add_option("--reduction", cli.cg.reduction, "CG residual reduction");
  app.add_option("--out", cli.out, "output CSV path (stdout if empty)");
  app.add_option("--profile", profile_path, "V-cycle profile CSV path");
  app.add_option("--seed", cli.seed, "mesh perturbation and Lanczos seed");
  app.add_option("--threads", cli.threads, "worker threads");
  app.add_option("--mesh", cli.mesh_paths, "msh v2.2 level files, coarse to fine");
  app.add_option("--mode", mode, "coarsening: hp or h");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  BenchmarkConfig config;
  try
  {
    if (!config_file.empty())
    {
      std::ifstream in(config_file);
      if (!in)
        throw ConfigError("cannot open config file '" + config_file + "'");
      config = parse_config(in);
    }
    const auto given = [&](const char *name) { return app.count(name) > 0; };
    if (given("--case"))
      config.case_name = cli.case_name;
    if (given("--dim"))
      config.dim = cli.dim;
    if (given("--degree"))
      config.degree = cli.degree;
    if (given("--levels"))
      config.n_levels = cli.n_levels;
    if (given("--ranks"))
      config.n_ranks = cli.n_ranks;
    if (given("--policy"))
    {
      try
      {
        config.policy = parse_partition_policy(policy);
      }
      catch (const Error &e)
      {
        throw ConfigError(e.what());
      }
    }
    if (given("--reduction"))
      config.cg.reduction = cli.cg.reduction;
    if (given("--out"))
      config.out = cli.out;
    if (given("--seed"))
      config.seed = cli.seed;
    if (given("--threads"))
      config.threads = cli.threads;
    if (given("--mesh"))
      config.mesh_paths = cli.mesh_paths;
    if (given("--mode"))
    {
      if (mode == "hp")
        config.mode = CoarseningMode::hp;
      else if (mode == "h")
        config.mode = CoarseningMode::h_only;
      else
        throw ConfigError("mode must be hp or h");
    }
    if (config.case_name.empty())
      throw ConfigError("--case is required");
    config.validate();
  }
  catch (const Error &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }

  BenchmarkReport report;
  try
  {
    report = run_case(config);
  }
  catch (const ConfigError &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }
  catch (const Error &e)
  {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }

  try
  {
    if (config.case_name == "metrics-only")
      write_to(config.out, [&](std::ostream &o) { write_metrics(report, o); });
    else
      write_to(config.out, [&](std::ostream &o) { write_results(report, o); });
    if (!profile_path.empty())
      write_to(profile_path, [&](std::ostream &o) { emit_profile(report, o); });
  }
  catch (const Error &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }

  if (report.failed)
  {
    std::cerr << "solver failure: " << report.failure << "\n";
    return 2;
  }
  return 0;
}
