#include <nnmg/multigrid.hpp>

#include <algorithm>

namespace nnmg
{

MultigridHierarchy::MultigridHierarchy(std::vector<MultigridLevel> levels,
                                       std::vector<std::unique_ptr<Transfer>> transfers,
                                       std::size_t coarse_dense_limit)
  : levels_(std::move(levels)), transfers_(std::move(transfers))
{
  if (levels_.empty())
    throw Error("a hierarchy needs at least one level");
  if (transfers_.size() + 1 != levels_.size())
    throw Error("a hierarchy with L levels needs L - 1 transfers");
  for (std::size_t l = 0; l < transfers_.size(); ++l)
    if (&transfers_[l]->coarse_space() != levels_[l].space.get() ||
        &transfers_[l]->fine_space() != levels_[l + 1].space.get())
      throw Error("transfer " + std::to_string(l) + " does not connect levels " +
                  std::to_string(l) + " and " + std::to_string(l + 1));
  for (const auto &level : levels_)
    if (level.space->n_components() != levels_.front().space->n_components())
      throw Error("inconsistent component counts across levels");
  coarse_ = std::make_unique<CoarseSolver>(levels_.front().op, coarse_dense_limit);
  timings_.resize(levels_.size());
  residual_.resize(levels_.size());
  coarse_rhs_.resize(levels_.size());
  coarse_sol_.resize(levels_.size());
  correction_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l)
  {
    const std::size_t n = levels_[l].space->n_dofs();
    residual_[l].resize(n);
    correction_[l].resize(n);
    if (l > 0)
    {
      coarse_rhs_[l].resize(levels_[l - 1].space->n_dofs());
      coarse_sol_[l].resize(levels_[l - 1].space->n_dofs());
    }
  }
}

void MultigridHierarchy::reset_timings() const
{
  std::fill(timings_.begin(), timings_.end(), LevelTimings{});
  vcycle_time_ = 0;
  n_vcycles_ = 0;
  for (const auto &t : transfers_)
    t->reset_timings();
}

LevelVector MultigridHierarchy::v_cycle(std::size_t l, std::span<const double> f) const
{
  if (l >= levels_.size())
    throw Error("level index out of range");
  LevelVector x(levels_[l].space->n_dofs());
  check_size("v_cycle rhs", x.size(), f.size());
  Stopwatch watch;
  v_cycle(l, f, x);
  vcycle_time_ += watch.lap();
  ++n_vcycles_;
  return x;
}

void MultigridHierarchy::precondition(std::span<double> z, std::span<const double> r) const
{
  check_size("precondition rhs", finest().space->n_dofs(), r.size());
  check_size("precondition result", finest().space->n_dofs(), z.size());
  Stopwatch watch;
  v_cycle(levels_.size() - 1, r, z);
  vcycle_time_ += watch.lap();
  ++n_vcycles_;
}

void MultigridHierarchy::v_cycle(std::size_t l, std::span<const double> f,
                                 std::span<double> x) const
{
  LevelTimings &t = timings_[l];
  Stopwatch watch;
  if (l == 0)
  {
    coarse_->solve(x, f);
    t.coarse += watch.lap();
    return;
  }
  const MultigridLevel &level = levels_[l];
  const std::size_t n = x.size();

  level.smoother->smooth(f, x, m1, true);
  t.pre_smooth += watch.lap();

  LevelVector &r = residual_[l];
  level.op->vmult(r, x);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = f[i] - r[i];
  t.residual += watch.lap();

  transfers_[l - 1]->restrict(r, coarse_rhs_[l]);
  t.restrict += watch.lap();

  v_cycle(l - 1, coarse_rhs_[l], coarse_sol_[l]);
  watch.lap();

  LevelVector &c = correction_[l];
  transfers_[l - 1]->prolongate(coarse_sol_[l], c);
  for (std::size_t i = 0; i < n; ++i)
    x[i] += c[i];
  t.prolongate += watch.lap();

  level.smoother->smooth(f, x, m2, false);
  t.post_smooth += watch.lap();
}

// ---------------------------------------------------------------------------

std::shared_ptr<FESpace> build_level_space(std::shared_ptr<const Mesh> mesh, unsigned int degree,
                                           const ProblemSetup &problem)
{
  const unsigned int nc =
    problem.kind == ProblemSetup::Kind::elasticity ? mesh->dim() : 1u;
  auto space = build_space(std::move(mesh), degree, nc);
  space->set_constraints(dirichlet_constraints(*space, problem.dirichlet_ids));
  return space;
}

std::shared_ptr<LevelOperator> build_level_operator(std::shared_ptr<const FESpace> space,
                                                    const ProblemSetup &problem)
{
  if (problem.kind == ProblemSetup::Kind::elasticity)
    return std::make_shared<ElasticityOperator>(std::move(space), problem.lambda, problem.mu);
  return std::make_shared<LaplaceOperator>(std::move(space));
}

std::unique_ptr<MultigridHierarchy>
build_hp_hierarchy(const std::vector<std::shared_ptr<const Mesh>> &meshes, unsigned int p_fine,
                   const ProblemSetup &problem, const HierarchySettings &settings)
{
  if (meshes.empty())
    throw Error("build_hp_hierarchy needs at least one mesh");
  if (p_fine < 1)
    throw Error("polynomial degree must be at least 1");
  for (const auto &m : meshes)
    if (m->dim() != meshes.front()->dim())
      throw Error("all meshes of a hierarchy need the same dimension");

  std::vector<std::shared_ptr<const FESpace>> spaces;
  if (settings.mode == CoarseningMode::hp)
    for (unsigned int p = 1; p < p_fine; ++p)
      spaces.push_back(build_level_space(meshes.front(), p, problem));
  const std::size_t n_poly = spaces.size();
  for (const auto &m : meshes)
    spaces.push_back(build_level_space(m, p_fine, problem));

  std::vector<MultigridLevel> levels;
  for (const auto &space : spaces)
  {
    MultigridLevel level;
    level.space = space;
    level.op = build_level_operator(space, problem);
    level.diagonal = compute_diagonal(*level.op);
    levels.push_back(std::move(level));
  }
  for (std::size_t l = 1; l < levels.size(); ++l)
    levels[l].smoother =
      std::make_unique<ChebyshevJacobi>(levels[l].op, levels[l].diagonal, settings.smoother);

  std::vector<std::unique_ptr<Transfer>> transfers;
  for (std::size_t l = 0; l + 1 < spaces.size(); ++l)
  {
    if (l < n_poly)
      transfers.push_back(setup_polynomial(spaces[l], spaces[l + 1]));
    else if (settings.path == TransferPath::nested)
      transfers.push_back(std::make_unique<NestedTransfer>(spaces[l], spaces[l + 1]));
    else
      transfers.push_back(setup_nonnested(spaces[l], spaces[l + 1], settings.search));
  }
  return std::make_unique<MultigridHierarchy>(std::move(levels), std::move(transfers),
                                              settings.coarse_dense_limit);
}

} // namespace nnmg
