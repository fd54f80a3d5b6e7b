#include "support.hpp"

#include <doctest.h>

using namespace nnmg;
using namespace testing;

namespace
{

ProblemSetup poisson(unsigned int dim)
{
  ProblemSetup p;
  p.dirichlet_ids = all_ids(dim);
  return p;
}

std::vector<std::shared_ptr<const Mesh>> nested(unsigned int dim, unsigned int n)
{
  std::vector<std::shared_ptr<const Mesh>> m;
  for (unsigned int r = 0; r < n; ++r)
    m.push_back(share(generate_hypercube(dim, -1, 1, r)));
  return m;
}

double energy(const LevelOperator &op, std::span<const double> e)
{
  return std::sqrt(dot(nnmg::apply(op, e), e));
}

} // namespace

TEST_CASE("single level hierarchy is the coarse solver")
{
  const std::vector<std::shared_ptr<const Mesh>> one{share(generate_hypercube(2, -1, 1, 2))};
  const auto h = build_hp_hierarchy(one, 2, poisson(2));
  CHECK(h->n_levels() == 1);
  std::mt19937_64 rng(1);
  auto f = random_vector(h->finest().op->n_dofs(), rng);
  LevelVector direct(f.size());
  h->coarse_solver().solve(direct, f);
  CHECK(max_diff(h->v_cycle(0, f), direct) == 0);
}

TEST_CASE("hp level sequence")
{
  HierarchySettings s;
  s.mode = CoarseningMode::hp;
  const auto meshes = nested(2, 3);
  const auto h = build_hp_hierarchy(meshes, 3, poisson(2), s);
  REQUIRE(h->n_levels() == 5);
  const unsigned int degrees[] = {1, 2, 3, 3, 3};
  const Mesh *mesh_of[] = {meshes[0].get(), meshes[0].get(), meshes[0].get(), meshes[1].get(),
                           meshes[2].get()};
  for (std::size_t l = 0; l < 5; ++l)
  {
    CHECK(h->level(l).space->degree() == degrees[l]);
    CHECK(&h->level(l).space->mesh() == mesh_of[l]);
    CHECK((h->level(l).smoother != nullptr) == (l > 0));
  }
  CHECK(h->transfer(0).kind() == "polynomial");
  CHECK(h->transfer(1).kind() == "polynomial");
  CHECK(h->transfer(2).kind() == "non-nested");
  for (std::size_t l = 0; l + 1 < 5; ++l)
  {
    CHECK(&h->transfer(l).coarse_space() == h->level(l).space.get());
    CHECK(&h->transfer(l).fine_space() == h->level(l + 1).space.get());
  }
  s.path = TransferPath::nested;
  CHECK(build_hp_hierarchy(meshes, 3, poisson(2), s)->transfer(3).kind() == "nested");
  s.mode = CoarseningMode::h_only;
  CHECK(build_hp_hierarchy(meshes, 3, poisson(2), s)->n_levels() == 3);
}

TEST_CASE("mismatched transfers are rejected")
{
  const auto meshes = nested(2, 2);
  auto h = build_hp_hierarchy(meshes, 1, poisson(2));
  std::vector<MultigridLevel> levels;
  for (std::size_t l = 0; l < 2; ++l)
  {
    auto space = build_level_space(meshes[l], 1, poisson(2));
    auto op = build_level_operator(space, poisson(2));
    levels.push_back({space, op, compute_diagonal(*op), nullptr});
  }
  auto other = build_level_space(meshes[1], 1, poisson(2));
  std::vector<std::unique_ptr<Transfer>> transfers;
  transfers.push_back(setup_nonnested(levels[0].space, other));
  CHECK_THROWS_AS(MultigridHierarchy(std::move(levels), std::move(transfers)), Error);
}

TEST_CASE("V-cycle is linear, symmetric and maps zero to zero")
{
  std::mt19937_64 rng(2);
  std::vector<std::shared_ptr<const Mesh>> meshes{
    share(generate_perturbed(generate_lshape(2, 1, 1), 0.04, 1)),
    share(generate_perturbed(generate_lshape_subdivided(2, 3, 1), 0.04, 2)),
    share(generate_perturbed(generate_lshape_subdivided(2, 4, 2), 0.03, 3))};
  HierarchySettings s;
  s.mode = CoarseningMode::hp;
  ProblemSetup problem;
  problem.dirichlet_ids = {0};
  const auto h = build_hp_hierarchy(meshes, 2, problem, s);
  const std::size_t n = h->finest().op->n_dofs();
  const auto &cons = h->finest().space->constraints();
  LevelVector z(n);
  h->precondition(z, LevelVector(n, 0.0));
  CHECK(max_abs(z) == 0);

  double scale = 0;
  for (int k = 0; k < 20; ++k)
  {
    auto f = random_vector(n, rng), g = random_vector(n, rng);
    cons.set_zero(f);
    cons.set_zero(g);
    LevelVector vf(n), vg(n), vc(n), c(n);
    for (std::size_t i = 0; i < n; ++i)
      c[i] = 2 * f[i] - 0.5 * g[i];
    h->precondition(vf, f);
    h->precondition(vg, g);
    h->precondition(vc, c);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(vc[i] - (2 * vf[i] - 0.5 * vg[i])) <= 1e-12 * max_abs(vc));
    scale = norm(vf) * norm(g);
    CHECK(std::abs(dot(vf, g) - dot(f, vg)) <= 1e-9 * scale);
  }
}

TEST_CASE("two-level contraction is level independent")
{
  std::mt19937_64 rng(3);
  for (unsigned int r = 2; r <= 5; ++r)
  {
    const std::vector<std::shared_ptr<const Mesh>> meshes{share(generate_hypercube(2, 0, 1, r - 1)),
                                                          share(generate_hypercube(2, 0, 1, r))};
    const auto h = build_hp_hierarchy(meshes, 1, poisson(2));
    const auto &op = *h->finest().op;
    auto x = random_vector(op.n_dofs(), rng);
    h->finest().space->constraints().set_zero(x);
    const auto f = nnmg::apply(op, x);
    const auto d = h->v_cycle(1, f);
    LevelVector e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      e[i] = x[i] - d[i];
    const double factor = energy(op, e) / energy(op, x);
    MESSAGE("refinements " << r << ": contraction " << factor);
    CHECK(factor < 0.2);
  }
}

TEST_CASE("nested and non-nested paths give identical iterations")
{
  for (unsigned int p = 1; p <= 3; ++p)
  {
    const auto meshes = nested(2, 4);
    HierarchySettings s;
    s.mode = CoarseningMode::hp;
    std::vector<unsigned int> its;
    for (const auto path : {TransferPath::non_nested, TransferPath::nested})
    {
      s.path = path;
      const auto h = build_hp_hierarchy(meshes, p, poisson(2), s);
      const auto &space = *h->finest().space;
      const auto b = assemble_rhs(space, [](const Point &) { return 1.0; });
      LevelVector x(b.size(), 0.0);
      const auto r = cg_solve(*h->finest().op, MultigridPreconditioner(*h), b, x);
      CHECK(r.converged);
      its.push_back(r.iterations);
    }
    CHECK(its[0] == its[1]);
  }
}

TEST_CASE("timings are exclusive and resettable")
{
  const auto h = build_hp_hierarchy(nested(2, 4), 2, poisson(2));
  const auto b = assemble_rhs(*h->finest().space, [](const Point &) { return 1.0; });
  LevelVector x(b.size(), 0.0);
  cg_solve(*h->finest().op, MultigridPreconditioner(*h), b, x);
  CHECK(h->n_vcycles() > 0);
  double sum = 0;
  for (const auto &t : h->timings())
    sum += t.total();
  CHECK(sum <= 1.05 * h->total_vcycle_time());
  CHECK(sum > 0);
  h->reset_timings();
  CHECK(h->n_vcycles() == 0);
  CHECK(h->total_vcycle_time() == 0);
  CHECK(h->transfer(0).timings().n_prolongate == 0);
}
