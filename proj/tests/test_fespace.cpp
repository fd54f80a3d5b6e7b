#include "support.hpp"

#include <doctest.h>

using namespace nnmg;
using namespace testing;

TEST_CASE("1D shape functions")
{
  const auto v = eval_shape_1d(1, 0.5);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(0.5));
  const auto w = eval_shape_1d(2, 0.0);
  CHECK(w == std::vector<double>{1, 0, 0});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (unsigned int p = 1; p <= 6; ++p)
  {
    const Shape1D s(p);
    for (int k = 0; k < 20; ++k)
    {
      const double t = u(rng);
      const auto vals = s.values(t);
      double sum = 0, dsum = 0;
      for (std::size_t i = 0; i <= p; ++i)
      {
        sum += vals[i];
        CHECK(vals[i] == doctest::Approx(lagrange(s.nodes(), i, t)).epsilon(1e-12));
      }
      for (const double d : s.derivatives(t))
        dsum += d;
      CHECK(std::abs(sum - 1) <= 1e-13);
      CHECK(std::abs(dsum) <= 1e-11);
    }
  }
}

TEST_CASE("quadrature rules")
{
  for (unsigned int n = 1; n <= 6; ++n)
  {
    const auto q = gauss_legendre(n);
    for (unsigned int k = 0; k < 2 * n; ++k)
    {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i)
        s += q.weights[i] * std::pow(q.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
  for (unsigned int n = 2; n <= 6; ++n)
  {
    const auto q = gauss_lobatto(n);
    CHECK(q.points.front() == 0);
    CHECK(q.points.back() == 1);
    for (unsigned int k = 0; k < 2 * n - 2; ++k)
    {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i)
        s += q.weights[i] * std::pow(q.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("DoF counts")
{
  // the finest mesh of an l-level nested hierarchy has l - 1 refinements
  CHECK(build_space(share(generate_hypercube(2, -1, 1, 4)), 4)->n_dofs() == 4225);
  CHECK(build_space(share(generate_hypercube(3, -1, 1, 4)), 2)->n_dofs() == 35937);
  CHECK(build_space(share(generate_hypercube(3, -1, 1, 0)), 1, 3)->n_dofs() == 24);
  CHECK(build_space(share(generate_hypercube(2, -1, 1, 5)), 1)->n_dofs() == 1089);
  for (unsigned int p = 1; p <= 4; ++p)
    CHECK(build_space(share(generate_lshape(2, 1, 0)), p)->n_nodes() ==
          ipow(4 * p + 1, 2) - ipow(2 * p, 2));
}

TEST_CASE("support points and numbering")
{
  const auto space = build_space(share(generate_hypercube(2, 0, 1, 1)), 2, 2);
  CHECK(space->n_nodes() == 25);
  std::vector<DofIndex> dofs(space->dofs_per_cell());
  for (CellIndex c = 0; c < space->mesh().n_cells(); ++c)
  {
    space->cell_dofs(c, dofs);
    const auto nodes = space->cell_nodes(c);
    const CellMapping map(space->mesh(), c);
    for (std::size_t l = 0; l < nodes.size(); ++l)
    {
      CHECK(dofs[2 * l] == 2 * nodes[l]);
      CHECK(dofs[2 * l + 1] == 2 * nodes[l] + 1);
      const Point x = map.map_to_real(space->local_node_reference(l));
      CHECK(distance(x, space->support_point(nodes[l]), 2) <= 1e-14);
      CHECK(space->node_owner_cell(nodes[l]) <= c);
    }
  }
}

TEST_CASE("Dirichlet constraints")
{
  const auto s1 = build_space(share(generate_hypercube(2, -1, 1, 1)), 1);
  const std::vector<int> all{0, 1, 2, 3};
  const auto c1 = dirichlet_constraints(*s1, all);
  CHECK(s1->n_dofs() == 9);
  CHECK(c1.n_constrained() == 8);
  CHECK(dirichlet_constraints(*s1, std::vector<int>{}).n_constrained() == 0);
  CHECK_THROWS_AS(dirichlet_constraints(*s1, std::vector<int>{17}), Error);

  for (unsigned int dim : {2u, 3u})
    for (unsigned int l = 1; l <= (dim == 2 ? 3u : 2u); ++l)
      for (unsigned int p = 1; p <= 3; ++p)
      {
        const auto s = build_space(share(generate_hypercube(dim, -1, 1, l)), p);
        const auto c = dirichlet_constraints(*s, all_ids(dim));
        CHECK(s->n_dofs() - c.n_constrained() == ipow((1u << l) * p - 1, dim));
      }

  const auto v = build_space(share(generate_hypercube(2, 0, 1, 1)), 2, 2);
  const auto cv = dirichlet_constraints(*v, std::vector<int>{0},
                                        [](const Point &x) { return Point{x[1], -x[1], 0}; });
  CHECK(cv.n_constrained() == 2 * 5);
  for (std::size_t n = 0; n < v->n_nodes(); ++n)
    if (v->support_point(n)[0] == 0)
    {
      CHECK(cv.values[2 * n] == v->support_point(n)[1]);
      CHECK(cv.values[2 * n + 1] == -v->support_point(n)[1]);
    }
}

TEST_CASE("interpolation")
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  const auto mesh = share(generate_perturbed(generate_hypercube(2, -1, 1, 2), 0.08, 4));
  for (unsigned int p = 1; p <= 4; ++p)
  {
    const auto space = build_space(mesh, p);
    const auto ones = interpolate(*space, [](const Point &) { return 1.0; });
    CHECK(ones == LevelVector(space->n_dofs(), 1.0));
    const auto f = [](const Point &x) { return 2 * x[0] - 3 * x[1] + 0.5; };
    const auto uh = interpolate(*space, f);
    for (int k = 0; k < 50; ++k)
    {
      const CellIndex c = std::size_t(u(rng) * double(mesh->n_cells())) % mesh->n_cells();
      const Point ref{u(rng), u(rng), 0};
      const Point x = CellMapping(*mesh, c).map_to_real(ref);
      CHECK(std::abs(evaluate(*space, uh, c, ref)[0] - f(x)) <= 1e-12);
    }
  }
  const auto q1 = build_space(share(generate_hypercube(2, 0, 1, 0)), 1);
  const auto sq = [](const Point &x) { return x[0] * x[0]; };
  const auto vh = interpolate(*q1, sq);
  for (std::size_t n = 0; n < q1->n_nodes(); ++n)
    CHECK(vh[n] == sq(q1->support_point(n)));
  CHECK(evaluate(*q1, vh, 0, {0.5, 0.5, 0})[0] - 0.25 == doctest::Approx(0.25));
}

TEST_CASE("continuity across cell faces")
{
  std::mt19937_64 rng(5);
  const auto mesh = share(generate_perturbed(generate_hypercube(3, 0, 1, 1), 0.05, 2));
  const auto space = build_space(mesh, 3);
  const auto u = random_vector(space->n_dofs(), rng);
  // cells 0 and 1 share the face x_0 = 1 of cell 0
  std::uniform_real_distribution<double> t(0, 1);
  for (int k = 0; k < 10; ++k)
  {
    const double a = t(rng), b = t(rng);
    const double left = evaluate(*space, u, 0, {1, a, b})[0];
    const double right = evaluate(*space, u, 1, {0, a, b})[0];
    CHECK(left == doctest::Approx(right).epsilon(1e-12));
  }
}
