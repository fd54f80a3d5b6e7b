#include "support.hpp"

#include <doctest.h>

using namespace nnmg;
using namespace testing;

TEST_CASE("tree of a single cell")
{
  const Mesh m = generate_hypercube(2, 0, 1, 0);
  const AabbTree tree(m, default_box_padding(m));
  CHECK(tree.root_is_leaf());
  CHECK(tree.query({0.5, 0.5, 0}) == std::vector<CellIndex>{0});
  CHECK(tree.query({3, 0.5, 0}).empty());
  CHECK(default_box_padding(m) == doctest::Approx(1e-6 * std::sqrt(2.0)));
}

TEST_CASE("tree queries equal a linear scan")
{
  std::mt19937_64 rng(12);
  for (unsigned int dim : {2u, 3u})
  {
    const Mesh m = generate_perturbed(generate_lshape(dim, dim == 2 ? 3 : 2, 1), 0.02, 3);
    const double pad = 0.01;
    const AabbTree tree(m, pad);
    CHECK(tree.n_nodes() == 2 * m.n_cells() - 1);
    for (CellIndex c = 0; c < m.n_cells(); ++c)
    {
      const auto cand = tree.query(m.cell_center(c));
      CHECK(std::find(cand.begin(), cand.end(), c) != cand.end());
    }
    std::uniform_real_distribution<double> u(-1.1, 1.1);
    for (int k = 0; k < 500; ++k)
    {
      const Point p{u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
      std::vector<CellIndex> brute;
      for (CellIndex c = 0; c < m.n_cells(); ++c)
      {
        BoundingBox box;
        box.lower = box.upper = m.vertex(c, 0);
        for (unsigned int v = 1; v < m.vertices_per_cell(); ++v)
          for (unsigned int d = 0; d < dim; ++d)
          {
            box.lower[d] = std::min(box.lower[d], m.vertex(c, v)[d]);
            box.upper[d] = std::max(box.upper[d], m.vertex(c, v)[d]);
          }
        for (unsigned int d = 0; d < dim; ++d)
        {
          box.lower[d] -= pad;
          box.upper[d] += pad;
        }
        if (box.contains(p, dim))
          brute.push_back(c);
      }
      CHECK(tree.query(p) == brute);
    }
  }
}

TEST_CASE("projection onto the reference cell")
{
  CHECK(project_to_reference({1.2, 0.5, 0}, 2) == Point{1.0, 0.5, 0});
  CHECK(project_to_reference({-0.1, 1.3, 0.4}, 3) == Point{0, 1, 0.4});
  CHECK(project_to_reference({0.3, 0.6, 0.9}, 3) == Point{0.3, 0.6, 0.9});
}

TEST_CASE("mesh vertices are found in the lowest cell")
{
  const Mesh m = generate_hypercube(2, 0, 1, 2);
  const AabbTree tree(m, default_box_padding(m));
  const auto own = locate_points(tree, m, m.vertices());
  for (std::size_t i = 0; i < own.size(); ++i)
  {
    CellIndex lowest = m.n_cells();
    for (CellIndex c = 0; c < m.n_cells() && lowest == m.n_cells(); ++c)
      for (const std::size_t v : m.cells()[c])
        if (v == i)
          lowest = c;
    CHECK(own[i].cell == lowest);
    CHECK_FALSE(own[i].projected);
    for (unsigned int d = 0; d < 2; ++d)
      CHECK((own[i].reference[d] == doctest::Approx(0) || own[i].reference[d] == doctest::Approx(1)));
  }
}

TEST_CASE("nested support points land on the lattice")
{
  for (unsigned int p = 1; p <= 3; ++p)
  {
    const Mesh coarse = generate_hypercube(2, -1, 1, 1);
    const auto fine = build_space(share(generate_hypercube(2, -1, 1, 2)), p);
    const AabbTree tree(coarse, default_box_padding(coarse));
    const auto own = locate_points(tree, coarse, fine->support_points());
    const auto gl = Shape1D(p).nodes();
    std::vector<double> lattice;
    for (const double t : gl)
    {
      lattice.push_back(0.5 * t);
      lattice.push_back(0.5 + 0.5 * t);
    }
    for (const auto &o : own)
    {
      CHECK_FALSE(o.projected);
      CHECK(distance(CellMapping(coarse, o.cell).map_to_real(o.reference),
                     fine->support_point(o.point), 2) <= 1e-12);
      for (unsigned int d = 0; d < 2; ++d)
      {
        double best = 1;
        for (const double t : lattice)
          best = std::min(best, std::abs(o.reference[d] - t));
        CHECK(best <= 1e-12);
      }
    }
  }
}

TEST_CASE("points slightly outside are projected")
{
  const Mesh m = generate_perturbed(generate_hypercube(2, 0, 1, 2), 0.03, 2);
  SearchConfig cfg;
  cfg.box_padding = 1e-2;
  const AabbTree tree(m, cfg.box_padding);
  const std::vector<Point> pts{{1.001, 0.37, 0}, {0.4, -0.004, 0}, {0.5, 0.5, 0}};
  const auto own = locate_points(tree, m, pts, cfg);
  for (int i = 0; i < 2; ++i)
  {
    CHECK(own[i].projected);
    bool on_boundary = false;
    for (unsigned int d = 0; d < 2; ++d)
    {
      CHECK(own[i].reference[d] >= 0);
      CHECK(own[i].reference[d] <= 1);
      on_boundary |= own[i].reference[d] == 0 || own[i].reference[d] == 1;
    }
    CHECK(on_boundary);
  }
  CHECK_FALSE(own[2].projected);
  const std::vector<Point> far{{0.5, 0.5, 0}, {3, 3, 0}};
  CHECK_THROWS_AS(locate_points(tree, m, far, cfg), PointOutsideDomain);
  const auto maybe = try_locate_points(tree, m, far, cfg);
  CHECK(maybe[0].has_value());
  CHECK_FALSE(maybe[1].has_value());
}

TEST_CASE("located points are sound and deterministic")
{
  std::mt19937_64 rng(8);
  const Mesh m = generate_perturbed(generate_lshape(2, 3, 1), 0.02, 5);
  const AabbTree tree(m, default_box_padding(m));
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point> pts;
  while (pts.size() < 300)
  {
    const Point p{u(rng), u(rng), 0};
    if (!(p[0] > 0 && p[1] > 0))
      pts.push_back(p);
  }
  const auto a = locate_points(tree, m, pts);
  const auto b = locate_points(tree, m, pts);
  CHECK(a == b);
  for (const auto &o : a)
    if (!o.projected)
    {
      const CellMapping map(m, o.cell);
      CHECK(distance(map.map_to_real(o.reference), pts[o.point], 2) <= 1e-12 * map.diameter() + 1e-15);
    }
}

TEST_CASE("owner ranks and exchange statistics")
{
  std::mt19937_64 rng(13);
  const Mesh m = generate_hypercube(2, 0, 1, 3);
  const AabbTree tree(m, default_box_padding(m));
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point> pts(400);
  for (auto &p : pts)
    p = {u(rng), u(rng), 0};
  auto own = locate_points(tree, m, pts);

  PartitionLabels single{std::vector<int>(m.n_cells(), 0), 1};
  const auto s = resolve_owner_ranks(own, single, std::vector<int>(pts.size(), 0));
  CHECK(s.n_remote == 0);
  CHECK(s.n_messages == 0);

  std::uniform_int_distribution<int> r(0, 11);
  PartitionLabels labels{std::vector<int>(m.n_cells()), 12};
  for (auto &o : labels.owner)
    o = r(rng);
  std::vector<int> requester(pts.size());
  for (auto &q : requester)
    q = r(rng);
  const auto stats = resolve_owner_ranks(own, labels, requester);
  std::size_t remote = 0;
  std::vector<std::size_t> volume(144, 0);
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    const int owner = labels.owner[own[i].cell];
    CHECK(own[i].owner_rank == owner);
    remote += owner != requester[i];
    ++volume[std::size_t(requester[i] * 12 + owner)];
  }
  std::size_t messages = 0;
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b)
      messages += a != b && volume[std::size_t(a * 12 + b)] > 0;
  CHECK(stats.n_points == pts.size());
  CHECK(stats.n_remote == remote);
  CHECK(stats.volume == volume);
  CHECK(stats.n_messages == messages);
}
