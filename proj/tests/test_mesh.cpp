#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace nnmg;
using namespace testing;

TEST_CASE("hypercube cell counts")
{
  CHECK(generate_hypercube(2, -1, 1, 0).n_cells() == 1);
  CHECK(generate_hypercube(2, -1, 1, 0).n_vertices() == 4);
  CHECK(generate_hypercube(3, -1, 1, 2).n_cells() == 64);
  CHECK(generate_hypercube(2, -1, 1, 5).n_cells() == 1024);
}

TEST_CASE("hypercube cells are affine and positively oriented")
{
  for (unsigned int dim : {2u, 3u})
  {
    const Mesh m = generate_hypercube(dim, -1, 1, 2);
    m.validate();
    for (CellIndex c = 0; c < m.n_cells(); ++c)
    {
      const CellMapping map(m, c);
      CHECK(map.is_affine());
      const auto j0 = map.jacobian({0.1, 0.2, 0.3});
      const auto j1 = map.jacobian({0.9, 0.7, 0.4});
      for (unsigned int a = 0; a < dim; ++a)
        for (unsigned int b = 0; b < dim; ++b)
          CHECK(j0[a][b] == j1[a][b]);
      CHECK(determinant(j0, dim) > 0);
    }
  }
}

TEST_CASE("hypercube boundary ids are colorized")
{
  const Mesh m = generate_hypercube(3, 0, 1, 1);
  CHECK(m.boundary_ids() == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(m.boundary_faces().size() == 24);
  for (const auto &f : m.boundary_faces())
  {
    Point c{};
    for (const unsigned int v : face_vertices(3, f.face))
      for (unsigned int d = 0; d < 3; ++d)
        c[d] += m.vertex(f.cell, v)[d] / 4;
    const int axis = f.boundary_id / 2;
    CHECK(c[axis] == doctest::Approx(f.boundary_id % 2));
  }
}

TEST_CASE("map_to_real examples")
{
  const Mesh unit = generate_hypercube(2, 0, 1, 0);
  const Point x = map_to_real(CellMapping(unit, 0), {0.3, 0.7, 0});
  CHECK(x[0] == doctest::Approx(0.3));
  CHECK(x[1] == doctest::Approx(0.7));

  const Mesh big(2, {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {2, 2, 0}}, {{0, 1, 2, 3}});
  const Point y = map_to_real(CellMapping(big, 0), {0.5, 0.5, 0});
  CHECK(y[0] == doctest::Approx(1));
  CHECK(y[1] == doctest::Approx(1));
  const Point r = invert_mapping(CellMapping(big, 0), {1, 1, 0});
  CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bilinear inversion round trip")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2), u(0, 1);
  for (int trial = 0; trial < 20; ++trial)
  {
    std::vector<Point> v;
    for (unsigned int i = 0; i < 4; ++i)
      v.push_back({double(i & 1) + jitter(rng), double(i >> 1) + jitter(rng), 0});
    const Mesh m(2, v, {{0, 1, 2, 3}});
    const CellMapping map(m, 0);
    CHECK_FALSE(map.is_affine());
    for (int k = 0; k < 100; ++k)
    {
      const Point ref{u(rng), u(rng), 0};
      const Point x = map.map_to_real(ref);
      const Point back = map.invert(x);
      CHECK(distance(back, ref, 2) <= 1e-10);
      CHECK(distance(map.map_to_real(back), x, 2) <= 1e-12);
    }
  }
}

TEST_CASE("trilinear inversion round trip")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15), u(0, 1);
  std::vector<Point> v;
  for (unsigned int i = 0; i < 8; ++i)
    v.push_back({double(i & 1) + jitter(rng), double((i >> 1) & 1) + jitter(rng),
                 double(i >> 2) + jitter(rng)});
  const Mesh m(3, v, {{0, 1, 2, 3, 4, 5, 6, 7}});
  const CellMapping map(m, 0);
  for (int k = 0; k < 100; ++k)
  {
    const Point ref{u(rng), u(rng), u(rng)};
    CHECK(distance(map.invert(map.map_to_real(ref)), ref, 3) <= 1e-10);
  }
}

TEST_CASE("inversion outside and far from a cell")
{
  const Mesh m(2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1.3, 1.2, 0}}, {{0, 1, 2, 3}});
  const CellMapping map(m, 0);
  const Point x{1.2, 0.3, 0};
  const Point ref = map.invert(x);
  CHECK(ref[0] > 1);
  CHECK(distance(map.map_to_real(ref), x, 2) <= 1e-12 * map.diameter() + 1e-15);
  CHECK_FALSE(map.try_invert({40, -35, 0}).has_value());
  CHECK_THROWS_WITH_AS(map.invert({40, -35, 0}), doctest::Contains("no convergence"), Error);
}

TEST_CASE("lshape counts")
{
  const Mesh m = generate_lshape(2, 1, 0);
  CHECK(m.n_cells() == 12);
  m.validate();
  CHECK(generate_lshape(3, 1, 0).n_cells() == 56);
  // 192 cells: 3 * 8 * 8
  CHECK(generate_lshape(2, 3, 0).n_cells() == 192);
  for (CellIndex c = 0; c < m.n_cells(); ++c)
  {
    const Point x = m.cell_center(c);
    CHECK_FALSE((x[0] > 0 && x[1] > 0));
  }
}

TEST_CASE("corner grading shrinks cells near the re-entrant corner")
{
  const Mesh uniform = generate_lshape(3, 2, 0);
  const Mesh graded = generate_lshape(3, 2, 2);
  CHECK(graded.n_cells() == uniform.n_cells());
  graded.validate();
  auto corner_size = [](const Mesh &m) {
    double best = 1e300;
    for (CellIndex c = 0; c < m.n_cells(); ++c)
    {
      const Point x = m.cell_center(c);
      if (std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) < 0.5)
        best = std::min(best, m.cell_diameter(c));
    }
    return best;
  };
  CHECK(corner_size(graded) < 0.5 * corner_size(uniform));
  // outer boundary stays in place
  const auto [lo, hi] = graded.bounding_box();
  for (unsigned int d = 0; d < 3; ++d)
  {
    CHECK(lo[d] == doctest::Approx(-1));
    CHECK(hi[d] == doctest::Approx(1));
  }
}

TEST_CASE("perturbation")
{
  const Mesh base = generate_hypercube(2, 0, 1, 3);
  CHECK(generate_perturbed(base, 0.0, 5) == base);
  const double h = base.min_edge_length();
  const Mesh p = generate_perturbed(base, 0.3 * h, 5);
  CHECK(p.cells() == base.cells());
  CHECK(p.boundary_faces() == base.boundary_faces());
  double moved = 0;
  for (std::size_t i = 0; i < base.n_vertices(); ++i)
  {
    const double dist = distance(p.vertices()[i], base.vertices()[i], 2);
    CHECK(dist <= 0.3 * h + 1e-14);
    moved = std::max(moved, dist);
    const Point &x = base.vertices()[i];
    if (x[0] == 0 || x[0] == 1 || x[1] == 0 || x[1] == 1)
      CHECK(dist == 0);
  }
  CHECK(moved > 0);
  CHECK_THROWS_AS(generate_perturbed(base, 0.6 * h, 5), Error);
  CHECK_THROWS_AS(generate_perturbed(base, -0.1, 5), Error);
}

TEST_CASE("non-nested pair has non-lattice reference coordinates")
{
  const Mesh coarse = generate_perturbed(generate_hypercube(2, 0, 1, 2), 0.05, 1);
  const Mesh fine = generate_perturbed(generate_hypercube(2, 0, 1, 3), 0.03, 2);
  const AabbTree tree(coarse, default_box_padding(coarse));
  const auto located = locate_points(tree, coarse, fine.vertices());
  std::size_t interior = 0;
  for (const auto &o : located)
  {
    bool lattice = true;
    for (unsigned int d = 0; d < 2; ++d)
      lattice &= std::abs(o.reference[d] * 2 - std::round(o.reference[d] * 2)) < 1e-8;
    interior += lattice ? 0 : 1;
  }
  CHECK(interior > fine.n_vertices() / 2);
}

TEST_CASE("msh round trip")
{
  for (unsigned int dim : {2u, 3u})
  {
    const Mesh m = generate_perturbed(generate_hypercube(dim, -1, 1, 1 + (dim == 2)), 0.05, 9);
    std::stringstream ss;
    ss.precision(17);
    write_msh(m, ss);
    const Mesh r = read_msh(ss);
    CHECK(r.vertices() == m.vertices());
    CHECK(r.cells() == m.cells());
    CHECK(r.boundary_ids() == m.boundary_ids());
    CHECK(r.boundary_faces().size() == m.boundary_faces().size());
  }
}

TEST_CASE("msh reader")
{
  std::istringstream quad(R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
1
1 3 2 0 1 1 2 3 4
$EndElements
)");
  const Mesh m = read_msh(quad);
  CHECK(m.n_cells() == 1);
  CHECK(m.dim() == 2);
  CHECK(CellMapping(m, 0).jacobian({0.5, 0.5, 0})[0][0] == doctest::Approx(1));

  std::istringstream tri(R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
1
1 2 2 0 1 1 2 3
$EndElements
)");
  CHECK_THROWS_WITH_AS(read_msh(tri), doctest::Contains("unsupported element type"), Error);

  std::istringstream broken("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0\n");
  CHECK_THROWS_AS(read_msh(broken), Error);
}
