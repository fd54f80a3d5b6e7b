#include "support.hpp"

#include <nnmg/bench.hpp>
#include <nnmg/metrics.hpp>

#include <doctest.h>

using namespace nnmg;
using namespace testing;

TEST_CASE("policy names")
{
  CHECK(parse_partition_policy("default") == PartitionPolicy::default_sfc);
  CHECK(parse_partition_policy("matching") == PartitionPolicy::matching);
  CHECK(to_string(PartitionPolicy::matching) == "matching");
  CHECK_THROWS_AS(parse_partition_policy("greedy"), Error);
}

TEST_CASE("Morton codes interleave bits")
{
  const Point lo{0, 0, 0}, hi{1, 1, 1};
  CHECK(morton_code({0, 0, 0}, lo, hi, 2) == 0);
  const double top = double((1u << 21) - 1);
  // x = 1 in quantized units sets bit 0, y = 1 sets bit 1
  CHECK(morton_code({1.0 / top, 0, 0}, lo, hi, 2) == 1);
  CHECK(morton_code({0, 1.0 / top, 0}, lo, hi, 2) == 2);
  CHECK(morton_code({0, 0, 1.0 / top}, lo, hi, 3) == 4);
  CHECK(morton_code({2.0 / top, 0, 0}, lo, hi, 3) == 8);
}

TEST_CASE("default partition")
{
  const Mesh m = generate_perturbed(generate_lshape(2, 3, 1), 0.02, 1);
  const auto one = partition_default(m, 1);
  CHECK(one.owner == std::vector<int>(m.n_cells(), 0));
  for (const int ranks : {3, 7, 12, 50})
  {
    const auto labels = partition_default(m, ranks);
    const auto stats = workload_stats({labels});
    for (const std::size_t c : stats.cells_per_rank[0])
      CHECK(std::abs(double(c) - double(m.n_cells()) / ranks) <= 1.0);
    if (m.n_cells() % std::size_t(ranks) == 0)
      CHECK(stats.workload_efficiency == 1.0);
  }
  CHECK_THROWS_AS(partition_default(m, int(m.n_cells()) + 1), Error);
  CHECK_THROWS_AS(partition_default(m, 0), Error);
}

TEST_CASE("matching partition of identical meshes copies the labels")
{
  const Mesh graded = generate_lshape(2, 3, 2);
  const Mesh m = generate_perturbed(graded, 0.3 * graded.min_edge_length(), 2);
  const auto fine = partition_default(m, 12);
  CHECK(partition_matching(m, m, fine) == fine);
}

TEST_CASE("workload statistics")
{
  PartitionLabels a{{0, 0, 1, 1}, 2}, b{{0, 0, 0, 1, 1, 1, 1, 1}, 2};
  const auto s = workload_stats({a, b});
  CHECK(s.serial_workload == 12);
  CHECK(s.parallel_workload == 2 + 5);
  CHECK(s.workload_efficiency == doctest::Approx(12.0 / 14.0));
  const PartitionLabels single{{0, 0, 0}, 1};
  CHECK(workload_stats({single, single}).workload_efficiency == 1.0);
  CHECK_THROWS_AS(workload_stats({a, PartitionLabels{{0, 1, 2}, 3}}), Error);
  CHECK_THROWS_AS(workload_stats({PartitionLabels{{0, 5}, 2}}), Error);
}

TEST_CASE("vertical efficiency")
{
  const auto mesh = share(generate_hypercube(2, 0, 1, 3));
  const auto space = build_space(mesh, 2);
  space->set_constraints(dirichlet_constraints(*space, all_ids(2)));
  const NonNestedTransfer same(space, space);
  const auto labels = partition_default(*mesh, 5);
  CHECK(vertical_efficiency(same, labels, labels).fraction() == 1.0);

  // random labels against a brute-force recount
  std::mt19937_64 rng(4);
  const auto levels = lshape_levels(2, 3, 1);
  auto coarse = build_space(levels[1], 1), fine = build_space(levels[2], 1);
  const NonNestedTransfer t(coarse, fine);
  std::uniform_int_distribution<int> r(0, 11);
  PartitionLabels lc{std::vector<int>(levels[1]->n_cells()), 12}, lf{std::vector<int>(levels[2]->n_cells()), 12};
  for (auto &o : lc.owner)
    o = r(rng);
  for (auto &o : lf.owner)
    o = r(rng);
  std::size_t matching = 0;
  for (const auto &rec : t.records())
  {
    CellIndex owner = levels[2]->n_cells();
    for (CellIndex c = 0; c < levels[2]->n_cells() && owner == levels[2]->n_cells(); ++c)
      for (const auto node : fine->cell_nodes(c))
        if (node == rec.fine_node)
          owner = c;
    matching += lf.owner[owner] == lc.owner[rec.coarse_cell];
  }
  const auto v = vertical_efficiency(t, lc, lf);
  CHECK(v.n_points == t.records().size());
  CHECK(v.n_matching == matching);
}

TEST_CASE("matching policy improves vertical efficiency")
{
  const auto levels = lshape_levels(2, 5, 1);
  const std::vector<int> ids{0};
  const auto def = hierarchy_stats(levels, 1, ids, 12, PartitionPolicy::default_sfc);
  const auto mat = hierarchy_stats(levels, 1, ids, 12, PartitionPolicy::matching);
  MESSAGE("v-eff default " << def.mean_vertical() << ", matching " << mat.mean_vertical());
  MESSAGE("wl-eff default " << def.workload_efficiency << ", matching " << mat.workload_efficiency);
  CHECK(mat.mean_vertical() > def.mean_vertical());
  CHECK(def.workload_efficiency >= 0.99);
  CHECK(mat.workload_efficiency <= 1.0);
  CHECK(mat.workload_efficiency >= 0.5);
  CHECK(def.vertical.size() == 4);
}
