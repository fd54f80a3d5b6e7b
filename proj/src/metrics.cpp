#include <nnmg/metrics.hpp>

#include <algorithm>
#include <numeric>

namespace nnmg
{

PartitionPolicy parse_partition_policy(const std::string &name)
{
  if (name == "default")
    return PartitionPolicy::default_sfc;
  if (name == "matching")
    return PartitionPolicy::matching;
  throw Error("unknown partition policy '" + name + "' (expected default or matching)");
}

std::string to_string(PartitionPolicy policy)
{
  return policy == PartitionPolicy::matching ? "matching" : "default";
}

std::uint64_t morton_code(const Point &p, const Point &lower, const Point &upper, unsigned int dim)
{
  constexpr unsigned int bits = 21;
  constexpr double max_q = double((1u << bits) - 1);
  std::array<std::uint64_t, 3> q{};
  for (unsigned int d = 0; d < dim; ++d)
  {
    const double ext = upper[d] - lower[d];
    const double t = ext > 0 ? (p[d] - lower[d]) / ext : 0.0;
    q[d] = std::uint64_t(std::clamp(t, 0.0, 1.0) * max_q);
  }
  std::uint64_t code = 0;
  for (unsigned int b = 0; b < bits; ++b)
    for (unsigned int d = 0; d < dim; ++d)
      code |= ((q[d] >> b) & 1u) << (b * dim + d);
  return code;
}

PartitionLabels partition_default(const Mesh &mesh, int n_ranks)
{
  if (n_ranks < 1)
    throw Error("number of ranks must be at least 1");
  if (std::size_t(n_ranks) > mesh.n_cells())
    throw Error("more ranks (" + std::to_string(n_ranks) + ") than cells (" +
                std::to_string(mesh.n_cells()) + ")");
  const auto [lo, hi] = mesh.bounding_box();
  const std::size_t n = mesh.n_cells();
  std::vector<std::uint64_t> codes(n);
  for (CellIndex c = 0; c < n; ++c)
    codes[c] = morton_code(mesh.cell_center(c), lo, hi, mesh.dim());
  std::vector<CellIndex> order(n);
  std::iota(order.begin(), order.end(), CellIndex(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](CellIndex a, CellIndex b) { return codes[a] < codes[b]; });
  PartitionLabels labels;
  labels.n_ranks = n_ranks;
  labels.owner.resize(n);
  const auto ranks = std::size_t(n_ranks);
  for (std::size_t k = 0; k < n; ++k)
    labels.owner[order[k]] = int(k * ranks / n);
  return labels;
}

PartitionLabels partition_matching(const Mesh &coarse, const Mesh &fine,
                                   const PartitionLabels &fine_labels)
{
  check_size("partition_matching fine labels", fine.n_cells(), fine_labels.owner.size());
  std::vector<Point> centers(coarse.n_cells());
  for (CellIndex c = 0; c < coarse.n_cells(); ++c)
    centers[c] = coarse.cell_center(c);
  const AabbTree tree(fine, default_box_padding(fine));
  const auto located = try_locate_points(tree, fine, centers);

  PartitionLabels labels;
  labels.n_ranks = fine_labels.n_ranks;
  labels.owner.resize(coarse.n_cells());
  for (CellIndex c = 0; c < coarse.n_cells(); ++c)
  {
    CellIndex host = 0;
    if (located[c])
      host = located[c]->cell;
    else
    {
      double best = std::numeric_limits<double>::max();
      for (CellIndex f = 0; f < fine.n_cells(); ++f)
      {
        const double dist = distance(centers[c], fine.cell_center(f), fine.dim());
        if (dist < best)
        {
          best = dist;
          host = f;
        }
      }
    }
    labels.owner[c] = fine_labels.owner[host];
  }
  return labels;
}

std::vector<PartitionLabels> partition_hierarchy(const std::vector<std::shared_ptr<const Mesh>> &meshes,
                                                 int n_ranks, PartitionPolicy policy)
{
  std::vector<PartitionLabels> labels(meshes.size());
  if (meshes.empty())
    return labels;
  for (std::size_t l = meshes.size(); l-- > 0;)
  {
    if (policy == PartitionPolicy::matching && l + 1 < meshes.size())
      labels[l] = partition_matching(*meshes[l], *meshes[l + 1], labels[l + 1]);
    else
      labels[l] = partition_default(*meshes[l], n_ranks);
  }
  return labels;
}

VerticalEfficiency vertical_efficiency(const FESpace &fine_space,
                                       std::span<const TransferRecord> records,
                                       const PartitionLabels &coarse_labels,
                                       const PartitionLabels &fine_labels)
{
  check_size("vertical_efficiency fine labels", fine_space.mesh().n_cells(),
             fine_labels.owner.size());
  VerticalEfficiency result;
  result.n_points = records.size();
  for (const auto &rec : records)
  {
    if (rec.coarse_cell >= coarse_labels.owner.size())
      throw Error("coarse labels do not cover the located cells");
    const int fine_rank = fine_labels.owner[fine_space.node_owner_cell(rec.fine_node)];
    if (fine_rank == coarse_labels.owner[rec.coarse_cell])
      ++result.n_matching;
  }
  return result;
}

VerticalEfficiency vertical_efficiency(const NonNestedTransfer &transfer,
                                       const PartitionLabels &coarse_labels,
                                       const PartitionLabels &fine_labels)
{
  check_size("vertical_efficiency coarse labels", transfer.coarse_space().mesh().n_cells(),
             coarse_labels.owner.size());
  return vertical_efficiency(transfer.fine_space(), transfer.records(), coarse_labels,
                             fine_labels);
}

double PartitionStats::mean_vertical() const
{
  if (vertical.empty())
    return 1.0;
  return std::accumulate(vertical.begin(), vertical.end(), 0.0) / double(vertical.size());
}

PartitionStats workload_stats(const std::vector<PartitionLabels> &labels)
{
  PartitionStats stats;
  if (labels.empty())
    return stats;
  stats.n_ranks = labels.front().n_ranks;
  for (const auto &lab : labels)
  {
    if (lab.n_ranks != stats.n_ranks)
      throw Error("all levels must use the same number of ranks");
    std::vector<std::size_t> counts(std::size_t(stats.n_ranks), 0);
    for (const int r : lab.owner)
    {
      if (r < 0 || r >= stats.n_ranks)
        throw Error("rank label out of range");
      ++counts[std::size_t(r)];
    }
    stats.cells.push_back(lab.owner.size());
    stats.serial_workload += lab.owner.size();
    stats.parallel_workload += *std::max_element(counts.begin(), counts.end());
    stats.cells_per_rank.push_back(std::move(counts));
  }
  stats.workload_efficiency =
    double(stats.serial_workload) / (double(stats.parallel_workload) * stats.n_ranks);
  return stats;
}

PartitionStats hierarchy_stats(const std::vector<std::shared_ptr<const Mesh>> &meshes,
                               unsigned int degree, std::span<const int> dirichlet_ids,
                               int n_ranks, PartitionPolicy policy)
{
  const auto labels = partition_hierarchy(meshes, n_ranks, policy);
  PartitionStats stats = workload_stats(labels);
  std::vector<std::shared_ptr<FESpace>> spaces;
  for (const auto &m : meshes)
  {
    auto space = build_space(m, degree);
    space->set_constraints(dirichlet_constraints(*space, dirichlet_ids));
    spaces.push_back(std::move(space));
  }
  for (std::size_t l = 0; l + 1 < meshes.size(); ++l)
  {
    const NonNestedTransfer transfer(spaces[l], spaces[l + 1]);
    stats.vertical.push_back(vertical_efficiency(transfer, labels[l], labels[l + 1]).fraction());
  }
  return stats;
}

} // namespace nnmg
