#ifndef NNMG_METRICS_HPP
#define NNMG_METRICS_HPP

#include <nnmg/transfer.hpp>

#include <memory>
#include <string>
#include <vector>

namespace nnmg
{

enum class PartitionPolicy
{
  default_sfc,
  matching
};

PartitionPolicy parse_partition_policy(const std::string &name);
std::string to_string(PartitionPolicy policy);

/// Morton code of a point quantized to 21 bits per axis inside [lower, upper].
std::uint64_t morton_code(const Point &p, const Point &lower, const Point &upper, unsigned int dim);

/// Cells sorted along the Morton curve of their centers, split into n_ranks
/// contiguous chunks whose sizes differ by at most one.
PartitionLabels partition_default(const Mesh &mesh, int n_ranks);

/// Each coarse cell takes the rank of the fine cell that contains its
/// centroid. Centroids outside the fine mesh use the projected owner, or the
/// fine cell with the nearest center when no candidate exists.
PartitionLabels partition_matching(const Mesh &coarse, const Mesh &fine,
                                   const PartitionLabels &fine_labels);

/// Labels for a hierarchy ordered coarse to fine. The matching policy
/// partitions the finest mesh by default and chains downwards.
std::vector<PartitionLabels> partition_hierarchy(const std::vector<std::shared_ptr<const Mesh>> &meshes,
                                                 int n_ranks, PartitionPolicy policy);

/// Rank of a fine transfer point: the owner of its node's lowest-index cell.
struct VerticalEfficiency
{
  std::size_t n_points = 0;
  std::size_t n_matching = 0;
  double fraction() const { return n_points == 0 ? 1.0 : double(n_matching) / double(n_points); }
};

/// Share of fine transfer points whose fine owner rank equals the owner rank
/// of the coarse cell they were located in.
VerticalEfficiency vertical_efficiency(const FESpace &fine_space,
                                       std::span<const TransferRecord> records,
                                       const PartitionLabels &coarse_labels,
                                       const PartitionLabels &fine_labels);
VerticalEfficiency vertical_efficiency(const NonNestedTransfer &transfer,
                                       const PartitionLabels &coarse_labels,
                                       const PartitionLabels &fine_labels);

struct PartitionStats
{
  int n_ranks = 1;
  /// C_l per level, coarse to fine.
  std::vector<std::size_t> cells;
  /// C_l^p, [level][rank].
  std::vector<std::vector<std::size_t>> cells_per_rank;
  std::size_t serial_workload = 0;
  std::size_t parallel_workload = 0;
  double workload_efficiency = 1;
  /// One entry per consecutive level pair.
  std::vector<double> vertical;

  double mean_vertical() const;
};

/// Workload fields from the labels of every level; vertical is left empty.
PartitionStats workload_stats(const std::vector<PartitionLabels> &labels);

/// Full statistics of a geometric hierarchy: labels by policy, non-nested
/// transfers of the Q^degree spaces with the given Dirichlet ids, and
/// vertical efficiency of every level pair.
PartitionStats hierarchy_stats(const std::vector<std::shared_ptr<const Mesh>> &meshes,
                               unsigned int degree, std::span<const int> dirichlet_ids,
                               int n_ranks, PartitionPolicy policy);

} // namespace nnmg

#endif
