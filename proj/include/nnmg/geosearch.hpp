#ifndef NNMG_GEOSEARCH_HPP
#define NNMG_GEOSEARCH_HPP

#include <nnmg/mesh.hpp>

#include <optional>
#include <vector>

namespace nnmg
{

struct BoundingBox
{
  Point lower{};
  Point upper{};

  bool contains(const Point &p, unsigned int dim) const
  {
    for (unsigned int d = 0; d < dim; ++d)
      if (p[d] < lower[d] || p[d] > upper[d])
        return false;
    return true;
  }
};

/// Bounding-volume hierarchy over padded cell boxes: median split on the
/// longest axis of the node box, one cell per leaf.
class AabbTree
{
public:
  AabbTree(const Mesh &mesh, double padding);

  unsigned int dim() const { return dim_; }
  double padding() const { return padding_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  bool root_is_leaf() const { return nodes_.front().cell != npos; }
  const BoundingBox &cell_box(CellIndex c) const { return cell_boxes_[c]; }

  /// Cells whose padded box contains p, ascending.
  std::vector<CellIndex> query(const Point &p) const;

private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  struct Node
  {
    BoundingBox box;
    std::size_t left = npos, right = npos;
    std::size_t cell = npos;
  };
  std::size_t build(std::vector<CellIndex> &cells, std::size_t begin, std::size_t end);

  unsigned int dim_;
  double padding_;
  std::vector<BoundingBox> cell_boxes_;
  std::vector<Node> nodes_;
};

/// ε_box default: 1e-6 times the mesh bounding-box diagonal.
double default_box_padding(const Mesh &mesh);

AabbTree build_tree(const Mesh &mesh, double padding);

struct PointOwnership
{
  std::size_t point = 0;
  CellIndex cell = 0;
  Point reference{};
  int owner_rank = 0;
  bool projected = false;

  bool operator==(const PointOwnership &) const = default;
};

struct SearchConfig
{
  /// Box padding; <= 0 selects default_box_padding.
  double box_padding = 0;
  /// Slack for accepting reference coordinates as inside [0,1]^d.
  double reference_tolerance = 1e-10;
  /// Mapping inversion tolerance; <= 0 selects 1e-12 * cell diameter.
  double geometric_tolerance = 0;
};

class PointOutsideDomain : public Error
{
public:
  PointOutsideDomain(std::size_t index, const Point &p);
  std::size_t index;
};

/// Componentwise clamp to [0,1]^d: the Euclidean closest point of the unit
/// box.
Point project_to_reference(const Point &ref, unsigned int dim);

/// Two-phase point location: candidates from the tree, then mapping
/// inversion. Lowest accepting cell index wins. If no candidate accepts, the
/// candidate whose Newton solution is closest to the unit box is used and
/// the solution is projected onto it. Throws PointOutsideDomain when a point
/// has no usable candidate.
std::vector<PointOwnership> locate_points(const AabbTree &tree, const Mesh &mesh,
                                          std::span<const Point> points,
                                          const SearchConfig &config = {});

/// As locate_points, but points without a usable candidate are returned as
/// empty optionals instead of raising.
std::vector<std::optional<PointOwnership>> try_locate_points(const AabbTree &tree,
                                                             const Mesh &mesh,
                                                             std::span<const Point> points,
                                                             const SearchConfig &config = {});

/// Per-cell owner ranks of a simulated partition.
struct PartitionLabels
{
  std::vector<int> owner;
  int n_ranks = 1;

  bool operator==(const PartitionLabels &) const = default;
};

/// Statistics of the simulated request/answer exchange.
struct ExchangeStats
{
  std::size_t n_points = 0;
  /// Points whose requester rank differs from the owner rank.
  std::size_t n_remote = 0;
  /// Per (requester, owner) pair point counts, row-major n_ranks^2.
  std::vector<std::size_t> volume;
  /// Number of distinct (requester != owner) pairs that exchange points.
  std::size_t n_messages = 0;
};

/// Fills owner_rank from the partition of the searched mesh and records
/// the exchange volume given the requesting rank of each point.
ExchangeStats resolve_owner_ranks(std::vector<PointOwnership> &ownerships,
                                  const PartitionLabels &partition,
                                  std::span<const int> requester_rank);

} // namespace nnmg

#endif
