#include <nnmg/geosearch.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace nnmg
{

AabbTree::AabbTree(const Mesh &mesh, double padding) : dim_(mesh.dim()), padding_(padding)
{
  if (mesh.n_cells() == 0)
    throw Error("cannot build a search tree over an empty mesh");
  cell_boxes_.resize(mesh.n_cells());
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
  {
    BoundingBox box;
    for (unsigned int d = 0; d < dim_; ++d)
    {
      box.lower[d] = std::numeric_limits<double>::max();
      box.upper[d] = std::numeric_limits<double>::lowest();
    }
    for (unsigned int v = 0; v < mesh.vertices_per_cell(); ++v)
      for (unsigned int d = 0; d < dim_; ++d)
      {
        box.lower[d] = std::min(box.lower[d], mesh.vertex(c, v)[d] - padding);
        box.upper[d] = std::max(box.upper[d], mesh.vertex(c, v)[d] + padding);
      }
    cell_boxes_[c] = box;
  }
  std::vector<CellIndex> cells(mesh.n_cells());
  std::iota(cells.begin(), cells.end(), CellIndex(0));
  nodes_.reserve(2 * cells.size());
  build(cells, 0, cells.size());
}

std::size_t AabbTree::build(std::vector<CellIndex> &cells, std::size_t begin, std::size_t end)
{
  const std::size_t index = nodes_.size();
  nodes_.emplace_back();
  BoundingBox box = cell_boxes_[cells[begin]];
  for (std::size_t i = begin + 1; i < end; ++i)
    for (unsigned int d = 0; d < dim_; ++d)
    {
      box.lower[d] = std::min(box.lower[d], cell_boxes_[cells[i]].lower[d]);
      box.upper[d] = std::max(box.upper[d], cell_boxes_[cells[i]].upper[d]);
    }
  nodes_[index].box = box;
  if (end - begin == 1)
  {
    nodes_[index].cell = cells[begin];
    return index;
  }
  unsigned int axis = 0;
  for (unsigned int d = 1; d < dim_; ++d)
    if (box.upper[d] - box.lower[d] > box.upper[axis] - box.lower[axis])
      axis = d;
  const auto center = [&](CellIndex c) {
    return cell_boxes_[c].lower[axis] + cell_boxes_[c].upper[axis];
  };
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(cells.begin() + std::ptrdiff_t(begin), cells.begin() + std::ptrdiff_t(mid),
                   cells.begin() + std::ptrdiff_t(end), [&](CellIndex a, CellIndex b) {
                     const double ca = center(a), cb = center(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::size_t left = build(cells, begin, mid);
  const std::size_t right = build(cells, mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

std::vector<CellIndex> AabbTree::query(const Point &p) const
{
  std::vector<CellIndex> result;
  std::vector<std::size_t> stack{0};
  while (!stack.empty())
  {
    const Node &node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.contains(p, dim_))
      continue;
    if (node.cell != npos)
      result.push_back(node.cell);
    else
    {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

double default_box_padding(const Mesh &mesh)
{
  const auto [lo, hi] = mesh.bounding_box();
  return 1e-6 * distance(lo, hi, mesh.dim());
}

AabbTree build_tree(const Mesh &mesh, double padding)
{
  return AabbTree(mesh, padding);
}

PointOutsideDomain::PointOutsideDomain(std::size_t index, const Point &p)
  : Error([&] {
      std::ostringstream s;
      s << "point " << index << " (" << p[0] << ", " << p[1] << ", " << p[2]
        << ") is outside the padded domain";
      return s.str();
    }()),
    index(index)
{}

Point project_to_reference(const Point &ref, unsigned int dim)
{
  Point r = ref;
  for (unsigned int d = 0; d < dim; ++d)
    r[d] = std::clamp(r[d], 0.0, 1.0);
  return r;
}

std::vector<std::optional<PointOwnership>> try_locate_points(const AabbTree &tree,
                                                             const Mesh &mesh,
                                                             std::span<const Point> points,
                                                             const SearchConfig &config)
{
  const unsigned int dim = mesh.dim();
  std::vector<std::optional<PointOwnership>> result(points.size());
  std::vector<CellMapping> mappings;
  mappings.reserve(mesh.n_cells());
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
    mappings.emplace_back(mesh, c);

  // distance of a reference point to the unit box
  const auto outside_distance = [dim](const Point &ref) {
    double s = 0;
    for (unsigned int d = 0; d < dim; ++d)
    {
      const double e = std::max({0.0, -ref[d], ref[d] - 1.0});
      s += e * e;
    }
    return std::sqrt(s);
  };

  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
    {
      const Point &x = points[i];
      PointOwnership own;
      own.point = i;
      bool found = false;
      double best_distance = std::numeric_limits<double>::max();
      std::optional<PointOwnership> best;
      for (const CellIndex c : tree.query(x))
      {
        const auto ref = mappings[c].try_invert(x, config.geometric_tolerance);
        if (!ref)
          continue;
        const double dist = outside_distance(*ref);
        if (dist <= config.reference_tolerance)
        {
          own.cell = c;
          own.reference = *ref;
          found = true;
          break;
        }
        if (dist < best_distance)
        {
          best_distance = dist;
          best = PointOwnership{i, c, project_to_reference(*ref, dim), 0, true};
        }
      }
      if (found)
        result[i] = own;
      else
        result[i] = best;
    }
  });
  return result;
}

std::vector<PointOwnership> locate_points(const AabbTree &tree, const Mesh &mesh,
                                          std::span<const Point> points,
                                          const SearchConfig &config)
{
  const auto located = try_locate_points(tree, mesh, points, config);
  std::vector<PointOwnership> result(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    if (!located[i])
      throw PointOutsideDomain(i, points[i]);
    result[i] = *located[i];
  }
  return result;
}

ExchangeStats resolve_owner_ranks(std::vector<PointOwnership> &ownerships,
                                  const PartitionLabels &partition,
                                  std::span<const int> requester_rank)
{
  check_size("resolve_owner_ranks requester ranks", ownerships.size(), requester_rank.size());
  const auto n = std::size_t(partition.n_ranks);
  ExchangeStats stats;
  stats.n_points = ownerships.size();
  stats.volume.assign(n * n, 0);
  for (std::size_t i = 0; i < ownerships.size(); ++i)
  {
    auto &own = ownerships[i];
    if (own.cell >= partition.owner.size())
      throw Error("partition does not cover the searched mesh");
    own.owner_rank = partition.owner[own.cell];
    const int req = requester_rank[i];
    if (req < 0 || req >= partition.n_ranks)
      throw Error("requester rank out of range");
    ++stats.volume[std::size_t(req) * n + std::size_t(own.owner_rank)];
    if (req != own.owner_rank)
      ++stats.n_remote;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && stats.volume[a * n + b] > 0)
        ++stats.n_messages;
  return stats;
}

} // namespace nnmg
