#include <nnmg/fespace.hpp>
#include <nnmg/tensor.hpp>

#include <algorithm>
#include <unordered_map>

namespace nnmg
{

std::size_t Constraints::n_constrained() const
{
  return std::size_t(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

void Constraints::distribute(std::span<double> v) const
{
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i])
      v[i] = values[i];
}

void Constraints::set_zero(std::span<double> v) const
{
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i])
      v[i] = 0;
}

namespace
{

struct KeyHash
{
  std::size_t operator()(const std::array<std::int64_t, 3> &k) const
  {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k)
      h = (h ^ std::size_t(v)) * 1099511628211ull;
    return h;
  }
};

} // namespace

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, unsigned int degree,
                 unsigned int n_components)
  : mesh_(std::move(mesh)), degree_(degree), n_components_(n_components), shape_(degree),
    nodes_per_cell_(ipow(degree + 1, mesh_->dim()))
{
  if (n_components == 0)
    throw Error("space needs at least one component");
  const unsigned int dim = mesh_->dim();
  const double tol = 1e-10 * mesh_->min_edge_length();

  // Support points shared by adjacent cells are identified geometrically:
  // points are binned on a grid of size tol and matched against the 3^d
  // neighbouring bins.
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::size_t>, KeyHash> bins;
  cell_nodes_.resize(mesh_->n_cells() * nodes_per_cell_);
  for (CellIndex c = 0; c < mesh_->n_cells(); ++c)
  {
    const CellMapping mapping(*mesh_, c);
    for (std::size_t l = 0; l < nodes_per_cell_; ++l)
    {
      const Point x = mapping.map_to_real(local_node_reference(l));
      std::array<std::int64_t, 3> key{0, 0, 0};
      for (unsigned int d = 0; d < dim; ++d)
        key[d] = std::int64_t(std::floor(x[d] / tol));

      std::size_t found = std::numeric_limits<std::size_t>::max();
      const unsigned int n_neighbors = unsigned(ipow(3, dim));
      for (unsigned int nb = 0; nb < n_neighbors && found == std::numeric_limits<std::size_t>::max(); ++nb)
      {
        auto k = key;
        unsigned int idx = nb;
        for (unsigned int d = 0; d < dim; ++d, idx /= 3)
          k[d] += std::int64_t(idx % 3) - 1;
        auto it = bins.find(k);
        if (it == bins.end())
          continue;
        for (const auto node : it->second)
          if (distance(support_points_[node], x, dim) <= tol)
          {
            found = node;
            break;
          }
      }
      if (found == std::numeric_limits<std::size_t>::max())
      {
        found = support_points_.size();
        support_points_.push_back(x);
        node_owner_.push_back(c);
        bins[key].push_back(found);
      }
      cell_nodes_[c * nodes_per_cell_ + l] = found;
    }
  }
  constraints_ = Constraints(n_dofs());
}

void FESpace::cell_dofs(CellIndex cell, std::span<DofIndex> dofs) const
{
  const auto nodes = cell_nodes(cell);
  for (std::size_t l = 0; l < nodes.size(); ++l)
    for (unsigned int c = 0; c < n_components_; ++c)
      dofs[l * n_components_ + c] = nodes[l] * n_components_ + c;
}

Point FESpace::local_node_reference(std::size_t local_node) const
{
  Point ref{};
  const std::size_t n1 = degree_ + 1;
  for (unsigned int d = 0; d < dim(); ++d, local_node /= n1)
    ref[d] = shape_.nodes()[local_node % n1];
  return ref;
}

void FESpace::set_constraints(Constraints c)
{
  check_size("constraints", n_dofs(), c.size());
  constraints_ = std::move(c);
}

std::shared_ptr<FESpace> build_space(std::shared_ptr<const Mesh> mesh, unsigned int degree,
                                     unsigned int n_components)
{
  return std::make_shared<FESpace>(std::move(mesh), degree, n_components);
}

Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids,
                                  const VectorFunction &g)
{
  const Mesh &mesh = space.mesh();
  const auto available = mesh.boundary_ids();
  for (const int id : boundary_ids)
    if (std::find(available.begin(), available.end(), id) == available.end())
      throw Error("unknown boundary id " + std::to_string(id));

  Constraints result(space.n_dofs());
  const std::size_t n1 = space.degree() + 1;
  const unsigned int nc = space.n_components();
  for (const auto &bf : mesh.boundary_faces())
  {
    if (std::find(boundary_ids.begin(), boundary_ids.end(), bf.boundary_id) == boundary_ids.end())
      continue;
    const unsigned int axis = bf.face / 2;
    const std::size_t target = (bf.face % 2) ? space.degree() : 0;
    const auto nodes = space.cell_nodes(bf.cell);
    std::size_t stride = 1;
    for (unsigned int a = 0; a < axis; ++a)
      stride *= n1;
    for (std::size_t l = 0; l < nodes.size(); ++l)
    {
      if ((l / stride) % n1 != target)
        continue;
      const std::size_t node = nodes[l];
      if (result.mask[node * nc])
        continue;
      const Point value = g ? g(space.support_point(node)) : Point{};
      for (unsigned int c = 0; c < nc; ++c)
      {
        result.mask[node * nc + c] = 1;
        result.values[node * nc + c] = value[c];
      }
    }
  }
  return result;
}

Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids,
                                  const ScalarFunction &g)
{
  return dirichlet_constraints(space, boundary_ids, VectorFunction([&g](const Point &x) {
                                 const double v = g(x);
                                 return Point{v, v, v};
                               }));
}

Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids)
{
  return dirichlet_constraints(space, boundary_ids, VectorFunction{});
}

LevelVector interpolate(const FESpace &space, const VectorFunction &f)
{
  LevelVector u(space.n_dofs());
  const unsigned int nc = space.n_components();
  for (std::size_t node = 0; node < space.n_nodes(); ++node)
  {
    const Point v = f(space.support_point(node));
    for (unsigned int c = 0; c < nc; ++c)
      u[node * nc + c] = v[c];
  }
  return u;
}

LevelVector interpolate(const FESpace &space, const ScalarFunction &f)
{
  return interpolate(space, VectorFunction([&f](const Point &x) {
                       const double v = f(x);
                       return Point{v, v, v};
                     }));
}

Point evaluate(const FESpace &space, std::span<const double> u, CellIndex cell,
               const Point &ref)
{
  check_size("evaluate", space.n_dofs(), u.size());
  const std::size_t n1 = space.degree() + 1;
  std::array<std::vector<double>, 3> tab;
  std::array<const double *, 3> basis{};
  for (unsigned int d = 0; d < space.dim(); ++d)
  {
    tab[d] = space.shape().values(ref[d]);
    basis[d] = tab[d].data();
  }
  const auto nodes = space.cell_nodes(cell);
  const unsigned int nc = space.n_components();
  std::vector<double> local(nodes.size());
  Point result{};
  for (unsigned int c = 0; c < nc; ++c)
  {
    for (std::size_t l = 0; l < nodes.size(); ++l)
      local[l] = u[nodes[l] * nc + c];
    result[c] = tensor::evaluate_point(local.data(), n1, space.dim(), basis);
  }
  return result;
}

} // namespace nnmg
