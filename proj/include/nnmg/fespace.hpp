#ifndef NNMG_FESPACE_HPP
#define NNMG_FESPACE_HPP

#include <nnmg/mesh.hpp>
#include <nnmg/shape.hpp>

#include <memory>
#include <vector>

namespace nnmg
{

/// Dirichlet constraint set: a mask over all DoFs plus the prescribed values.
struct Constraints
{
  std::vector<std::uint8_t> mask;
  std::vector<double> values;

  Constraints() = default;
  explicit Constraints(std::size_t n_dofs) : mask(n_dofs, 0), values(n_dofs, 0.0) {}

  std::size_t size() const { return mask.size(); }
  bool is_constrained(DofIndex i) const { return mask[i] != 0; }
  std::size_t n_constrained() const;

  /// Writes the prescribed values into the constrained entries.
  void distribute(std::span<double> v) const;
  /// Zeroes the constrained entries.
  void set_zero(std::span<double> v) const;

  bool operator==(const Constraints &) const = default;
};

/// Continuous Lagrange space Q^p with Gauss-Lobatto support points.
/// Vector-valued spaces interleave components: dof = node * n_components + c.
class FESpace
{
public:
  FESpace(std::shared_ptr<const Mesh> mesh, unsigned int degree,
          unsigned int n_components = 1);

  const Mesh &mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  unsigned int dim() const { return mesh_->dim(); }
  unsigned int degree() const { return degree_; }
  unsigned int n_components() const { return n_components_; }
  const Shape1D &shape() const { return shape_; }

  std::size_t n_nodes() const { return support_points_.size(); }
  std::size_t n_dofs() const { return n_nodes() * n_components_; }
  /// (p+1)^d
  std::size_t nodes_per_cell() const { return nodes_per_cell_; }
  std::size_t dofs_per_cell() const { return nodes_per_cell_ * n_components_; }

  /// Global node indices of a cell in lexicographic local order.
  std::span<const std::size_t> cell_nodes(CellIndex cell) const
  {
    return {cell_nodes_.data() + cell * nodes_per_cell_, nodes_per_cell_};
  }
  /// Global DoF indices of a cell, local index = local_node * n_components + c.
  void cell_dofs(CellIndex cell, std::span<DofIndex> dofs) const;

  const Point &support_point(std::size_t node) const { return support_points_[node]; }
  const std::vector<Point> &support_points() const { return support_points_; }
  /// Lowest-index cell containing the node.
  CellIndex node_owner_cell(std::size_t node) const { return node_owner_[node]; }
  /// Reference coordinates of a local node.
  Point local_node_reference(std::size_t local_node) const;

  const Constraints &constraints() const { return constraints_; }
  void set_constraints(Constraints c);

private:
  std::shared_ptr<const Mesh> mesh_;
  unsigned int degree_;
  unsigned int n_components_;
  Shape1D shape_;
  std::size_t nodes_per_cell_;
  std::vector<std::size_t> cell_nodes_;
  std::vector<Point> support_points_;
  std::vector<CellIndex> node_owner_;
  Constraints constraints_;
};

std::shared_ptr<FESpace> build_space(std::shared_ptr<const Mesh> mesh, unsigned int degree,
                                     unsigned int n_components = 1);

/// Constrains every DoF whose support point lies on a boundary face with one
/// of the given ids to g(x_i) (component c takes g(x_i)[c]). Unknown ids
/// throw Error.
Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids,
                                  const VectorFunction &g);
Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids,
                                  const ScalarFunction &g);
/// Homogeneous variant.
Constraints dirichlet_constraints(const FESpace &space, std::span<const int> boundary_ids);

/// Nodal interpolant: entries f(x_i).
LevelVector interpolate(const FESpace &space, const ScalarFunction &f);
LevelVector interpolate(const FESpace &space, const VectorFunction &f);

/// Evaluates the FE field u in a cell at reference coordinates; returns one
/// entry per component.
Point evaluate(const FESpace &space, std::span<const double> u, CellIndex cell,
               const Point &ref);

} // namespace nnmg

#endif
