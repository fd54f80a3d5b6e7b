#ifndef NNMG_OPERATOR_HPP
#define NNMG_OPERATOR_HPP

#include <nnmg/fespace.hpp>

#include <map>
#include <memory>

namespace nnmg
{

/// Compressed sparse row matrix; only used as a test oracle and for dense
/// coarse solves.
struct SparseMatrix
{
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;

  void vmult(std::span<double> dst, std::span<const double> src) const;
  double operator()(std::size_t i, std::size_t j) const;
  std::size_t nnz() const { return val.size(); }
};

/// Linear operator acting on level vectors.
class LinearOperator
{
public:
  virtual ~LinearOperator() = default;
  virtual std::size_t n_dofs() const = 0;
  virtual void vmult(std::span<double> dst, std::span<const double> src) const = 0;
};

/// Matrix-free level operator A_l of a continuous Lagrange space.
///
/// Constrained DoFs follow the homogeneous convention: constrained input
/// entries are treated as zero and the output of a constrained entry is the
/// input entry itself, so the operator is the identity on the constrained
/// subspace and decoupled from it.
class LevelOperator : public LinearOperator
{
public:
  explicit LevelOperator(std::shared_ptr<const FESpace> space);

  const FESpace &space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  std::size_t n_dofs() const override { return space_->n_dofs(); }
  unsigned int n_quadrature_1d() const { return unsigned(quad_.points.size()); }

  void vmult(std::span<double> dst, std::span<const double> src) const override;
  /// Applies the operator without any constraint treatment.
  void vmult_unconstrained(std::span<double> dst, std::span<const double> src) const;

  /// Element matrix of one cell computed by direct quadrature with explicitly
  /// evaluated basis gradients (no sum factorization, no cached geometry).
  /// Row-major, dofs_per_cell x dofs_per_cell.
  virtual std::vector<double> element_matrix(CellIndex cell) const = 0;

protected:
  struct Workspace
  {
    std::vector<double> buf[8];
    std::vector<double> grad[3][3];
  };

  /// out = A_K in on one cell; in/out are local vectors with
  /// local index = local_node * n_components + c.
  virtual void cell_apply(CellIndex cell, std::span<const double> in, std::span<double> out,
                          Workspace &ws) const = 0;

  /// Reference gradients of a scalar local field at the quadrature points.
  void reference_gradients(const double *u, std::array<double *, 3> grads, Workspace &ws) const;
  /// Transpose of reference_gradients, accumulating into v.
  void integrate_gradients(std::array<const double *, 3> fluxes, double *v, Workspace &ws) const;

  Workspace make_workspace() const;

  std::size_t n_q_points() const { return n_q_; }
  /// Inverse Jacobian (row m = d ref_m / dx) and |det J| * weight at one
  /// quadrature point.
  const double *inverse_jacobian(CellIndex cell, std::size_t q) const
  {
    return affine_[cell] ? &jinv_[geo_offset_[cell] * 9] : &jinv_[(geo_offset_[cell] + q) * 9];
  }
  double jxw(CellIndex cell, std::size_t q) const
  {
    return affine_[cell] ? jxw_[geo_offset_[cell]] * weights_[q] : jxw_[geo_offset_[cell] + q];
  }

  friend LevelVector compute_diagonal(const LevelOperator &op);

  std::shared_ptr<const FESpace> space_;
  Quadrature1D quad_;
  std::size_t n_q_;
  std::vector<double> values_1d_;      // nq x n1
  std::vector<double> derivatives_1d_; // nq x n1
  std::vector<double> weights_;        // tensor quadrature weights
  std::vector<std::uint8_t> affine_;
  std::vector<std::size_t> geo_offset_;
  std::vector<double> jinv_;
  std::vector<double> jxw_;
};

/// -div(grad u) with (p+1)^d Gauss-Legendre points per cell.
class LaplaceOperator : public LevelOperator
{
public:
  explicit LaplaceOperator(std::shared_ptr<const FESpace> space);
  std::vector<double> element_matrix(CellIndex cell) const override;

protected:
  void cell_apply(CellIndex cell, std::span<const double> in, std::span<double> out,
                  Workspace &ws) const override;
};

/// Linear elasticity -div(sigma(u)), sigma = lambda tr(eps) I + 2 mu eps.
class ElasticityOperator : public LevelOperator
{
public:
  ElasticityOperator(std::shared_ptr<const FESpace> space, double lambda, double mu);
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  std::vector<double> element_matrix(CellIndex cell) const override;

protected:
  void cell_apply(CellIndex cell, std::span<const double> in, std::span<double> out,
                  Workspace &ws) const override;

private:
  double lambda_, mu_;
};

/// Lame parameters from Young's modulus and Poisson's ratio.
struct LameParameters
{
  double lambda;
  double mu;
};
LameParameters lame_from_young_poisson(double young, double poisson);

/// Returns dst = A src (same as op.vmult).
LevelVector apply(const LevelOperator &op, std::span<const double> u);

/// Exact diagonal of the constrained operator; constrained entries are 1.
LevelVector compute_diagonal(const LevelOperator &op);

/// Assembled CSR matrix of the constrained operator built from
/// element_matrix(); constrained rows and columns are zero except for a unit
/// diagonal. Throws Error above max_dofs.
SparseMatrix assemble_oracle(const LevelOperator &op, std::size_t max_dofs = 50000);

/// b_i = int f phi_i + int_{Gamma_N} g . phi_i, constrained entries zeroed.
/// For scalar spaces only component 0 of f and g is used.
LevelVector assemble_rhs(const FESpace &space, const VectorFunction &f,
                         const std::map<int, VectorFunction> &neumann = {});
LevelVector assemble_rhs(const FESpace &space, const ScalarFunction &f);

/// Moves inhomogeneous Dirichlet data to the right-hand side:
/// b -= A_full u_g on free rows, b = g on constrained rows. The solution of
/// A x = b then satisfies the constraints exactly.
void lift_dirichlet(const LevelOperator &op, std::span<double> rhs);

} // namespace nnmg

#endif
