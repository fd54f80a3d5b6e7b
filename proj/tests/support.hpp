#ifndef NNMG_TEST_SUPPORT_HPP
#define NNMG_TEST_SUPPORT_HPP

#include <nnmg/multigrid.hpp>

#include <algorithm>
#include <random>

namespace testing
{

using namespace nnmg;

inline LevelVector random_vector(std::size_t n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LevelVector v(n);
  for (auto &x : v)
    x = u(rng);
  return v;
}

inline double max_abs(std::span<const double> v)
{
  double m = 0;
  for (const double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

inline double max_diff(std::span<const double> a, std::span<const double> b)
{
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline std::shared_ptr<const Mesh> share(Mesh m)
{
  return std::make_shared<const Mesh>(std::move(m));
}

/// Reference value of a Lagrange basis on arbitrary nodes, straight from the
/// product formula.
inline double lagrange(const std::vector<double> &nodes, std::size_t i, double t)
{
  double v = 1;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (j != i)
      v *= (t - nodes[j]) / (nodes[i] - nodes[j]);
  return v;
}

/// Tensor-product basis value of local node l at reference point ref.
inline double tensor_basis(const std::vector<double> &nodes, unsigned int dim, std::size_t l,
                           const Point &ref)
{
  const std::size_t n1 = nodes.size();
  double v = 1;
  for (unsigned int d = 0; d < dim; ++d, l /= n1)
    v *= lagrange(nodes, l % n1, ref[d]);
  return v;
}

/// Dense row-major P (n_fine x n_coarse) built row by row from basis
/// evaluation at each fine support point located by brute force over all
/// coarse cells. Constrained rows and columns are zero.
inline std::vector<double> explicit_prolongation(const FESpace &coarse, const FESpace &fine)
{
  const std::size_t nc = coarse.n_components();
  const std::size_t n_f = fine.n_dofs(), n_c = coarse.n_dofs();
  std::vector<double> p(n_f * n_c, 0.0);
  const auto &cmask = coarse.constraints().mask;
  const auto &fmask = fine.constraints().mask;
  const auto &nodes = coarse.shape().nodes();
  const Mesh &cmesh = coarse.mesh();
  const unsigned int dim = cmesh.dim();
  for (std::size_t node = 0; node < fine.n_nodes(); ++node)
  {
    const Point x = fine.support_point(node);
    // lowest accepting cell, else the clamped solution closest to the box
    std::optional<std::pair<CellIndex, Point>> hit, best;
    double best_dist = 1e300;
    for (CellIndex c = 0; c < cmesh.n_cells() && !hit; ++c)
    {
      const auto ref = CellMapping(cmesh, c).try_invert(x);
      if (!ref)
        continue;
      double dist = 0;
      Point clamped = *ref;
      for (unsigned int d = 0; d < dim; ++d)
      {
        const double e = std::max({0.0, -(*ref)[d], (*ref)[d] - 1.0});
        dist += e * e;
        clamped[d] = std::clamp((*ref)[d], 0.0, 1.0);
      }
      if (std::sqrt(dist) <= 1e-10)
        hit = std::make_pair(c, *ref);
      else if (dist < best_dist)
      {
        best_dist = dist;
        best = std::make_pair(c, clamped);
      }
    }
    const auto found = hit ? hit : best;
    if (!found)
      continue;
    const auto cnodes = coarse.cell_nodes(found->first);
    for (std::size_t l = 0; l < cnodes.size(); ++l)
    {
      const double phi = tensor_basis(nodes, dim, l, found->second);
      for (std::size_t c = 0; c < nc; ++c)
      {
        const std::size_t i = node * nc + c, j = cnodes[l] * nc + c;
        if (!fmask[i] && !cmask[j])
          p[i * n_c + j] = phi;
      }
    }
  }
  return p;
}

/// Dense matrix of a linear operator by unit-vector probing, row-major.
inline std::vector<double> dense_matrix(const LinearOperator &op)
{
  const std::size_t n = op.n_dofs();
  std::vector<double> a(n * n);
  LevelVector e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    e[j] = 1;
    op.vmult(col, e);
    e[j] = 0;
    for (std::size_t i = 0; i < n; ++i)
      a[i * n + j] = col[i];
  }
  return a;
}

/// Small dense SPD operator for solver tests.
class DenseOperator : public LinearOperator
{
public:
  DenseOperator(std::size_t n, std::vector<double> a) : n_(n), a_(std::move(a)) {}
  std::size_t n_dofs() const override { return n_; }
  void vmult(std::span<double> dst, std::span<const double> src) const override
  {
    for (std::size_t i = 0; i < n_; ++i)
    {
      double s = 0;
      for (std::size_t j = 0; j < n_; ++j)
        s += a_[i * n_ + j] * src[j];
      dst[i] = s;
    }
  }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

private:
  std::size_t n_;
  std::vector<double> a_;
};

/// 1D Poisson stencil tridiag(-1, 2, -1) / h^2.
inline DenseOperator poisson_1d(std::size_t n)
{
  const double h = 1.0 / double(n + 1);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    a[i * n + i] = 2 / (h * h);
    if (i > 0)
      a[i * n + i - 1] = -1 / (h * h);
    if (i + 1 < n)
      a[i * n + i + 1] = -1 / (h * h);
  }
  return DenseOperator(n, std::move(a));
}

inline std::vector<int> all_ids(unsigned int dim)
{
  std::vector<int> ids;
  for (int i = 0; i < int(2 * dim); ++i)
    ids.push_back(i);
  return ids;
}

} // namespace testing

#endif
