#include <nnmg/operator.hpp>
#include <nnmg/tensor.hpp>

#include <algorithm>

namespace nnmg
{

using tensor::contract;

void SparseMatrix::vmult(std::span<double> dst, std::span<const double> src) const
{
  check_size("SparseMatrix::vmult src", n_cols, src.size());
  check_size("SparseMatrix::vmult dst", n_rows, dst.size());
  for (std::size_t i = 0; i < n_rows; ++i)
  {
    double s = 0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      s += val[k] * src[col[k]];
    dst[i] = s;
  }
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const
{
  const auto b = col.begin() + std::ptrdiff_t(row_ptr[i]);
  const auto e = col.begin() + std::ptrdiff_t(row_ptr[i + 1]);
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val[std::size_t(it - col.begin())] : 0.0;
}

// ---------------------------------------------------------------------------

LevelOperator::LevelOperator(std::shared_ptr<const FESpace> space)
  : space_(std::move(space)), quad_(gauss_legendre(space_->degree() + 1))
{
  const unsigned int dim = space_->dim();
  const std::size_t nq1 = quad_.points.size();
  n_q_ = ipow(nq1, dim);
  values_1d_ = space_->shape().value_matrix(quad_.points);
  derivatives_1d_ = space_->shape().derivative_matrix(quad_.points);
  weights_.resize(n_q_);
  std::vector<Point> q_points(n_q_);
  for (std::size_t q = 0; q < n_q_; ++q)
  {
    double w = 1;
    std::size_t idx = q;
    Point ref{};
    for (unsigned int d = 0; d < dim; ++d, idx /= nq1)
    {
      w *= quad_.weights[idx % nq1];
      ref[d] = quad_.points[idx % nq1];
    }
    weights_[q] = w;
    q_points[q] = ref;
  }

  const Mesh &mesh = space_->mesh();
  affine_.resize(mesh.n_cells());
  geo_offset_.resize(mesh.n_cells());
  std::size_t offset = 0;
  for (CellIndex c = 0; c < mesh.n_cells(); ++c)
  {
    const CellMapping mapping(mesh, c);
    affine_[c] = mapping.is_affine();
    geo_offset_[c] = offset;
    const std::size_t n_entries = affine_[c] ? 1 : n_q_;
    jinv_.resize((offset + n_entries) * 9);
    jxw_.resize(offset + n_entries);
    for (std::size_t q = 0; q < n_entries; ++q)
    {
      Point ref = q_points[q];
      if (affine_[c])
        for (unsigned int d = 0; d < dim; ++d)
          ref[d] = 0.5;
      const auto jac = mapping.jacobian(ref);
      const double det = determinant(jac, dim);
      if (det <= 0)
        throw Error("non-positive Jacobian in cell " + std::to_string(c));
      const auto inv = inverse(jac, dim);
      for (unsigned int m = 0; m < 3; ++m)
        for (unsigned int i = 0; i < 3; ++i)
          jinv_[(offset + q) * 9 + m * 3 + i] = inv[m][i];
      jxw_[offset + q] = affine_[c] ? det : det * weights_[q];
    }
    offset += n_entries;
  }
}

LevelOperator::Workspace LevelOperator::make_workspace() const
{
  Workspace ws;
  const std::size_t size = std::max(n_q_, space_->nodes_per_cell());
  for (auto &b : ws.buf)
    b.resize(size);
  for (auto &row : ws.grad)
    for (auto &g : row)
      g.resize(n_q_);
  return ws;
}

void LevelOperator::reference_gradients(const double *u, std::array<double *, 3> grads,
                                        Workspace &ws) const
{
  const std::size_t n = space_->degree() + 1, nq = quad_.points.size();
  const double *S = values_1d_.data(), *D = derivatives_1d_.data();
  if (space_->dim() == 2)
  {
    double *bs = ws.buf[0].data(), *bd = ws.buf[1].data();
    contract<false, false>(S, nq, n, 0, 2, {n, n, 1}, u, bs);
    contract<false, false>(D, nq, n, 0, 2, {n, n, 1}, u, bd);
    contract<false, false>(S, nq, n, 1, 2, {nq, n, 1}, bd, grads[0]);
    contract<false, false>(D, nq, n, 1, 2, {nq, n, 1}, bs, grads[1]);
    return;
  }
  double *bs = ws.buf[0].data(), *bd = ws.buf[1].data();
  double *bss = ws.buf[2].data(), *bds = ws.buf[3].data(), *bsd = ws.buf[4].data();
  contract<false, false>(S, nq, n, 0, 3, {n, n, n}, u, bs);
  contract<false, false>(D, nq, n, 0, 3, {n, n, n}, u, bd);
  contract<false, false>(S, nq, n, 1, 3, {nq, n, n}, bs, bss);
  contract<false, false>(D, nq, n, 1, 3, {nq, n, n}, bs, bds);
  contract<false, false>(S, nq, n, 1, 3, {nq, n, n}, bd, bsd);
  contract<false, false>(S, nq, n, 2, 3, {nq, nq, n}, bsd, grads[0]);
  contract<false, false>(S, nq, n, 2, 3, {nq, nq, n}, bds, grads[1]);
  contract<false, false>(D, nq, n, 2, 3, {nq, nq, n}, bss, grads[2]);
}

void LevelOperator::integrate_gradients(std::array<const double *, 3> fluxes, double *v,
                                        Workspace &ws) const
{
  const std::size_t n = space_->degree() + 1, nq = quad_.points.size();
  const double *S = values_1d_.data(), *D = derivatives_1d_.data();
  if (space_->dim() == 2)
  {
    double *ad = ws.buf[0].data(), *as = ws.buf[1].data();
    contract<true, false>(S, nq, n, 1, 2, {nq, nq, 1}, fluxes[0], ad);
    contract<true, false>(D, nq, n, 1, 2, {nq, nq, 1}, fluxes[1], as);
    contract<true, true>(D, nq, n, 0, 2, {nq, n, 1}, ad, v);
    contract<true, true>(S, nq, n, 0, 2, {nq, n, 1}, as, v);
    return;
  }
  double *csd = ws.buf[0].data(), *cds = ws.buf[1].data(), *css = ws.buf[2].data();
  double *as = ws.buf[3].data(), *ad = ws.buf[4].data();
  contract<true, false>(S, nq, n, 2, 3, {nq, nq, nq}, fluxes[0], csd);
  contract<true, false>(S, nq, n, 2, 3, {nq, nq, nq}, fluxes[1], cds);
  contract<true, false>(D, nq, n, 2, 3, {nq, nq, nq}, fluxes[2], css);
  contract<true, false>(D, nq, n, 1, 3, {nq, nq, n}, cds, as);
  contract<true, true>(S, nq, n, 1, 3, {nq, nq, n}, css, as);
  contract<true, false>(S, nq, n, 1, 3, {nq, nq, n}, csd, ad);
  contract<true, true>(S, nq, n, 0, 3, {nq, n, n}, as, v);
  contract<true, true>(D, nq, n, 0, 3, {nq, n, n}, ad, v);
}

void LevelOperator::vmult_unconstrained(std::span<double> dst, std::span<const double> src) const
{
  check_size("LevelOperator::vmult src", n_dofs(), src.size());
  check_size("LevelOperator::vmult dst", n_dofs(), dst.size());
  std::fill(dst.begin(), dst.end(), 0.0);
  const std::size_t ndpc = space_->dofs_per_cell();
  std::vector<DofIndex> dofs(ndpc);
  std::vector<double> in(ndpc), out(ndpc);
  auto ws = make_workspace();
  for (CellIndex c = 0; c < space_->mesh().n_cells(); ++c)
  {
    space_->cell_dofs(c, dofs);
    for (std::size_t i = 0; i < ndpc; ++i)
      in[i] = src[dofs[i]];
    cell_apply(c, in, out, ws);
    for (std::size_t i = 0; i < ndpc; ++i)
      dst[dofs[i]] += out[i];
  }
}

void LevelOperator::vmult(std::span<double> dst, std::span<const double> src) const
{
  check_size("LevelOperator::vmult src", n_dofs(), src.size());
  check_size("LevelOperator::vmult dst", n_dofs(), dst.size());
  std::fill(dst.begin(), dst.end(), 0.0);
  const auto &mask = space_->constraints().mask;
  const std::size_t ndpc = space_->dofs_per_cell();
  std::vector<DofIndex> dofs(ndpc);
  std::vector<double> in(ndpc), out(ndpc);
  auto ws = make_workspace();
  for (CellIndex c = 0; c < space_->mesh().n_cells(); ++c)
  {
    space_->cell_dofs(c, dofs);
    for (std::size_t i = 0; i < ndpc; ++i)
      in[i] = mask[dofs[i]] ? 0.0 : src[dofs[i]];
    cell_apply(c, in, out, ws);
    for (std::size_t i = 0; i < ndpc; ++i)
      dst[dofs[i]] += out[i];
  }
  for (std::size_t i = 0; i < dst.size(); ++i)
    if (mask[i])
      dst[i] = src[i];
}

// ---------------------------------------------------------------------------

namespace
{

// Physical gradients of all local basis functions at every quadrature
// point, computed directly from the mapping (independent of the cached
// geometry and of sum factorization).
struct DirectBasis
{
  std::vector<double> grad; // [q][local node][d]
  std::vector<double> jxw;  // [q]
};

DirectBasis direct_basis(const FESpace &space, const Quadrature1D &quad, CellIndex cell)
{
  const unsigned int dim = space.dim();
  const std::size_t n1 = space.degree() + 1, nq1 = quad.points.size();
  const std::size_t nq = ipow(nq1, dim), nn = space.nodes_per_cell();
  const CellMapping mapping(space.mesh(), cell);
  std::vector<std::vector<double>> val1(nq1), der1(nq1);
  for (std::size_t q = 0; q < nq1; ++q)
  {
    val1[q] = space.shape().values(quad.points[q]);
    der1[q] = space.shape().derivatives(quad.points[q]);
  }
  DirectBasis b;
  b.grad.resize(nq * nn * 3);
  b.jxw.resize(nq);
  for (std::size_t q = 0; q < nq; ++q)
  {
    std::array<std::size_t, 3> qi{};
    Point ref{};
    double w = 1;
    std::size_t idx = q;
    for (unsigned int d = 0; d < dim; ++d, idx /= nq1)
    {
      qi[d] = idx % nq1;
      ref[d] = quad.points[qi[d]];
      w *= quad.weights[qi[d]];
    }
    const auto jac = mapping.jacobian(ref);
    const auto jinv = inverse(jac, dim);
    b.jxw[q] = std::abs(determinant(jac, dim)) * w;
    for (std::size_t l = 0; l < nn; ++l)
    {
      std::array<std::size_t, 3> li{};
      std::size_t lidx = l;
      for (unsigned int d = 0; d < dim; ++d, lidx /= n1)
        li[d] = lidx % n1;
      std::array<double, 3> ref_grad{};
      for (unsigned int m = 0; m < dim; ++m)
      {
        double g = 1;
        for (unsigned int d = 0; d < dim; ++d)
          g *= (d == m) ? der1[qi[d]][li[d]] : val1[qi[d]][li[d]];
        ref_grad[m] = g;
      }
      for (unsigned int i = 0; i < dim; ++i)
      {
        double g = 0;
        for (unsigned int m = 0; m < dim; ++m)
          g += jinv[m][i] * ref_grad[m];
        b.grad[(q * nn + l) * 3 + i] = g;
      }
    }
  }
  return b;
}

} // namespace

LaplaceOperator::LaplaceOperator(std::shared_ptr<const FESpace> space)
  : LevelOperator(std::move(space))
{
  if (space_->n_components() != 1)
    throw Error("LaplaceOperator needs a scalar space");
}

void LaplaceOperator::cell_apply(CellIndex cell, std::span<const double> in,
                                 std::span<double> out, Workspace &ws) const
{
  const unsigned int dim = space_->dim();
  std::array<double *, 3> g{ws.grad[0][0].data(), ws.grad[0][1].data(), ws.grad[0][2].data()};
  reference_gradients(in.data(), g, ws);
  for (std::size_t q = 0; q < n_q_; ++q)
  {
    const double *jinv = inverse_jacobian(cell, q);
    const double w = jxw(cell, q);
    std::array<double, 3> phys{};
    for (unsigned int i = 0; i < dim; ++i)
      for (unsigned int m = 0; m < dim; ++m)
        phys[i] += jinv[m * 3 + i] * g[m][q];
    for (unsigned int m = 0; m < dim; ++m)
    {
      double f = 0;
      for (unsigned int i = 0; i < dim; ++i)
        f += jinv[m * 3 + i] * phys[i];
      g[m][q] = f * w;
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  integrate_gradients({g[0], g[1], g[2]}, out.data(), ws);
}

std::vector<double> LaplaceOperator::element_matrix(CellIndex cell) const
{
  const unsigned int dim = space_->dim();
  const std::size_t nn = space_->nodes_per_cell();
  const auto b = direct_basis(*space_, quad_, cell);
  std::vector<double> k(nn * nn, 0.0);
  for (std::size_t q = 0; q < b.jxw.size(); ++q)
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = 0; j < nn; ++j)
      {
        double s = 0;
        for (unsigned int d = 0; d < dim; ++d)
          s += b.grad[(q * nn + i) * 3 + d] * b.grad[(q * nn + j) * 3 + d];
        k[i * nn + j] += s * b.jxw[q];
      }
  return k;
}

ElasticityOperator::ElasticityOperator(std::shared_ptr<const FESpace> space, double lambda,
                                       double mu)
  : LevelOperator(std::move(space)), lambda_(lambda), mu_(mu)
{
  if (space_->n_components() != space_->dim())
    throw Error("ElasticityOperator needs a vector space with dim components");
}

void ElasticityOperator::cell_apply(CellIndex cell, std::span<const double> in,
                                    std::span<double> out, Workspace &ws) const
{
  const unsigned int dim = space_->dim();
  const std::size_t nn = space_->nodes_per_cell();
  double *comp = ws.buf[7].data();
  for (unsigned int c = 0; c < dim; ++c)
  {
    for (std::size_t l = 0; l < nn; ++l)
      comp[l] = in[l * dim + c];
    reference_gradients(comp, {ws.grad[c][0].data(), ws.grad[c][1].data(), ws.grad[c][2].data()},
                        ws);
  }
  for (std::size_t q = 0; q < n_q_; ++q)
  {
    const double *jinv = inverse_jacobian(cell, q);
    const double w = jxw(cell, q);
    double grad[3][3] = {};
    for (unsigned int c = 0; c < dim; ++c)
      for (unsigned int i = 0; i < dim; ++i)
        for (unsigned int m = 0; m < dim; ++m)
          grad[c][i] += jinv[m * 3 + i] * ws.grad[c][m][q];
    double trace = 0;
    for (unsigned int c = 0; c < dim; ++c)
      trace += grad[c][c];
    double stress[3][3];
    for (unsigned int c = 0; c < dim; ++c)
      for (unsigned int i = 0; i < dim; ++i)
        stress[c][i] = mu_ * (grad[c][i] + grad[i][c]) + (c == i ? lambda_ * trace : 0.0);
    for (unsigned int c = 0; c < dim; ++c)
      for (unsigned int m = 0; m < dim; ++m)
      {
        double f = 0;
        for (unsigned int i = 0; i < dim; ++i)
          f += stress[c][i] * jinv[m * 3 + i];
        ws.grad[c][m][q] = f * w;
      }
  }
  for (unsigned int c = 0; c < dim; ++c)
  {
    std::fill(comp, comp + nn, 0.0);
    integrate_gradients({ws.grad[c][0].data(), ws.grad[c][1].data(), ws.grad[c][2].data()}, comp,
                        ws);
    for (std::size_t l = 0; l < nn; ++l)
      out[l * dim + c] = comp[l];
  }
}

std::vector<double> ElasticityOperator::element_matrix(CellIndex cell) const
{
  const unsigned int dim = space_->dim();
  const std::size_t nn = space_->nodes_per_cell(), nd = nn * dim;
  const auto b = direct_basis(*space_, quad_, cell);
  std::vector<double> k(nd * nd, 0.0);
  for (std::size_t q = 0; q < b.jxw.size(); ++q)
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = 0; j < nn; ++j)
      {
        const double *gi = &b.grad[(q * nn + i) * 3];
        const double *gj = &b.grad[(q * nn + j) * 3];
        double gg = 0;
        for (unsigned int d = 0; d < dim; ++d)
          gg += gi[d] * gj[d];
        for (unsigned int a = 0; a < dim; ++a)
          for (unsigned int bb = 0; bb < dim; ++bb)
          {
            const double v = lambda_ * gi[a] * gj[bb] +
                             mu_ * ((a == bb ? gg : 0.0) + gi[bb] * gj[a]);
            k[(i * dim + a) * nd + j * dim + bb] += v * b.jxw[q];
          }
      }
  return k;
}

LameParameters lame_from_young_poisson(double young, double poisson)
{
  return {young * poisson / ((1 - 2 * poisson) * (1 + poisson)), young / (2 * (1 + poisson))};
}

// ---------------------------------------------------------------------------

LevelVector apply(const LevelOperator &op, std::span<const double> u)
{
  LevelVector v(op.n_dofs());
  op.vmult(v, u);
  return v;
}

LevelVector compute_diagonal(const LevelOperator &op)
{
  const FESpace &space = op.space();
  const std::size_t ndpc = space.dofs_per_cell();
  LevelVector diag(space.n_dofs(), 0.0);
  std::vector<DofIndex> dofs(ndpc);
  std::vector<double> in(ndpc, 0.0), out(ndpc);
  auto ws = op.make_workspace();
  for (CellIndex c = 0; c < space.mesh().n_cells(); ++c)
  {
    space.cell_dofs(c, dofs);
    for (std::size_t i = 0; i < ndpc; ++i)
    {
      in[i] = 1.0;
      op.cell_apply(c, in, out, ws);
      in[i] = 0.0;
      diag[dofs[i]] += out[i];
    }
  }
  const auto &mask = space.constraints().mask;
  for (std::size_t i = 0; i < diag.size(); ++i)
    if (mask[i])
      diag[i] = 1.0;
  return diag;
}

SparseMatrix assemble_oracle(const LevelOperator &op, std::size_t max_dofs)
{
  const FESpace &space = op.space();
  const std::size_t n = space.n_dofs();
  if (n > max_dofs)
    throw Error("assemble_oracle: " + std::to_string(n) + " DoFs exceed the limit of " +
                std::to_string(max_dofs));
  const auto &mask = space.constraints().mask;
  const std::size_t ndpc = space.dofs_per_cell();
  std::vector<std::map<std::size_t, double>> rows(n);
  std::vector<DofIndex> dofs(ndpc);
  for (CellIndex c = 0; c < space.mesh().n_cells(); ++c)
  {
    space.cell_dofs(c, dofs);
    const auto k = op.element_matrix(c);
    for (std::size_t i = 0; i < ndpc; ++i)
    {
      if (mask[dofs[i]])
        continue;
      for (std::size_t j = 0; j < ndpc; ++j)
        if (!mask[dofs[j]])
          rows[dofs[i]][dofs[j]] += k[i * ndpc + j];
    }
  }
  SparseMatrix m;
  m.n_rows = m.n_cols = n;
  m.row_ptr.push_back(0);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (mask[i])
      rows[i][i] = 1.0;
    for (const auto &[j, v] : rows[i])
    {
      m.col.push_back(j);
      m.val.push_back(v);
    }
    m.row_ptr.push_back(m.col.size());
  }
  return m;
}

LevelVector assemble_rhs(const FESpace &space, const VectorFunction &f,
                         const std::map<int, VectorFunction> &neumann)
{
  const Mesh &mesh = space.mesh();
  const auto available = mesh.boundary_ids();
  for (const auto &[id, g] : neumann)
    if (std::find(available.begin(), available.end(), id) == available.end())
      throw Error("unknown boundary id " + std::to_string(id));

  const unsigned int dim = space.dim(), nc = space.n_components();
  const std::size_t n1 = space.degree() + 1, nn = space.nodes_per_cell();
  const auto quad = gauss_legendre(space.degree() + 1);
  const std::size_t nq1 = quad.points.size();
  std::vector<std::vector<double>> val1(nq1);
  for (std::size_t q = 0; q < nq1; ++q)
    val1[q] = space.shape().values(quad.points[q]);
  const auto end_values_0 = space.shape().values(0.0), end_values_1 = space.shape().values(1.0);

  LevelVector b(space.n_dofs(), 0.0);
  if (f)
    for (CellIndex c = 0; c < mesh.n_cells(); ++c)
    {
      const CellMapping mapping(mesh, c);
      const auto nodes = space.cell_nodes(c);
      for (std::size_t q = 0; q < ipow(nq1, dim); ++q)
      {
        std::array<std::size_t, 3> qi{};
        Point ref{};
        double w = 1;
        std::size_t idx = q;
        for (unsigned int d = 0; d < dim; ++d, idx /= nq1)
        {
          qi[d] = idx % nq1;
          ref[d] = quad.points[qi[d]];
          w *= quad.weights[qi[d]];
        }
        const double jxw = determinant(mapping.jacobian(ref), dim) * w;
        const Point value = f(mapping.map_to_real(ref));
        for (std::size_t l = 0; l < nn; ++l)
        {
          double phi = 1;
          std::size_t lidx = l;
          for (unsigned int d = 0; d < dim; ++d, lidx /= n1)
            phi *= val1[qi[d]][lidx % n1];
          for (unsigned int comp = 0; comp < nc; ++comp)
            b[nodes[l] * nc + comp] += value[comp] * phi * jxw;
        }
      }
    }

  for (const auto &bf : mesh.boundary_faces())
  {
    auto it = neumann.find(bf.boundary_id);
    if (it == neumann.end() || !it->second)
      continue;
    const CellMapping mapping(mesh, bf.cell);
    const auto nodes = space.cell_nodes(bf.cell);
    const unsigned int axis = bf.face / 2;
    const double side = bf.face % 2;
    std::array<unsigned int, 2> tangential{};
    for (unsigned int d = 0, t = 0; d < dim; ++d)
      if (d != axis)
        tangential[t++] = d;
    for (std::size_t q = 0; q < ipow(nq1, dim - 1); ++q)
    {
      Point ref{};
      ref[axis] = side;
      std::array<std::size_t, 3> qi{};
      double w = 1;
      std::size_t idx = q;
      for (unsigned int t = 0; t + 1 < dim; ++t, idx /= nq1)
      {
        qi[tangential[t]] = idx % nq1;
        ref[tangential[t]] = quad.points[qi[tangential[t]]];
        w *= quad.weights[qi[tangential[t]]];
      }
      const auto jac = mapping.jacobian(ref);
      double measure;
      if (dim == 2)
        measure = std::hypot(jac[0][tangential[0]], jac[1][tangential[0]]);
      else
      {
        const unsigned int a = tangential[0], bb = tangential[1];
        const double cx = jac[1][a] * jac[2][bb] - jac[2][a] * jac[1][bb];
        const double cy = jac[2][a] * jac[0][bb] - jac[0][a] * jac[2][bb];
        const double cz = jac[0][a] * jac[1][bb] - jac[1][a] * jac[0][bb];
        measure = std::sqrt(cx * cx + cy * cy + cz * cz);
      }
      const Point value = it->second(mapping.map_to_real(ref));
      for (std::size_t l = 0; l < nn; ++l)
      {
        double phi = 1;
        std::size_t lidx = l;
        for (unsigned int d = 0; d < dim; ++d, lidx /= n1)
        {
          const std::size_t i = lidx % n1;
          if (d == axis)
            phi *= side == 0 ? end_values_0[i] : end_values_1[i];
          else
            phi *= val1[qi[d]][i];
        }
        if (phi == 0)
          continue;
        for (unsigned int comp = 0; comp < nc; ++comp)
          b[nodes[l] * nc + comp] += value[comp] * phi * w * measure;
      }
    }
  }
  space.constraints().set_zero(b);
  return b;
}

LevelVector assemble_rhs(const FESpace &space, const ScalarFunction &f)
{
  return assemble_rhs(space, VectorFunction([&f](const Point &x) {
                        const double v = f(x);
                        return Point{v, v, v};
                      }));
}

void lift_dirichlet(const LevelOperator &op, std::span<double> rhs)
{
  const Constraints &cons = op.space().constraints();
  check_size("lift_dirichlet", op.n_dofs(), rhs.size());
  LevelVector ug(op.n_dofs(), 0.0), aug(op.n_dofs());
  cons.distribute(ug);
  op.vmult_unconstrained(aug, ug);
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = cons.is_constrained(i) ? cons.values[i] : rhs[i] - aug[i];
}

} // namespace nnmg
