#include <nnmg/tensor.hpp>
#include <nnmg/transfer.hpp>

#include <algorithm>

namespace nnmg
{

Transfer::Transfer(std::shared_ptr<const FESpace> coarse, std::shared_ptr<const FESpace> fine)
  : coarse_(std::move(coarse)), fine_(std::move(fine))
{
  if (coarse_->n_components() != fine_->n_components())
    throw Error("transfer between spaces with different component counts");
  if (coarse_->dim() != fine_->dim())
    throw Error("transfer between meshes of different dimension");
}

LevelVector Transfer::prolongate(std::span<const double> coarse) const
{
  LevelVector fine(fine_->n_dofs());
  prolongate(coarse, fine);
  return fine;
}

LevelVector Transfer::restrict(std::span<const double> fine) const
{
  LevelVector coarse(coarse_->n_dofs());
  restrict(fine, coarse);
  return coarse;
}

// ---------------------------------------------------------------------------

NonNestedTransfer::NonNestedTransfer(std::shared_ptr<const FESpace> coarse,
                                     std::shared_ptr<const FESpace> fine,
                                     const SearchConfig &config)
  : Transfer(std::move(coarse), std::move(fine))
{
  const unsigned int nc = fine_->n_components(), dim = fine_->dim();
  const auto &fmask = fine_->constraints().mask;
  std::vector<std::size_t> nodes;
  std::vector<Point> points;
  for (std::size_t node = 0; node < fine_->n_nodes(); ++node)
  {
    bool free = false;
    for (unsigned int c = 0; c < nc; ++c)
      free = free || !fmask[node * nc + c];
    if (free)
    {
      nodes.push_back(node);
      points.push_back(fine_->support_point(node));
    }
  }

  const Mesh &cmesh = coarse_->mesh();
  const double padding = config.box_padding > 0 ? config.box_padding : default_box_padding(cmesh);
  const AabbTree tree(cmesh, padding);
  const auto located = locate_points(tree, cmesh, points, config);

  const std::size_t n1 = coarse_->degree() + 1;
  records_.reserve(nodes.size());
  tabulation_.resize(nodes.size() * dim * n1);
  std::vector<std::size_t> slot_of_cell(cmesh.n_cells(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    const auto &own = located[i];
    records_.push_back({nodes[i], own.cell, own.reference, own.projected});
    for (unsigned int d = 0; d < dim; ++d)
      coarse_->shape().values(own.reference[d],
                              std::span<double>(&tabulation_[(i * dim + d) * n1], n1));
    if (slot_of_cell[own.cell] == std::numeric_limits<std::size_t>::max())
    {
      slot_of_cell[own.cell] = used_cells_.size();
      used_cells_.push_back(own.cell);
    }
    record_slot_.push_back(slot_of_cell[own.cell]);
  }
  cell_buffer_.resize(used_cells_.size() * coarse_->dofs_per_cell());
}

std::size_t NonNestedTransfer::n_projected() const
{
  return std::size_t(std::count_if(records_.begin(), records_.end(),
                                   [](const TransferRecord &r) { return r.projected; }));
}

std::size_t NonNestedTransfer::memory_bytes() const
{
  return records_.size() * sizeof(TransferRecord) + record_slot_.size() * sizeof(std::size_t) +
         used_cells_.size() * sizeof(CellIndex) + tabulation_.size() * sizeof(double) +
         cell_buffer_.size() * sizeof(double);
}

void NonNestedTransfer::prolongate(std::span<const double> coarse, std::span<double> fine) const
{
  check_size("prolongate coarse", coarse_->n_dofs(), coarse.size());
  check_size("prolongate fine", fine_->n_dofs(), fine.size());
  Stopwatch watch;
  const unsigned int nc = coarse_->n_components(), dim = coarse_->dim();
  const std::size_t nn = coarse_->nodes_per_cell(), n1 = coarse_->degree() + 1;
  const auto &cmask = coarse_->constraints().mask;
  const auto &fmask = fine_->constraints().mask;

  // gather coarse cell values, component-major per cell
  for (std::size_t s = 0; s < used_cells_.size(); ++s)
  {
    const auto nodes = coarse_->cell_nodes(used_cells_[s]);
    double *buf = &cell_buffer_[s * nn * nc];
    for (unsigned int c = 0; c < nc; ++c)
      for (std::size_t l = 0; l < nn; ++l)
      {
        const std::size_t dof = nodes[l] * nc + c;
        buf[c * nn + l] = cmask[dof] ? 0.0 : coarse[dof];
      }
  }
  std::fill(fine.begin(), fine.end(), 0.0);
  timings_.prolongate_gather += watch.lap();

  parallel_for(records_.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r)
    {
      const auto &rec = records_[r];
      const std::array<const double *, 3> basis{&tabulation_[(r * dim) * n1],
                                                &tabulation_[(r * dim + 1) * n1],
                                                dim > 2 ? &tabulation_[(r * dim + 2) * n1] : nullptr};
      const double *buf = &cell_buffer_[record_slot_[r] * nn * nc];
      for (unsigned int c = 0; c < nc; ++c)
      {
        const std::size_t dof = rec.fine_node * nc + c;
        if (!fmask[dof])
          fine[dof] = tensor::evaluate_point(buf + c * nn, n1, dim, basis);
      }
    }
  });
  timings_.prolongate_evaluate += watch.lap();
  ++timings_.n_prolongate;
}

void NonNestedTransfer::restrict(std::span<const double> fine, std::span<double> coarse) const
{
  check_size("restrict fine", fine_->n_dofs(), fine.size());
  check_size("restrict coarse", coarse_->n_dofs(), coarse.size());
  Stopwatch watch;
  const unsigned int nc = coarse_->n_components(), dim = coarse_->dim();
  const std::size_t nn = coarse_->nodes_per_cell(), n1 = coarse_->degree() + 1;
  const auto &cmask = coarse_->constraints().mask;
  const auto &fmask = fine_->constraints().mask;

  std::fill(cell_buffer_.begin(), cell_buffer_.end(), 0.0);
  for (std::size_t r = 0; r < records_.size(); ++r)
  {
    const auto &rec = records_[r];
    const std::array<const double *, 3> basis{&tabulation_[(r * dim) * n1],
                                              &tabulation_[(r * dim + 1) * n1],
                                              dim > 2 ? &tabulation_[(r * dim + 2) * n1] : nullptr};
    double *buf = &cell_buffer_[record_slot_[r] * nn * nc];
    for (unsigned int c = 0; c < nc; ++c)
    {
      const std::size_t dof = rec.fine_node * nc + c;
      if (!fmask[dof])
        tensor::integrate_point(fine[dof], buf + c * nn, n1, dim, basis);
    }
  }
  timings_.restrict_evaluate += watch.lap();

  std::fill(coarse.begin(), coarse.end(), 0.0);
  for (std::size_t s = 0; s < used_cells_.size(); ++s)
  {
    const auto nodes = coarse_->cell_nodes(used_cells_[s]);
    const double *buf = &cell_buffer_[s * nn * nc];
    for (unsigned int c = 0; c < nc; ++c)
      for (std::size_t l = 0; l < nn; ++l)
        coarse[nodes[l] * nc + c] += buf[c * nn + l];
  }
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (cmask[i])
      coarse[i] = 0;
  timings_.restrict_scatter += watch.lap();
  ++timings_.n_restrict;
}

// ---------------------------------------------------------------------------

void CellwiseEmbeddingTransfer::finalize()
{
  const std::size_t n_points = ipow(n_fine_1d_, coarse_->dim());
  weights_.assign(fine_->n_nodes(), 0.0);
  for (const auto node : fine_nodes_)
    weights_[node] += 1.0;
  for (auto &w : weights_)
    w = w > 0 ? 1.0 / w : 0.0;
  const std::size_t n_cells = coarse_->mesh().n_cells();
  coarse_buffer_.resize(n_cells * coarse_->dofs_per_cell());
  fine_buffer_.resize(n_cells * n_points * coarse_->n_components());
}

void CellwiseEmbeddingTransfer::prolongate(std::span<const double> coarse,
                                           std::span<double> fine) const
{
  check_size("prolongate coarse", coarse_->n_dofs(), coarse.size());
  check_size("prolongate fine", fine_->n_dofs(), fine.size());
  Stopwatch watch;
  const unsigned int nc = coarse_->n_components(), dim = coarse_->dim();
  const std::size_t nn = coarse_->nodes_per_cell(), n1 = coarse_->degree() + 1;
  const std::size_t m = n_fine_1d_, n_points = ipow(m, dim);
  const std::size_t n_cells = coarse_->mesh().n_cells();
  const auto &cmask = coarse_->constraints().mask;
  const auto &fmask = fine_->constraints().mask;

  for (CellIndex cell = 0; cell < n_cells; ++cell)
  {
    const auto nodes = coarse_->cell_nodes(cell);
    double *buf = &coarse_buffer_[cell * nn * nc];
    for (unsigned int c = 0; c < nc; ++c)
      for (std::size_t l = 0; l < nn; ++l)
      {
        const std::size_t dof = nodes[l] * nc + c;
        buf[c * nn + l] = cmask[dof] ? 0.0 : coarse[dof];
      }
  }
  timings_.prolongate_gather += watch.lap();

  std::vector<double> t0(n_points), t1(n_points);
  const double *e = embedding_.data();
  for (CellIndex cell = 0; cell < n_cells; ++cell)
    for (unsigned int c = 0; c < nc; ++c)
    {
      const double *in = &coarse_buffer_[(cell * nc + c) * nn];
      double *out = &fine_buffer_[(cell * nc + c) * n_points];
      if (dim == 2)
      {
        tensor::contract<false, false>(e, m, n1, 0, 2, {n1, n1, 1}, in, t0.data());
        tensor::contract<false, false>(e, m, n1, 1, 2, {m, n1, 1}, t0.data(), out);
      }
      else
      {
        tensor::contract<false, false>(e, m, n1, 0, 3, {n1, n1, n1}, in, t0.data());
        tensor::contract<false, false>(e, m, n1, 1, 3, {m, n1, n1}, t0.data(), t1.data());
        tensor::contract<false, false>(e, m, n1, 2, 3, {m, m, n1}, t1.data(), out);
      }
    }
  timings_.prolongate_evaluate += watch.lap();

  std::fill(fine.begin(), fine.end(), 0.0);
  for (CellIndex cell = 0; cell < n_cells; ++cell)
  {
    const std::size_t *nodes = &fine_nodes_[cell * n_points];
    for (unsigned int c = 0; c < nc; ++c)
    {
      const double *vals = &fine_buffer_[(cell * nc + c) * n_points];
      for (std::size_t k = 0; k < n_points; ++k)
      {
        const std::size_t dof = nodes[k] * nc + c;
        if (!fmask[dof])
          fine[dof] = vals[k];
      }
    }
  }
  timings_.prolongate_gather += watch.lap();
  ++timings_.n_prolongate;
}

void CellwiseEmbeddingTransfer::restrict(std::span<const double> fine,
                                         std::span<double> coarse) const
{
  check_size("restrict fine", fine_->n_dofs(), fine.size());
  check_size("restrict coarse", coarse_->n_dofs(), coarse.size());
  Stopwatch watch;
  const unsigned int nc = coarse_->n_components(), dim = coarse_->dim();
  const std::size_t nn = coarse_->nodes_per_cell(), n1 = coarse_->degree() + 1;
  const std::size_t m = n_fine_1d_, n_points = ipow(m, dim);
  const std::size_t n_cells = coarse_->mesh().n_cells();
  const auto &cmask = coarse_->constraints().mask;
  const auto &fmask = fine_->constraints().mask;

  for (CellIndex cell = 0; cell < n_cells; ++cell)
  {
    const std::size_t *nodes = &fine_nodes_[cell * n_points];
    for (unsigned int c = 0; c < nc; ++c)
    {
      double *vals = &fine_buffer_[(cell * nc + c) * n_points];
      for (std::size_t k = 0; k < n_points; ++k)
      {
        const std::size_t dof = nodes[k] * nc + c;
        vals[k] = fmask[dof] ? 0.0 : fine[dof] * weights_[nodes[k]];
      }
    }
  }
  timings_.restrict_scatter += watch.lap();

  std::vector<double> t0(n_points), t1(n_points);
  const double *e = embedding_.data();
  for (CellIndex cell = 0; cell < n_cells; ++cell)
    for (unsigned int c = 0; c < nc; ++c)
    {
      const double *in = &fine_buffer_[(cell * nc + c) * n_points];
      double *out = &coarse_buffer_[(cell * nc + c) * nn];
      if (dim == 2)
      {
        tensor::contract<true, false>(e, m, n1, 1, 2, {m, m, 1}, in, t0.data());
        tensor::contract<true, false>(e, m, n1, 0, 2, {m, n1, 1}, t0.data(), out);
      }
      else
      {
        tensor::contract<true, false>(e, m, n1, 2, 3, {m, m, m}, in, t0.data());
        tensor::contract<true, false>(e, m, n1, 1, 3, {m, m, n1}, t0.data(), t1.data());
        tensor::contract<true, false>(e, m, n1, 0, 3, {m, n1, n1}, t1.data(), out);
      }
    }
  timings_.restrict_evaluate += watch.lap();

  std::fill(coarse.begin(), coarse.end(), 0.0);
  for (CellIndex cell = 0; cell < n_cells; ++cell)
  {
    const auto nodes = coarse_->cell_nodes(cell);
    const double *buf = &coarse_buffer_[cell * nn * nc];
    for (unsigned int c = 0; c < nc; ++c)
      for (std::size_t l = 0; l < nn; ++l)
        coarse[nodes[l] * nc + c] += buf[c * nn + l];
  }
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (cmask[i])
      coarse[i] = 0;
  timings_.restrict_scatter += watch.lap();
  ++timings_.n_restrict;
}

// ---------------------------------------------------------------------------

NestedTransfer::NestedTransfer(std::shared_ptr<const FESpace> coarse,
                               std::shared_ptr<const FESpace> fine)
  : CellwiseEmbeddingTransfer(std::move(coarse), std::move(fine))
{
  if (coarse_->degree() != fine_->degree())
    throw Error("nested transfer needs equal degrees");
  const unsigned int dim = coarse_->dim();
  const unsigned int p = coarse_->degree();
  const Mesh &cmesh = coarse_->mesh(), &fmesh = fine_->mesh();
  if (fmesh.n_cells() != cmesh.n_cells() * (1u << dim))
    throw Error("meshes are not nested by one uniform refinement");

  const AabbTree tree(cmesh, default_box_padding(cmesh));
  std::vector<Point> centers(fmesh.n_cells());
  for (CellIndex f = 0; f < fmesh.n_cells(); ++f)
    centers[f] = fmesh.cell_center(f);
  const auto parents = locate_points(tree, cmesh, centers);

  n_fine_1d_ = 2 * p + 1;
  const std::size_t m = n_fine_1d_, n1 = p + 1, n_points = ipow(m, dim);
  fine_nodes_.assign(cmesh.n_cells() * n_points, std::numeric_limits<std::size_t>::max());
  for (CellIndex f = 0; f < fmesh.n_cells(); ++f)
  {
    const CellIndex parent = parents[f].cell;
    const CellMapping mapping(cmesh, parent);
    std::array<std::size_t, 3> offset{};
    for (unsigned int v = 0; v < fmesh.vertices_per_cell(); ++v)
    {
      const auto ref = mapping.try_invert(fmesh.vertex(f, v));
      if (!ref)
        throw Error("meshes are not nested: cannot invert fine vertex");
      for (unsigned int d = 0; d < dim; ++d)
      {
        const double twice = 2 * (*ref)[d];
        const double rounded = std::round(twice);
        if (std::abs(twice - rounded) > 1e-8)
          throw Error("meshes are not nested: fine vertex off the child lattice");
        const auto bit = (v >> d) & 1u;
        if (v == 0)
          offset[d] = std::size_t(rounded);
        else if (std::size_t(rounded) != offset[d] + bit)
          throw Error("meshes are not nested: child orientation differs from parent");
      }
    }
    const auto fnodes = fine_->cell_nodes(f);
    for (std::size_t l = 0; l < fnodes.size(); ++l)
    {
      std::size_t idx = l, big = 0, stride = 1;
      for (unsigned int d = 0; d < dim; ++d, idx /= n1, stride *= m)
        big += (offset[d] * p + idx % n1) * stride;
      auto &slot = fine_nodes_[parent * n_points + big];
      if (slot != std::numeric_limits<std::size_t>::max() && slot != fnodes[l])
        throw Error("meshes are not nested: inconsistent child numbering");
      slot = fnodes[l];
    }
  }
  if (std::find(fine_nodes_.begin(), fine_nodes_.end(), std::numeric_limits<std::size_t>::max()) !=
      fine_nodes_.end())
    throw Error("meshes are not nested: coarse cell with missing children");

  const auto &nodes = fine_->shape().nodes();
  embedding_.resize(m * n1);
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t i = 0; i < n1; ++i)
      coarse_->shape().values(0.5 * (double(o) + nodes[i]),
                              std::span<double>(&embedding_[(o * p + i) * n1], n1));
  finalize();
}

PolynomialTransfer::PolynomialTransfer(std::shared_ptr<const FESpace> coarse,
                                       std::shared_ptr<const FESpace> fine)
  : CellwiseEmbeddingTransfer(std::move(coarse), std::move(fine))
{
  if (fine_->degree() < 2 || coarse_->degree() + 1 != fine_->degree())
    throw Error("polynomial transfer needs fine degree p >= 2 and coarse degree p - 1");
  if (&coarse_->mesh() != &fine_->mesh() && !(coarse_->mesh() == fine_->mesh()))
    throw Error("polynomial transfer needs both spaces on the same mesh");
  const unsigned int dim = coarse_->dim();
  const std::size_t n1 = coarse_->degree() + 1;
  n_fine_1d_ = fine_->degree() + 1;
  const std::size_t n_points = ipow(n_fine_1d_, dim);
  const std::size_t n_cells = coarse_->mesh().n_cells();
  fine_nodes_.resize(n_cells * n_points);
  for (CellIndex c = 0; c < n_cells; ++c)
  {
    const auto fnodes = fine_->cell_nodes(c);
    std::copy(fnodes.begin(), fnodes.end(), fine_nodes_.begin() + std::ptrdiff_t(c * n_points));
  }
  embedding_.resize(n_fine_1d_ * n1);
  for (std::size_t k = 0; k < n_fine_1d_; ++k)
    coarse_->shape().values(fine_->shape().nodes()[k],
                            std::span<double>(&embedding_[k * n1], n1));
  finalize();
}

std::unique_ptr<NonNestedTransfer> setup_nonnested(std::shared_ptr<const FESpace> coarse,
                                                   std::shared_ptr<const FESpace> fine,
                                                   const SearchConfig &config)
{
  return std::make_unique<NonNestedTransfer>(std::move(coarse), std::move(fine), config);
}

std::unique_ptr<PolynomialTransfer> setup_polynomial(std::shared_ptr<const FESpace> coarse,
                                                     std::shared_ptr<const FESpace> fine)
{
  return std::make_unique<PolynomialTransfer>(std::move(coarse), std::move(fine));
}

} // namespace nnmg
