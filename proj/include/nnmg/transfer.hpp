#ifndef NNMG_TRANSFER_HPP
#define NNMG_TRANSFER_HPP

#include <nnmg/fespace.hpp>
#include <nnmg/geosearch.hpp>

#include <memory>
#include <string>

namespace nnmg
{

/// Accumulated wall-clock seconds of transfer calls, split into the
/// evaluation kernels and the gather/scatter of global vectors.
struct TransferTimings
{
  double prolongate_evaluate = 0;
  double prolongate_gather = 0;
  double restrict_evaluate = 0;
  double restrict_scatter = 0;
  std::size_t n_prolongate = 0;
  std::size_t n_restrict = 0;
};

/// Two-level intergrid operator between consecutive levels.
/// Constrained fine entries of a prolongated vector are zero, constrained
/// coarse entries of a restricted vector are zero, and constrained input
/// entries are ignored, so restrict is the exact transpose of prolongate.
class Transfer
{
public:
  Transfer(std::shared_ptr<const FESpace> coarse, std::shared_ptr<const FESpace> fine);
  virtual ~Transfer() = default;

  const FESpace &coarse_space() const { return *coarse_; }
  const FESpace &fine_space() const { return *fine_; }
  std::shared_ptr<const FESpace> coarse_space_ptr() const { return coarse_; }
  std::shared_ptr<const FESpace> fine_space_ptr() const { return fine_; }

  virtual std::string kind() const = 0;
  virtual void prolongate(std::span<const double> coarse, std::span<double> fine) const = 0;
  virtual void restrict(std::span<const double> fine, std::span<double> coarse) const = 0;

  LevelVector prolongate(std::span<const double> coarse) const;
  LevelVector restrict(std::span<const double> fine) const;

  const TransferTimings &timings() const { return timings_; }
  void reset_timings() const { timings_ = {}; }

protected:
  std::shared_ptr<const FESpace> coarse_;
  std::shared_ptr<const FESpace> fine_;
  mutable TransferTimings timings_;
};

/// One fine transfer point located in the coarse mesh.
struct TransferRecord
{
  std::size_t fine_node;
  CellIndex coarse_cell;
  Point reference;
  bool projected;
};

/// Non-nested transfer by point evaluation: every fine support point that
/// carries an unconstrained DoF is located in the coarse mesh once; the
/// prolongation evaluates the coarse field there with per-point sum
/// factorization over tabulated 1D basis values. No global matrix is formed.
class NonNestedTransfer : public Transfer
{
public:
  NonNestedTransfer(std::shared_ptr<const FESpace> coarse, std::shared_ptr<const FESpace> fine,
                    const SearchConfig &config = {});

  std::string kind() const override { return "non-nested"; }
  using Transfer::prolongate;
  using Transfer::restrict;
  void prolongate(std::span<const double> coarse, std::span<double> fine) const override;
  void restrict(std::span<const double> fine, std::span<double> coarse) const override;

  const std::vector<TransferRecord> &records() const { return records_; }
  std::size_t n_projected() const;
  /// Bytes held by records, tabulation and cell buffers.
  std::size_t memory_bytes() const;

private:
  std::vector<TransferRecord> records_;
  std::vector<std::size_t> record_slot_;  // record -> slot in used_cells_
  std::vector<CellIndex> used_cells_;
  std::vector<double> tabulation_;        // [record][d][n1]
  mutable std::vector<double> cell_buffer_;
};

/// Shared machinery of transfers whose fine DoFs form a tensor-product grid
/// inside every coarse cell (nested h-refinement and p-coarsening). These use
/// classical sum factorization over all points of a cell.
class CellwiseEmbeddingTransfer : public Transfer
{
public:
  using Transfer::Transfer;
  using Transfer::prolongate;
  using Transfer::restrict;
  void prolongate(std::span<const double> coarse, std::span<double> fine) const override;
  void restrict(std::span<const double> fine, std::span<double> coarse) const override;

protected:
  /// Finishes setup once fine_nodes_ and embedding_ are filled.
  void finalize();

  std::size_t n_fine_1d_ = 0;           // points per direction per coarse cell
  std::vector<double> embedding_;       // (n_fine_1d x n_coarse_1d)
  std::vector<std::size_t> fine_nodes_; // [coarse cell][n_fine_1d^d]
  std::vector<double> weights_;         // per fine node 1 / multiplicity
  mutable std::vector<double> coarse_buffer_, fine_buffer_;
};

/// Fast path for nested levels where every coarse cell is split into 2^d
/// children; coarse and fine degree are equal.
class NestedTransfer : public CellwiseEmbeddingTransfer
{
public:
  NestedTransfer(std::shared_ptr<const FESpace> coarse, std::shared_ptr<const FESpace> fine);
  std::string kind() const override { return "nested"; }
};

/// Q^{p-1} -> Q^p on the same mesh.
class PolynomialTransfer : public CellwiseEmbeddingTransfer
{
public:
  PolynomialTransfer(std::shared_ptr<const FESpace> coarse, std::shared_ptr<const FESpace> fine);
  std::string kind() const override { return "polynomial"; }
};

std::unique_ptr<NonNestedTransfer> setup_nonnested(std::shared_ptr<const FESpace> coarse,
                                                   std::shared_ptr<const FESpace> fine,
                                                   const SearchConfig &config = {});
std::unique_ptr<PolynomialTransfer> setup_polynomial(std::shared_ptr<const FESpace> coarse,
                                                     std::shared_ptr<const FESpace> fine);

} // namespace nnmg

#endif
