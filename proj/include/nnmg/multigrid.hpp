#ifndef NNMG_MULTIGRID_HPP
#define NNMG_MULTIGRID_HPP

#include <nnmg/solvers.hpp>
#include <nnmg/transfer.hpp>

#include <memory>
#include <optional>
#include <vector>

namespace nnmg
{

/// Exclusive wall-clock seconds spent per V-cycle component on one level.
struct LevelTimings
{
  double pre_smooth = 0;
  double residual = 0;
  double restrict = 0;
  double coarse = 0;
  double prolongate = 0;
  double post_smooth = 0;

  double total() const { return pre_smooth + residual + restrict + coarse + prolongate + post_smooth; }
};

struct MultigridLevel
{
  std::shared_ptr<const FESpace> space;
  std::shared_ptr<const LevelOperator> op;
  LevelVector diagonal;
  std::unique_ptr<ChebyshevJacobi> smoother;
};

/// Level hierarchy driving the V-cycle. Level 0 is the coarsest,
/// transfers[l] connects level l (coarse) and level l + 1 (fine).
class MultigridHierarchy
{
public:
  MultigridHierarchy(std::vector<MultigridLevel> levels,
                     std::vector<std::unique_ptr<Transfer>> transfers,
                     std::size_t coarse_dense_limit = 2000);

  std::size_t n_levels() const { return levels_.size(); }
  const MultigridLevel &level(std::size_t l) const { return levels_[l]; }
  const MultigridLevel &finest() const { return levels_.back(); }
  const Transfer &transfer(std::size_t l) const { return *transfers_[l]; }
  const CoarseSolver &coarse_solver() const { return *coarse_; }

  unsigned int m1 = 1;
  unsigned int m2 = 1;

  /// One V-cycle on level l for the residual equation A_l d = f; returns d.
  LevelVector v_cycle(std::size_t l, std::span<const double> f) const;
  /// z = V-cycle on the finest level applied to r.
  void precondition(std::span<double> z, std::span<const double> r) const;

  const std::vector<LevelTimings> &timings() const { return timings_; }
  double total_vcycle_time() const { return vcycle_time_; }
  std::size_t n_vcycles() const { return n_vcycles_; }
  void reset_timings() const;

private:
  void v_cycle(std::size_t l, std::span<const double> f, std::span<double> x) const;

  std::vector<MultigridLevel> levels_;
  std::vector<std::unique_ptr<Transfer>> transfers_;
  std::unique_ptr<CoarseSolver> coarse_;
  mutable std::vector<LevelTimings> timings_;
  mutable double vcycle_time_ = 0;
  mutable std::size_t n_vcycles_ = 0;
  mutable std::vector<LevelVector> residual_, coarse_rhs_, coarse_sol_, correction_;
};

/// Adapts a hierarchy as CG preconditioner.
class MultigridPreconditioner : public Preconditioner
{
public:
  explicit MultigridPreconditioner(const MultigridHierarchy &h) : h_(h) {}
  void apply(std::span<double> z, std::span<const double> r) const override
  {
    h_.precondition(z, r);
  }

private:
  const MultigridHierarchy &h_;
};

enum class CoarseningMode
{
  h_only,
  hp
};

enum class TransferPath
{
  non_nested,
  nested
};

/// PDE and boundary data of the level operators.
struct ProblemSetup
{
  enum class Kind
  {
    poisson,
    elasticity
  } kind = Kind::poisson;
  double lambda = 1;
  double mu = 1;
  /// Homogeneous Dirichlet boundary ids.
  std::vector<int> dirichlet_ids;
};

struct HierarchySettings
{
  CoarseningMode mode = CoarseningMode::h_only;
  TransferPath path = TransferPath::non_nested;
  ChebyshevSettings smoother;
  SearchConfig search;
  std::size_t coarse_dense_limit = 2000;
};

std::shared_ptr<FESpace> build_level_space(std::shared_ptr<const Mesh> mesh, unsigned int degree,
                                           const ProblemSetup &problem);
std::shared_ptr<LevelOperator> build_level_operator(std::shared_ptr<const FESpace> space,
                                                    const ProblemSetup &problem);

/// Builds the hierarchy over meshes ordered coarse to fine. In hp mode the
/// degrees 1, ..., p_fine - 1 on the coarsest mesh are put below the
/// geometric levels.
std::unique_ptr<MultigridHierarchy>
build_hp_hierarchy(const std::vector<std::shared_ptr<const Mesh>> &meshes, unsigned int p_fine,
                   const ProblemSetup &problem, const HierarchySettings &settings = {});

} // namespace nnmg

#endif
