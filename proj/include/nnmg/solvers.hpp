#ifndef NNMG_SOLVERS_HPP
#define NNMG_SOLVERS_HPP

#include <nnmg/operator.hpp>

#include <cstdint>
#include <memory>

namespace nnmg
{

/// Result of a Lanczos run on D^{-1} A.
struct EigenvalueEstimate
{
  double min_ritz = 0;
  double max_ritz = 0;
  /// max_ritz times the safety factor.
  double lambda_max = 0;
  unsigned int n_iterations = 0;
};

/// Largest eigenvalue of D^{-1} A from n_iter Lanczos steps started from a
/// seeded random vector that is zero on constrained entries. Breakdown stops
/// early and returns the current Ritz values.
EigenvalueEstimate estimate_eigenvalues(const LinearOperator &op, std::span<const double> diagonal,
                                        std::span<const std::uint8_t> constrained_mask,
                                        unsigned int n_iter = 12, std::uint64_t seed = 42,
                                        double safety_factor = 1.1);

struct ChebyshevSettings
{
  unsigned int degree = 3;
  unsigned int lanczos_iterations = 12;
  double safety_factor = 1.1;
  /// Window is [lambda_max / smoothing_range, lambda_max].
  double smoothing_range = 20;
  std::uint64_t seed = 42;
};

/// Chebyshev iteration preconditioned by point Jacobi.
class ChebyshevJacobi
{
public:
  ChebyshevJacobi(std::shared_ptr<const LevelOperator> op, LevelVector diagonal,
                  const ChebyshevSettings &settings = {});

  const ChebyshevSettings &settings() const { return settings_; }
  const EigenvalueEstimate &estimate() const { return estimate_; }
  double lambda_max() const { return estimate_.lambda_max; }
  double lambda_min() const { return estimate_.lambda_max / settings_.smoothing_range; }

  /// m applications of the degree-k iteration starting from x (updated in
  /// place). Pass zero_initial_guess when x is known to be zero.
  void smooth(std::span<const double> b, std::span<double> x, unsigned int m = 1,
              bool zero_initial_guess = false) const;

private:
  std::shared_ptr<const LevelOperator> op_;
  LevelVector inverse_diagonal_;
  ChebyshevSettings settings_;
  EigenvalueEstimate estimate_;
  mutable LevelVector r_, d_, ad_;
};

/// Preconditioner z = M r.
class Preconditioner
{
public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<double> z, std::span<const double> r) const = 0;
};

class IdentityPreconditioner : public Preconditioner
{
public:
  void apply(std::span<double> z, std::span<const double> r) const override;
};

class JacobiPreconditioner : public Preconditioner
{
public:
  explicit JacobiPreconditioner(std::span<const double> diagonal);
  void apply(std::span<double> z, std::span<const double> r) const override;

private:
  LevelVector inverse_diagonal_;
};

struct CgSettings
{
  double reduction = 1e-4;
  unsigned int max_iterations = 1000;
};

struct CgResult
{
  unsigned int iterations = 0;
  double initial_residual = 0;
  double final_residual = 0;
  bool converged = false;
  /// Set when p^T A p <= 0 was encountered.
  bool indefinite = false;
};

/// Preconditioned CG on A x = b starting from x. Stops once the
/// unpreconditioned residual 2-norm has dropped by the requested factor.
CgResult cg_solve(const LinearOperator &op, const Preconditioner &precond,
                  std::span<const double> b, std::span<double> x,
                  const CgSettings &settings = {});

/// Coarsest-level solver: dense Cholesky of the assembled operator up to
/// dense_limit DoFs, CG with Jacobi to a 1e-8 reduction otherwise.
class CoarseSolver
{
public:
  explicit CoarseSolver(std::shared_ptr<const LevelOperator> op, std::size_t dense_limit = 2000,
                        double iterative_reduction = 1e-8);
  ~CoarseSolver();

  bool is_direct() const { return static_cast<bool>(factor_); }
  void solve(std::span<double> x, std::span<const double> b) const;

private:
  struct Factorization;
  std::shared_ptr<const LevelOperator> op_;
  std::unique_ptr<Factorization> factor_;
  LevelVector diagonal_;
  double reduction_;
};

} // namespace nnmg

#endif
