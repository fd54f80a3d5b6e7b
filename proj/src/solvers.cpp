#include <nnmg/solvers.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <random>

namespace nnmg
{

EigenvalueEstimate estimate_eigenvalues(const LinearOperator &op, std::span<const double> diagonal,
                                        std::span<const std::uint8_t> constrained_mask,
                                        unsigned int n_iter, std::uint64_t seed,
                                        double safety_factor)
{
  const std::size_t n = op.n_dofs();
  check_size("estimate_eigenvalues diagonal", n, diagonal.size());
  check_size("estimate_eigenvalues mask", n, constrained_mask.size());
  if (n_iter == 0)
    throw Error("Lanczos needs at least one iteration");

  // Lanczos on the symmetric form D^{-1/2} A D^{-1/2}, which has the
  // spectrum of D^{-1} A.
  LevelVector scale(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!(diagonal[i] > 0))
      throw Error("Jacobi smoothing needs a positive diagonal");
    scale[i] = constrained_mask[i] ? 0.0 : 1.0 / std::sqrt(diagonal[i]);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  LevelVector v(n), v_old(n, 0.0), w(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = constrained_mask[i] ? 0.0 : uniform(rng);
  const double v_norm = norm(v);
  EigenvalueEstimate est;
  if (v_norm == 0)
    return est;
  for (auto &x : v)
    x /= v_norm;

  std::vector<double> alpha, beta;
  double beta_prev = 0;
  for (unsigned int k = 0; k < n_iter; ++k)
  {
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = scale[i] * v[i];
    op.vmult(w, tmp);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = scale[i] * w[i] - beta_prev * v_old[i];
    const double a = dot(w, v);
    for (std::size_t i = 0; i < n; ++i)
      w[i] -= a * v[i];
    alpha.push_back(a);
    const double b = norm(w);
    est.n_iterations = k + 1;
    if (k + 1 == n_iter || b <= 1e-14 * std::abs(a))
      break;
    beta.push_back(b);
    for (std::size_t i = 0; i < n; ++i)
    {
      v_old[i] = v[i];
      v[i] = w[i] / b;
    }
    beta_prev = b;
  }

  const auto m = Eigen::Index(alpha.size());
  Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i + 1 < m; ++i)
    sub[i] = beta[std::size_t(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  est.min_ritz = solver.eigenvalues().minCoeff();
  est.max_ritz = solver.eigenvalues().maxCoeff();
  est.lambda_max = est.max_ritz * safety_factor;
  return est;
}

// ---------------------------------------------------------------------------

ChebyshevJacobi::ChebyshevJacobi(std::shared_ptr<const LevelOperator> op, LevelVector diagonal,
                                 const ChebyshevSettings &settings)
  : op_(std::move(op)), settings_(settings)
{
  const std::size_t n = op_->n_dofs();
  check_size("ChebyshevJacobi diagonal", n, diagonal.size());
  if (settings_.degree == 0)
    throw Error("Chebyshev degree must be positive");
  if (!(settings_.smoothing_range > 1))
    throw Error("Chebyshev smoothing range must exceed 1");
  const auto &mask = op_->space().constraints().mask;
  estimate_ = estimate_eigenvalues(*op_, diagonal, mask, settings_.lanczos_iterations,
                                   settings_.seed, settings_.safety_factor);
  inverse_diagonal_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    inverse_diagonal_[i] = mask[i] ? 0.0 : 1.0 / diagonal[i];
  r_.resize(n);
  d_.resize(n);
  ad_.resize(n);
}

void ChebyshevJacobi::smooth(std::span<const double> b, std::span<double> x, unsigned int m,
                             bool zero_initial_guess) const
{
  const std::size_t n = op_->n_dofs();
  check_size("smooth rhs", n, b.size());
  check_size("smooth solution", n, x.size());
  const double upper = estimate_.lambda_max;
  if (!(upper > 0))
  {
    if (zero_initial_guess)
      std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const double lower = upper / settings_.smoothing_range;
  const double theta = 0.5 * (upper + lower);
  const double delta = 0.5 * (upper - lower);
  const double sigma = theta / delta;

  for (unsigned int app = 0; app < m; ++app)
  {
    double rho = 1.0 / sigma;
    for (unsigned int k = 0; k < settings_.degree; ++k)
    {
      if (app == 0 && k == 0 && zero_initial_guess)
        std::copy(b.begin(), b.end(), r_.begin());
      else
      {
        op_->vmult(ad_, x);
        for (std::size_t i = 0; i < n; ++i)
          r_[i] = b[i] - ad_[i];
      }
      if (k == 0)
      {
        for (std::size_t i = 0; i < n; ++i)
          d_[i] = inverse_diagonal_[i] * r_[i] / theta;
      }
      else
      {
        const double rho_new = 1.0 / (2.0 * sigma - rho);
        const double c1 = rho_new * rho, c2 = 2.0 * rho_new / delta;
        for (std::size_t i = 0; i < n; ++i)
          d_[i] = c1 * d_[i] + c2 * inverse_diagonal_[i] * r_[i];
        rho = rho_new;
      }
      if (app == 0 && k == 0 && zero_initial_guess)
        std::copy(d_.begin(), d_.end(), x.begin());
      else
        for (std::size_t i = 0; i < n; ++i)
          x[i] += d_[i];
    }
  }
}

// ---------------------------------------------------------------------------

void IdentityPreconditioner::apply(std::span<double> z, std::span<const double> r) const
{
  check_size("IdentityPreconditioner", r.size(), z.size());
  std::copy(r.begin(), r.end(), z.begin());
}

JacobiPreconditioner::JacobiPreconditioner(std::span<const double> diagonal)
  : inverse_diagonal_(diagonal.size())
{
  for (std::size_t i = 0; i < diagonal.size(); ++i)
  {
    if (!(diagonal[i] > 0))
      throw Error("Jacobi preconditioner needs a positive diagonal");
    inverse_diagonal_[i] = 1.0 / diagonal[i];
  }
}

void JacobiPreconditioner::apply(std::span<double> z, std::span<const double> r) const
{
  check_size("JacobiPreconditioner", inverse_diagonal_.size(), r.size());
  check_size("JacobiPreconditioner", inverse_diagonal_.size(), z.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    z[i] = inverse_diagonal_[i] * r[i];
}

CgResult cg_solve(const LinearOperator &op, const Preconditioner &precond,
                  std::span<const double> b, std::span<double> x, const CgSettings &settings)
{
  const std::size_t n = op.n_dofs();
  check_size("cg_solve rhs", n, b.size());
  check_size("cg_solve solution", n, x.size());
  LevelVector r(n), z(n), p(n), ap(n);
  op.vmult(ap, x);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = b[i] - ap[i];

  CgResult result;
  result.initial_residual = result.final_residual = norm(r);
  const double target = settings.reduction * result.initial_residual;
  if (result.initial_residual == 0)
  {
    result.converged = true;
    return result;
  }

  precond.apply(z, r);
  p = z;
  double rz = dot(r, z);
  while (result.iterations < settings.max_iterations)
  {
    op.vmult(ap, p);
    const double pap = dot(p, ap);
    if (!(pap > 0))
    {
      result.indefinite = true;
      return result;
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i)
    {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++result.iterations;
    result.final_residual = norm(r);
    if (result.final_residual <= target)
    {
      result.converged = true;
      return result;
    }
    precond.apply(z, r);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  return result;
}

// ---------------------------------------------------------------------------

struct CoarseSolver::Factorization
{
  Eigen::LLT<Eigen::MatrixXd> llt;
};

CoarseSolver::CoarseSolver(std::shared_ptr<const LevelOperator> op, std::size_t dense_limit,
                           double iterative_reduction)
  : op_(std::move(op)), reduction_(iterative_reduction)
{
  const std::size_t n = op_->n_dofs();
  if (n > dense_limit)
  {
    diagonal_ = compute_diagonal(*op_);
    return;
  }
  // dense matrix by probing the matrix-free operator column by column
  const auto size = Eigen::Index(n);
  Eigen::MatrixXd a(size, size);
  LevelVector e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    e[j] = 1.0;
    op_->vmult(col, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      a(Eigen::Index(i), Eigen::Index(j)) = col[i];
  }
  a = 0.5 * (a + a.transpose()).eval();
  factor_ = std::make_unique<Factorization>();
  factor_->llt.compute(a);
  bool singular = factor_->llt.info() != Eigen::Success;
  if (!singular)
  {
    const Eigen::MatrixXd l = factor_->llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      singular = singular || l(i, i) * l(i, i) <= 1e-10 * a(i, i);
  }
  if (singular)
    throw Error("coarse operator is singular: pin the nullspace, for example by adding "
                "Dirichlet constraints");
}

CoarseSolver::~CoarseSolver() = default;

void CoarseSolver::solve(std::span<double> x, std::span<const double> b) const
{
  const std::size_t n = op_->n_dofs();
  check_size("coarse solve rhs", n, b.size());
  check_size("coarse solve solution", n, x.size());
  if (factor_)
  {
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), Eigen::Index(n));
    const Eigen::VectorXd sol = factor_->llt.solve(rhs);
    std::copy(sol.data(), sol.data() + n, x.begin());
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  const JacobiPreconditioner jacobi(diagonal_);
  CgSettings settings;
  settings.reduction = reduction_;
  settings.max_iterations = unsigned(std::max<std::size_t>(1000, 10 * n));
  const auto result = cg_solve(*op_, jacobi, b, x, settings);
  if (result.indefinite)
    throw Error("coarse operator is not positive definite: pin the nullspace, for example by "
                "adding Dirichlet constraints");
  if (!result.converged)
    throw Error("coarse CG did not reach the requested reduction");
}

} // namespace nnmg
