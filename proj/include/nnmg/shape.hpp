#ifndef NNMG_SHAPE_HPP
#define NNMG_SHAPE_HPP

#include <nnmg/common.hpp>

#include <vector>

namespace nnmg
{

/// One-dimensional quadrature rule on [0,1].
struct Quadrature1D
{
  std::vector<double> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1] (exact to degree 2n-1).
Quadrature1D gauss_legendre(unsigned int n);

/// n-point Gauss-Lobatto rule on [0,1] (n >= 2, endpoints included).
Quadrature1D gauss_lobatto(unsigned int n);

/// Lagrange basis of degree p on the Gauss-Lobatto points of [0,1].
class Shape1D
{
public:
  explicit Shape1D(unsigned int degree);

  unsigned int degree() const { return degree_; }
  unsigned int n_nodes() const { return degree_ + 1; }
  const std::vector<double> &nodes() const { return nodes_; }

  /// Writes the p+1 basis values at t into values.
  void values(double t, std::span<double> values) const;
  /// Values and first derivatives.
  void values_and_derivatives(double t, std::span<double> values,
                              std::span<double> derivatives) const;

  std::vector<double> values(double t) const;
  std::vector<double> derivatives(double t) const;

  /// Row-major (points.size() x (p+1)) matrix of basis values at points.
  std::vector<double> value_matrix(std::span<const double> points) const;
  std::vector<double> derivative_matrix(std::span<const double> points) const;

private:
  unsigned int degree_;
  std::vector<double> nodes_;
  std::vector<double> denominators_;
};

/// Basis values (p+1 entries) at t; the entry point used in tests and the
/// examples of the 1D basis.
std::vector<double> eval_shape_1d(unsigned int degree, double t);

} // namespace nnmg

#endif
