#include <nnmg/shape.hpp>

#include <numbers>

namespace nnmg
{

namespace
{

// Legendre polynomial P_n and its derivative at x in [-1,1].
std::pair<double, double> legendre(unsigned int n, double x)
{
  double p0 = 1, p1 = x;
  if (n == 0)
    return {1.0, 0.0};
  for (unsigned int k = 2; k <= n; ++k)
  {
    const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = std::abs(1 - x * x) < 1e-300 ? 0.0 : n * (p0 - x * p1) / (1 - x * x);
  return {p1, dp};
}

} // namespace

Quadrature1D gauss_legendre(unsigned int n)
{
  if (n == 0)
    throw Error("Gauss-Legendre rule needs at least one point");
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  for (unsigned int i = 0; i < n; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it)
    {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const auto [p, dp] = legendre(n, x);
    // ascending order on [0,1]
    q.points[n - 1 - i] = 0.5 * (1 + x);
    q.weights[n - 1 - i] = 1.0 / ((1 - x * x) * dp * dp);
  }
  return q;
}

Quadrature1D gauss_lobatto(unsigned int n)
{
  if (n < 2)
    throw Error("Gauss-Lobatto rule needs at least two points");
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  const unsigned int m = n - 1;
  q.points[0] = 0;
  q.points[m] = 1;
  q.weights[0] = q.weights[m] = 1.0 / (n * m);
  // Interior nodes are the roots of P'_m; Newton on P'_m using
  // (1-x^2) P''_m = 2x P'_m - m(m+1) P_m.
  for (unsigned int i = 1; i < m; ++i)
  {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it)
    {
      const auto [p, dp] = legendre(m, x);
      const double ddp = (2 * x * dp - m * (m + 1.0) * p) / (1 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const auto [p, dp] = legendre(m, x);
    q.points[i] = 0.5 * (1 + x);
    q.weights[i] = 1.0 / (n * m * p * p);
  }
  // exact symmetry
  for (unsigned int i = 0; i < n / 2; ++i)
  {
    const double a = 0.5 * (q.points[i] + 1 - q.points[m - i]);
    q.points[i] = a;
    q.points[m - i] = 1 - a;
  }
  if (n % 2 == 1)
    q.points[n / 2] = 0.5;
  return q;
}

Shape1D::Shape1D(unsigned int degree) : degree_(degree)
{
  if (degree == 0)
    throw Error("shape functions need degree >= 1");
  nodes_ = gauss_lobatto(degree + 1).points;
  denominators_.resize(degree + 1);
  for (unsigned int i = 0; i <= degree; ++i)
  {
    double d = 1;
    for (unsigned int j = 0; j <= degree; ++j)
      if (j != i)
        d *= nodes_[i] - nodes_[j];
    denominators_[i] = 1.0 / d;
  }
}

void Shape1D::values(double t, std::span<double> values) const
{
  const unsigned int n = degree_ + 1;
  for (unsigned int i = 0; i < n; ++i)
  {
    double v = denominators_[i];
    for (unsigned int j = 0; j < n; ++j)
      if (j != i)
        v *= t - nodes_[j];
    values[i] = v;
  }
}

void Shape1D::values_and_derivatives(double t, std::span<double> values,
                                     std::span<double> derivatives) const
{
  const unsigned int n = degree_ + 1;
  for (unsigned int i = 0; i < n; ++i)
  {
    double v = 1, dv = 0;
    for (unsigned int j = 0; j < n; ++j)
      if (j != i)
      {
        dv = dv * (t - nodes_[j]) + v;
        v *= t - nodes_[j];
      }
    values[i] = v * denominators_[i];
    derivatives[i] = dv * denominators_[i];
  }
}

std::vector<double> Shape1D::values(double t) const
{
  std::vector<double> v(n_nodes());
  values(t, v);
  return v;
}

std::vector<double> Shape1D::derivatives(double t) const
{
  std::vector<double> v(n_nodes()), d(n_nodes());
  values_and_derivatives(t, v, d);
  return d;
}

std::vector<double> Shape1D::value_matrix(std::span<const double> points) const
{
  std::vector<double> m(points.size() * n_nodes());
  for (std::size_t q = 0; q < points.size(); ++q)
    values(points[q], std::span<double>(m.data() + q * n_nodes(), n_nodes()));
  return m;
}

std::vector<double> Shape1D::derivative_matrix(std::span<const double> points) const
{
  std::vector<double> m(points.size() * n_nodes()), tmp(n_nodes());
  for (std::size_t q = 0; q < points.size(); ++q)
    values_and_derivatives(points[q], tmp,
                           std::span<double>(m.data() + q * n_nodes(), n_nodes()));
  return m;
}

std::vector<double> eval_shape_1d(unsigned int degree, double t)
{
  return Shape1D(degree).values(t);
}

} // namespace nnmg
