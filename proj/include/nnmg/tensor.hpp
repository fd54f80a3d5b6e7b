#ifndef NNMG_TENSOR_HPP
#define NNMG_TENSOR_HPP

#include <array>
#include <cstddef>

namespace nnmg::tensor
{

/// Applies a row-major (rows x cols) matrix along one axis of a tensor
/// stored x-fastest with extents ext (ext[axis] == cols on input). The
/// output has ext[axis] replaced by rows. With transpose the matrix is read
/// as its transpose, i.e. the input extent along axis must equal rows and
/// the output extent is cols. With add the result is accumulated into out.
template <bool transpose, bool add>
inline void contract(const double *matrix, std::size_t rows, std::size_t cols,
                     unsigned int axis, unsigned int dim,
                     const std::array<std::size_t, 3> &ext, const double *in, double *out)
{
  std::size_t stride = 1, outer = 1;
  for (unsigned int a = 0; a < axis; ++a)
    stride *= ext[a];
  for (unsigned int a = axis + 1; a < dim; ++a)
    outer *= ext[a];
  const std::size_t n_in = transpose ? rows : cols;
  const std::size_t n_out = transpose ? cols : rows;
  for (std::size_t o = 0; o < outer; ++o)
  {
    const double *src = in + o * n_in * stride;
    double *dst = out + o * n_out * stride;
    for (std::size_t r = 0; r < n_out; ++r)
      for (std::size_t s = 0; s < stride; ++s)
      {
        double sum = 0;
        for (std::size_t c = 0; c < n_in; ++c)
          sum += (transpose ? matrix[c * cols + r] : matrix[r * cols + c]) * src[c * stride + s];
        if constexpr (add)
          dst[r * stride + s] += sum;
        else
          dst[r * stride + s] = sum;
      }
  }
}

/// Evaluates a tensor-product polynomial with coefficients coef
/// (n^dim entries, x fastest) at one point whose 1D basis values per
/// direction are given in basis[d] (n entries each).
inline double evaluate_point(const double *coef, std::size_t n, unsigned int dim,
                             const std::array<const double *, 3> &basis)
{
  if (dim == 2)
  {
    double r = 0;
    for (std::size_t j = 0; j < n; ++j)
    {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i)
        s += basis[0][i] * coef[j * n + i];
      r += basis[1][j] * s;
    }
    return r;
  }
  double r = 0;
  for (std::size_t k = 0; k < n; ++k)
  {
    double t = 0;
    for (std::size_t j = 0; j < n; ++j)
    {
      double s = 0;
      const double *c = coef + (k * n + j) * n;
      for (std::size_t i = 0; i < n; ++i)
        s += basis[0][i] * c[i];
      t += basis[1][j] * s;
    }
    r += basis[2][k] * t;
  }
  return r;
}

/// Transpose of evaluate_point: coef[i...] += value * prod_d basis[d][i_d].
inline void integrate_point(double value, double *coef, std::size_t n, unsigned int dim,
                            const std::array<const double *, 3> &basis)
{
  if (dim == 2)
  {
    for (std::size_t j = 0; j < n; ++j)
    {
      const double vj = value * basis[1][j];
      for (std::size_t i = 0; i < n; ++i)
        coef[j * n + i] += vj * basis[0][i];
    }
    return;
  }
  for (std::size_t k = 0; k < n; ++k)
  {
    const double vk = value * basis[2][k];
    for (std::size_t j = 0; j < n; ++j)
    {
      const double vj = vk * basis[1][j];
      double *c = coef + (k * n + j) * n;
      for (std::size_t i = 0; i < n; ++i)
        c[i] += vj * basis[0][i];
    }
  }
}

} // namespace nnmg::tensor

#endif
