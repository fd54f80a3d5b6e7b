#ifndef NNMG_COMMON_HPP
#define NNMG_COMMON_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnmg
{

/// Coordinates in physical or reference space. Entries beyond the mesh
/// dimension are kept at zero.
using Point = std::array<double, 3>;

using CellIndex = std::size_t;
using DofIndex = std::size_t;

/// Per-DoF coefficient vector of one level.
using LevelVector = std::vector<double>;

using ScalarFunction = std::function<double(const Point &)>;
using VectorFunction = std::function<Point(const Point &)>;

/// Base of all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class SizeMismatch : public Error
{
public:
  SizeMismatch(const std::string &what, std::size_t expected, std::size_t got)
    : Error(what + ": expected size " + std::to_string(expected) + ", got " +
            std::to_string(got))
  {}
};

inline void check_size(const char *what, std::size_t expected, std::size_t got)
{
  if (expected != got)
    throw SizeMismatch(what, expected, got);
}

inline double distance(const Point &a, const Point &b, unsigned int dim)
{
  double s = 0;
  for (unsigned int d = 0; d < dim; ++d)
    s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a)
{
  return std::sqrt(dot(a, a));
}

inline std::size_t ipow(std::size_t base, unsigned int exp)
{
  std::size_t r = 1;
  for (unsigned int i = 0; i < exp; ++i)
    r *= base;
  return r;
}

class Stopwatch
{
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  /// Seconds since the last lap (or construction).
  double lap()
  {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point start_;
};

/// Number of worker threads used by the parallel kernels (1 = serial).
void set_num_threads(unsigned int n);
unsigned int num_threads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint, so bodies that only write to their own index range are
/// deterministic regardless of the thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)> &body);

} // namespace nnmg

#endif
