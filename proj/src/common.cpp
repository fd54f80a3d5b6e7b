#include <nnmg/common.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

namespace nnmg
{

namespace
{
std::atomic<unsigned int> n_threads{1};
}

void set_num_threads(unsigned int n)
{
  n_threads = std::max(1u, n);
}

unsigned int num_threads()
{
  return n_threads;
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)> &body)
{
  const std::size_t workers = std::min<std::size_t>(n_threads, n);
  if (workers <= 1 || n < 256)
  {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w)
  {
    const std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b < e)
      pool.emplace_back(body, b, e);
  }
  body(0, std::min(n, chunk));
  for (auto &t : pool)
    t.join();
}

} // namespace nnmg
