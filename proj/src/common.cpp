#include "fraconc/common.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace fraconc {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) {
  if (n < 1) n = 1;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0 && n > 4 * hw) n = 4 * hw;
  g_threads.store(n);
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  const int nt = thread_count();
  if (nt <= 1 || count < 2) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{begin};
  const std::size_t chunk = std::max<std::size_t>(1, count / (8 * nt));
  auto worker = [&]() {
    for (;;) {
      std::size_t i0 = cursor.fetch_add(chunk);
      if (i0 >= end) return;
      std::size_t i1 = std::min(end, i0 + chunk);
      for (std::size_t i = i0; i < i1; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (int t = 0; t < nt - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

namespace {
double sum_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return sum_range(v, half) + sum_range(v + half, n - half);
}
}  // namespace

double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 1024;
  if (v.size() <= kBlock) return sum_range(v.data(), v.size());
  std::vector<double> partial;
  partial.reserve((v.size() + kBlock - 1) / kBlock);
  for (std::size_t i = 0; i < v.size(); i += kBlock) {
    std::size_t m = std::min(kBlock, v.size() - i);
    partial.push_back(sum_range(v.data() + i, m));
  }
  return pairwise_sum(partial);
}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double a, double b) {
  return a + (b - a) * uniform();
}

double SplitMix64::normal() {
  // Box-Muller, deterministic across platforms.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace fraconc
