#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraconc {

// Global worker count for data-parallel loops. Results are identical for any
// value: parallelism is over independent output slots only.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [begin, end). Each index owns its output slot.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

// Fixed-topology pairwise reduction (block size 1024), independent of thread
// count, so quadrature sums are bit-stable run to run.
double pairwise_sum(std::span<const double> v);

// Small deterministic generator for tests and randomized checks.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double uniform();                       // [0,1)
  double uniform(double a, double b);
  double normal();
};

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace fraconc
