#pragma once

// Shared fixtures and independent oracles for the test suites. The heavyweight
// objects (fundamental solution, ground state) are built once per binary and
// reuse the disk cache pointed to by FRACONC_CACHE.

#include <complex>
#include <memory>

#include "fraconc/energy.hpp"
#include "fraconc/fft.hpp"
#include "fraconc/quadrature.hpp"
#include "fraconc/reduction.hpp"

namespace testlab {

using namespace fraconc;

inline Params desk_params() {
  Params p;
  p.n = 1;
  p.s = 0.4;
  p.p = 2.0;
  p.eps = 0.1;
  p.domain.kind = DomainKind::Interval;
  p.domain.radius = 1.0;
  return p;
}

inline const Cache& cache() {
  static Cache c = Cache::resolve(".fraconc-test-cache", true);
  return c;
}

struct Base {
  Params params = desk_params();
  std::shared_ptr<const Grid> grid;
  GammaResult gamma;
  GroundState gs;
};

inline const Base& base(double L = 40.0, double h = 0.05) {
  static std::map<std::pair<double, double>, std::unique_ptr<Base>> pool;
  auto key = std::make_pair(L, h);
  auto it = pool.find(key);
  if (it != pool.end()) return *it->second;
  auto b = std::make_unique<Base>();
  b->grid = build_free_grid(1, L, h);
  b->gamma = fundamental_solution(b->params, b->grid, {}, &cache());
  b->gs = solve_ground_state(b->params, b->grid, b->gamma, 1e-10, &cache());
  auto& ref = *b;
  pool.emplace(key, std::move(b));
  return ref;
}

inline EpsMachinery machinery(double eps, double L = 40.0, double h = 0.05) {
  const Base& b = base(L, h);
  return make_machinery(b.params, eps, L, h, b.gamma, b.gs);
}

// FFT multiplier oracle for (-Delta)^s: the analytic test function is sampled
// on a refine-times finer periodic grid, the |k|^{2s} multiplier applied, and
// the result read back at the coarse nodes.
inline std::vector<double> spectral_oracle(const std::function<double(double)>& fn,
                                           const Grid& g, double s, int refine = 4) {
  const double hf = g.h / refine;
  const std::size_t nf = next_pow2(static_cast<std::size_t>(std::lround(2.0 * g.L / hf)) * 2);
  std::vector<std::complex<double>> a(nf, 0.0);
  for (std::size_t j = 0; j < nf; ++j) {
    const double x = (j <= nf / 2 ? static_cast<double>(j)
                                  : static_cast<double>(j) - static_cast<double>(nf)) * hf;
    a[j] = fn(x);
  }
  fft(a, false);
  const double dk = 2.0 * M_PI / (static_cast<double>(nf) * hf);
  for (std::size_t j = 0; j < nf; ++j) {
    const double freq = j <= nf / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(nf);
    a[j] *= std::pow(std::abs(freq * dk), 2.0 * s);
  }
  fft(a, true);
  std::vector<double> out(static_cast<std::size_t>(g.node_count()));
  for (long i = 0; i < g.node_count(); ++i) {
    const long j = std::lround(g.point(i)[0] / hf);
    const std::size_t idx = j >= 0 ? static_cast<std::size_t>(j)
                                   : nf - static_cast<std::size_t>(-j);
    out[static_cast<std::size_t>(i)] = a[idx].real();
  }
  return out;
}

// Independent route to the fundamental solution: inverse-multiplier cosine
// quadrature with an integration-by-parts tail.
inline double gamma_direct_1d(double r, double s, double K = 4000.0) {
  auto f = [&](double k) { return 1.0 / (1.0 + std::pow(k, 2.0 * s)); };
  auto g = [&](double k) { return f(k) * std::cos(k * r); };
  double total = 0.0;
  double a = 0.0, b = 1e-6;
  while (a < 1.0) {
    b = std::min(1.0, b);
    total += gauss_panel(g, a, b);
    a = b;
    b *= 3.0;
  }
  const double width = std::min(0.35, 8.0 / r);
  total += gauss_composite(g, 1.0, K, static_cast<int>(std::ceil((K - 1.0) / width)));
  const double fp =
      -2.0 * s * std::pow(K, 2.0 * s - 1.0) / std::pow(1.0 + std::pow(K, 2.0 * s), 2.0);
  total += -f(K) * std::sin(K * r) / r - fp * std::cos(K * r) / (r * r);
  return total / M_PI;
}

// Smooth compactly-supported random function: a few random bumps under a
// C-infinity window, with both the grid samples and the closed form.
struct RandomBumps {
  Field field;
  std::function<double(double)> fn;
};

inline RandomBumps random_bump_field(std::shared_ptr<const Grid> grid, SplitMix64& rng,
                                     double support_radius = 6.0) {
  struct Bump {
    double center, width, amp;
  };
  auto bumps = std::make_shared<std::vector<Bump>>();
  for (int b = 0; b < 4; ++b)
    bumps->push_back({rng.uniform(-0.6, 0.6) * support_radius, rng.uniform(0.6, 1.8),
                      rng.uniform(-1.0, 1.0)});
  auto fn = [bumps, support_radius](double x) {
    const double r = std::abs(x);
    if (r >= support_radius) return 0.0;
    const double q = (r / support_radius) * (r / support_radius);
    const double window = std::exp(1.0 - 1.0 / (1.0 - q));
    double v = 0.0;
    for (const auto& b : *bumps) {
      const double t = (x - b.center) / b.width;
      v += b.amp * std::exp(-t * t);
    }
    return v * window;
  };
  RandomBumps out;
  out.fn = fn;
  out.field = make_field(grid, [&](int, Point x) { return fn(x[0]); });
  return out;
}

inline double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace testlab
