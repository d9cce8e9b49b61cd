#include "fraconc/convolve.hpp"

#include <cmath>

#include "fraconc/common.hpp"
#include "fraconc/quadrature.hpp"

namespace fraconc {

namespace {

bool compatible(const Grid& a, const Grid& b) {
  return a.n == b.n && a.half == b.half && std::abs(a.h - b.h) < 1e-14;
}

// Remainder over y > y_hi (f tail against g tail); the mirrored region
// y < y_lo of the swapped product maps onto this one term-by-term.
double tail_remainder(const Field& f, const Field& g, double x, double y_hi) {
  if (f.exterior.kind != ExteriorRule::Kind::PowerTail ||
      g.exterior.kind != ExteriorRule::Kind::PowerTail)
    return 0.0;
  const double af = f.exterior.amplitude, ag = g.exterior.amplitude;
  if (af == 0.0 || ag == 0.0) return 0.0;
  const double qf = f.exterior.exponent, qg = g.exterior.exponent;
  const double estimate = af * ag * std::pow(y_hi, 1.0 - qf - qg) / (qf + qg - 1.0);
  if (std::abs(estimate) < 1e-16) return 0.0;
  const double cf = f.exterior.center[0], cg = g.exterior.center[0];
  auto integrand = [&](double y) {
    return af * std::pow(std::abs(y - cf), -qf) * ag * std::pow(std::abs(x - y - cg), -qg);
  };
  return gauss_semi_infinite(integrand, y_hi, 20);
}

}  // namespace

Field convolve(const Field& f, const Field& g) {
  const Grid& gr = *f.grid;
  require(compatible(gr, *g.grid), "convolve: incompatible grids");
  require(f.exterior.kind != ExteriorRule::Kind::Prescribed &&
              g.exterior.kind != ExteriorRule::Kind::Prescribed,
          "convolve: Prescribed exterior rule is not supported");
  for (const Field* fld : {&f, &g})
    if (fld->exterior.kind == ExteriorRule::Kind::PowerTail && fld->exterior.amplitude != 0.0)
      require(fld->exterior.exponent > gr.n,
              "convolve: PowerTail exponent must exceed n for integrability");
  Field out(f.grid, ExteriorRule::zero());
  const int M = gr.half;
  const double h = gr.h;

  if (gr.n == 1) {
    // materialize both factors on the extended lattice [-2M, 2M] once
    const int E = 2 * M;
    std::vector<double> fe(2 * E + 1), ge(2 * E + 1);
    parallel_for(0, fe.size(), [&](std::size_t k) {
      const int m = static_cast<int>(k) - E;
      fe[k] = f.at_lattice(m);
      ge[k] = g.at_lattice(m);
    });
    parallel_for(0, static_cast<std::size_t>(gr.node_count()), [&](std::size_t ui) {
      const long i = static_cast<long>(ui);
      const int mi = gr.mx_of(i);
      const int lo = std::min(-M, mi - M);
      const int hi = std::max(M, mi + M);
      // symmetric two-pointer pairing keeps f*g and g*f bitwise equal
      double acc = 0.0;
      int a = lo, b = hi;
      while (a < b) {
        acc += fe[a + E] * ge[mi - a + E] + fe[b + E] * ge[mi - b + E];
        ++a;
        --b;
      }
      if (a == b) acc += fe[a + E] * ge[mi - a + E];
      double val = h * acc;
      const double x = mi * h;
      const double y_hi = (hi + 0.5) * h;
      val += tail_remainder(f, g, x, y_hi);       // y > y_hi
      val += tail_remainder(g, f, x, y_hi);       // mirrors y < y_lo
      out[i] = val;
    });
    return out;
  }

  // n == 2: bounding-rectangle lattice sum; remainder beyond it is dropped
  // (both tails decay faster than |y|^{-2n}).
  parallel_for(0, static_cast<std::size_t>(gr.node_count()), [&](std::size_t ui) {
    const long i = static_cast<long>(ui);
    const int mix = gr.mx_of(i);
    const int miy = gr.my_of(i);
    const int lox = std::min(-M, mix - M), hix = std::max(M, mix + M);
    const int loy = std::min(-M, miy - M), hiy = std::max(M, miy + M);
    double acc = 0.0;
    for (int b = loy; b <= hiy; ++b)
      for (int a = lox; a <= hix; ++a)
        acc += f.at_lattice(a, b) * g.at_lattice(mix - a, miy - b);
    out[i] = h * h * acc;
  });
  return out;
}

}  // namespace fraconc
