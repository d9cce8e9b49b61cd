#pragma once

#include <memory>
#include <vector>

#include "fraconc/field.hpp"

namespace fraconc {

// Fourier-consistent normalizing constant of the principal-value form
//   (-Delta)^s u(x) = cns(n,s) P.V. int (u(x)-u(y)) / |x-y|^{n+2s} dy,
// whose symbol is |k|^{2s}. Finite limit as s -> 1.
double cns_constant(int n, double s);

// Discrete ((-Delta)^s + mass_shift) on a fixed box lattice. Interior cells
// carry exact kernel moments (n=1) or midpoint weights (n=2), the singular
// cell a second-difference Taylor correction with exact local moment (plus,
// for n=1, a lattice moment fix that makes quadratics exact), and the far
// field beyond y_max is closed analytically per the exterior rule.
struct FracOperator {
  struct Coupling {
    int dmx;
    int dmy;
    double w;  // operator row: diag*f_i - sum_c w * f(i+c) - tail(f)
  };

  // Half list: each entry acts as w * (f(i+d) + f(i-d)), which keeps the
  // apply bitwise mirror-symmetric.
  struct PairCoupling {
    int dmx;
    int dmy;
    double w;
  };

  int n = 1;
  double s = 0.4;
  double cns = 0.0;
  double h = 0.0;
  double L = 0.0;
  int mass_shift = 1;
  double y_max = 0.0;

  std::vector<Coupling> couplings;  // both signs listed, fixed order
  std::vector<PairCoupling> pairs;  // one entry per +- pair
  double coupling_total = 0.0;      // sum of w
  double far_coef = 0.0;            // kernel mass beyond y_max, cns included

  static FracOperator make(int n, double s, double h, double L, int mass_shift = 1);

  // cns * \int_{|z| > L + h/2} |z|^{-n-2s} dz  (exact closed form)
  double tail_coefficient() const;

  double diagonal() const { return coupling_total + far_coef + mass_shift; }

  // Applies the operator at every box node of f's grid.
  Field apply(const Field& f) const;
};

FracOperator frac_operator(const Params& params, const Grid& grid, int mass_shift = 1);

Field frac_apply(const FracOperator& op, const Field& f);

}  // namespace fraconc
