#pragma once

#include <memory>
#include <vector>

#include "fraconc/frac.hpp"

namespace fraconc {

// Radial samples with power-law continuation beyond the last radius.
struct RadialProfile {
  std::vector<double> r;  // ascending, first entries log-graded toward 0
  std::vector<double> v;
  double tail_amplitude = 0.0;
  double tail_exponent = 0.0;

  double eval(double radius) const;
};

// Fundamental solution of ((-Delta)^s + 1), radial and positive with unit
// mass and an |x|^{-n-2s} tail.
struct GammaResult {
  Field field;             // sampled on the working grid; origin cell-averaged
  RadialProfile profile;   // continuum radial table, extends past the box
  double tail_amplitude = 0.0;
  long origin_index = -1;  // flagged: pointwise value there is a cell average
  double quad_error = 0.0; // profile refinement estimate
  double correction_norm = 0.0;  // size of the discrete correction
  bool discrete_corrected = false;
};

struct GammaOptions {
  double quad_tol = 1e-7;          // convergence flag for the radial quadrature
  bool discrete_correction = true; // make the grid samples invert the discrete op
  double r_max_min = 55.0;         // profile reaches at least this radius
};

// Radial profile only (no grid); r_max chooses the table extent.
RadialProfile gamma_radial_profile(int n, double s, double r_fine_step, double r_max,
                                   double quad_tol = 1e-7, double* quad_error = nullptr);

struct Cache;  // io.hpp

GammaResult fundamental_solution(const Params& params, std::shared_ptr<const Grid> grid,
                                 const GammaOptions& opts = {}, const Cache* cache = nullptr);

}  // namespace fraconc
