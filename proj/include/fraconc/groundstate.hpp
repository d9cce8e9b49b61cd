#pragma once

#include <array>
#include <optional>

#include "fraconc/convolve.hpp"
#include "fraconc/gamma.hpp"
#include "fraconc/io.hpp"
#include "fraconc/linalg.hpp"

namespace fraconc {

// Entire-space ground state of (-Delta)^s w + w = w^p.
struct GroundState {
  Field w;                       // PowerTail exterior, exponent n+2s, fitted amplitude
  std::vector<double> profile_r; // radial samples (n = 1: symmetrized)
  std::vector<double> profile_v;
  double decay_exponent = 0.0;   // fitted over the standard window
  double energy = 0.0;           // I(w)
  double alpha = 0.0;            // \int Z_1^2 (Gram constant)
  double residual = 0.0;         // ||(-Delta)^s w + w - w^p||_inf over |x| <= L/2
  double conv_identity = 0.0;    // ||w - Gamma * w^p||_inf / ||w||_inf
  double m_final = 0.0;
  int iterations = 0;
};

// Petviashvili iteration w <- M^gamma Gamma*(w^p), gamma = p/(p-1), from a
// Gaussian seed, until |M - 1| < tol.
GroundState solve_ground_state(const Params& params, std::shared_ptr<const Grid> grid,
                               const GammaResult& gamma, double tol,
                               const Cache* cache = nullptr, int max_iter = 2000,
                               std::optional<Field> seed = std::nullopt);

// Sign-flipped least-squares slope of log f against log |x| over [r0, r1].
double decay_fit(const Field& f, double r0, double r1);
double decay_fit_samples(std::span<const double> r, std::span<const double> v,
                         double r0, double r1);

// Plain log-log regression slope (no window or count preconditions), for
// short sweeps like the d-scaling studies.
double loglog_slope(std::span<const double> x, std::span<const double> y);

Field abs_field(const Field& f);

// Z_i = dw_xi/dx_i by centered differences of the translated ground state.
struct DerivativeFields {
  std::vector<Field> Z;
  double nu1 = 0.0;                    // min(n+2s+1, p(n+2s))
  std::vector<double> tail_amplitude;  // fitted |Z_i| tail amplitudes
  std::array<int, 2> xi_cells{0, 0};
};

DerivativeFields derivative_fields(const Params& params, const GroundState& gs,
                                   std::array<int, 2> xi_cells = {0, 0});

// Matrix of \int Z_i Z_j over the region (whole space adds the fitted tail).
DenseMatrix gram(const DerivativeFields& dz, const Grid* region_mask_grid,
                 bool whole_space);

struct TailCheck {
  double integral = 0.0;        // \int_{|x-xi|>delta} w_xi^q
  double bound_exponent = 0.0;  // n(q-1) + 2sq
  double ratio = 0.0;           // integral * delta^{bound_exponent}
};

TailCheck tail_integral_check(const Params& params, const Field& w, double q, double delta,
                              std::array<int, 2> xi_cells = {0, 0});

}  // namespace fraconc
