#pragma once

#include "fraconc/energy.hpp"

namespace fraconc {

// Weighted sup norm ||psi||_{*,xi} = max (1 + |x - xi|)^mu |psi(x)|,
// n/2 < mu < n + 2s.
struct WeightedNorm {
  double mu = 0.0;
  Point center{0.0, 0.0};

  static WeightedNorm standard(const Params& params, Point xi);  // midpoint mu
  double operator()(const Field& psi) const;
  Field weight_field(std::shared_ptr<const Grid> g) const;  // rho_xi itself
};

double star_norm(const Field& psi, Point xi, double mu);

double default_mu(const Params& params);  // midpoint of the admissible range

// One xi's worth of Lyapunov-Schmidt state: translated ground state, Z
// fields, and the factored saddle system
//   [ A - p w_xi^{p-1}   -Z ] [psi]   [-g]
//   [      -Z^T           0 ] [ c ] = [ 0 ].
struct ReductionContext {
  const EpsMachinery* m = nullptr;
  std::array<int, 2> xi_cells{0, 0};
  Point xi{0.0, 0.0};
  double mu = 0.0;
  Field w_xi;
  Field u_bar;
  DerivativeFields dz;
  double alpha = 0.0;
  LuFactor saddle;
  long ni = 0;
};

ReductionContext make_reduction_context(EpsMachinery& m, std::array<int, 2> xi_cells);

struct ProjectedSolve {
  Field psi;                          // zero exterior by construction
  std::vector<double> c;
  std::vector<double> ortho_residual; // \int psi Z_i
  double lin_residual = 0.0;          // PDE-row residual, relative
};

// Solves (-Delta)^s psi + psi - p w_xi^{p-1} psi + g = sum c_i Z_i with the
// orthogonality constraints.
ProjectedSolve projected_linear_solve(const ReductionContext& ctx, const Field& g_term);

// E(psi) = (u_bar + psi)_+^p - (w_xi + psi)_+^p,
// N(psi) = (w_xi + psi)_+^p - w_xi^p - p w_xi^{p-1} psi.
struct ErrorTerms {
  Field E;
  Field N;
};
ErrorTerms error_terms(const ReductionContext& ctx, const Field& psi);

struct ReductionState {
  std::array<int, 2> xi_cells{0, 0};
  Field Psi;
  std::vector<double> c;
  double J = 0.0;               // J_eps(xi)
  double I_eps_ubar = 0.0;      // I_eps(u_bar), for the th:exp comparison
  double star_norm_psi = 0.0;
  int iterations = 0;
  double contraction_factor = 0.0;
  double pde_residual = 0.0;    // star-norm residual of the projected equation
};

// Fixed point psi <- T_xi[-(E(psi) + N(psi))] from psi = 0.
ReductionState nonlinear_projected_solve(const ReductionContext& ctx, double tol,
                                         const Field* warm_start = nullptr);

double reduced_functional(EpsMachinery& m, ReductionContext& ctx, ReductionState& state);

struct MinimizeResult {
  std::array<int, 2> xi_cells{0, 0};
  std::vector<double> c_at_min;
  double J_min = 0.0;
  double star_norm_psi = 0.0;
  bool interior = false;        // minimizer strictly inside Omega_{eps,delta}
  std::vector<std::array<int, 2>> scan_points;
  std::vector<double> scan_J;
};

// Coarse scan of J_eps over Omega_{eps,delta} grid points followed by local
// lattice descent; ties broken toward the smallest lexicographic index.
MinimizeResult minimize_reduced(EpsMachinery& m, double delta, int coarse_stride = 4,
                                double tol = 1e-11);

struct FinalReport {
  double eps = 0.0;
  double xi_bar = 0.0;             // scaled back to Omega: eps * xi
  double dist_to_boundary = 0.0;   // dist(eps * xi, dOmega)
  std::vector<double> c_vector;
  double star_norm_psi = 0.0;
  double newton_correction = 0.0;  // first damped-Newton step, relative
  double newton_final_residual = 0.0;
  double error_vs_ground_state = 0.0;  // max |u_eps - w_xi|
  double min_solution_value = 0.0;
  bool positive = false;
};

// Assembles u_eps = u_bar + Psi at the minimizer and verifies it against an
// independent damped Newton solve of the full unprojected problem.
FinalReport assemble_and_verify(EpsMachinery& m, const MinimizeResult& min_result,
                                double newton_tol);

}  // namespace fraconc
