#pragma once

#include "fraconc/green.hpp"

namespace fraconc {

// Whole-space energy I(w), with the quadratic form evaluated both through
// <frac_apply(w), w> and through the spectral multiplier route.
struct WholeEnergy {
  double value = 0.0;        // quadratic-form route (the reported I(w))
  double value_spectral = 0.0;
  double route_disagreement = 0.0;  // relative
};

WholeEnergy energy_whole(const Params& params, const GroundState& gs);

// I_eps(u) = 1/2 <(A+1)u, u> - 1/(p+1) \int u_+^{p+1} over Omega_eps; u must
// vanish outside Omega_eps (within tolerance).
double energy_domain(const Params& params, const DirichletOperator& dop, const Field& u,
                     double exterior_tol = 1e-9);

// H_eps(xi) = \int\int H(x,y) w_xi^p(x) w_xi^p(y): the Robin-column double
// quadrature, with the Eq-(24)-style reconstruction as a cross-check route.
struct HcalResult {
  double value = 0.0;        // column route (reported)
  double value_cross = 0.0;  // \int w^p (w - Lambda - u_bar)
  double route_disagreement = 0.0;
  double dropped_mass = 0.0;
};

HcalResult hcal(const DirichletOperator& dop, const GammaResult& gamma, RobinCache& cache,
                const Params& params, const GroundState& gs,
                std::array<int, 2> xi_cells = {0, 0});

struct EnergyReport {
  double eps = 0.0;
  double d = 0.0;          // dist(xi, boundary)
  double I_whole = 0.0;
  double I_eps = 0.0;
  double Hcal = 0.0;
  double residual = 0.0;   // |I_eps - I_whole - Hcal/2|
  double eps_power = 0.0;  // residual / eps^{n+4s}
  double J1 = 0.0, J21 = 0.0, J22 = 0.0, J3 = 0.0;
  double identity_error = 0.0;  // exact J-decomposition closure error
};

// The report for one eps on a prebuilt machinery bundle; xi defaults to the
// maximal-distance interior point (the origin for symmetric domains).
struct EpsMachinery {
  Params params;
  std::shared_ptr<const Grid> grid;
  DirichletOperator dop;
  RobinCache cache;
  const GammaResult* gamma = nullptr;
  const GroundState* gs = nullptr;
  std::shared_ptr<DenseMatrix> h_matrix_cache;

  // Column cache rebound to this instance on each use, so the machinery stays
  // safely movable.
  RobinCache& robin_cache() {
    cache.dop = &dop;
    cache.gamma = gamma;
    return cache;
  }

  // Full Robin kernel H(x,y) over interior x interior, materialized once.
  const DenseMatrix& h_matrix();
};

EpsMachinery make_machinery(Params params, double eps, double L, double h,
                            const GammaResult& gamma, const GroundState& gs);

EnergyReport energy_expansion(EpsMachinery& m, std::array<int, 2> xi_cells = {0, 0});

// One report per eps at the maximal-distance interior point.
std::vector<EnergyReport> expansion_study(const Params& params,
                                          std::span<const double> eps_list, double L,
                                          double h, const GammaResult& gamma,
                                          const GroundState& gs);

// min of Hcal over the grid points of Omega_{eps,delta} and over its discrete
// boundary ring.
struct BoundaryGap {
  double interior_min = 0.0;
  double boundary_min = 0.0;
  long argmin_global = -1;
};

BoundaryGap min_boundary_gap(EpsMachinery& m, double delta);

// Hcal at an arbitrary interior lattice point (shared H-columns).
double hcal_at(EpsMachinery& m, std::array<int, 2> xi_cells);

}  // namespace fraconc
