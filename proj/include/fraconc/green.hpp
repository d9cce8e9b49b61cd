#pragma once

#include <map>

#include "fraconc/gamma.hpp"
#include "fraconc/groundstate.hpp"
#include "fraconc/linalg.hpp"

namespace fraconc {

// Restriction of ((-Delta)^s + 1) to the interior nodes of Omega_eps, with a
// fold of exterior data into the right-hand side. SPD, factored once.
struct DirichletOperator {
  std::shared_ptr<const Grid> grid;
  FracOperator op;
  std::vector<long> interior;        // global indices of interior nodes
  std::vector<long> local_of;        // global -> local, -1 outside
  DenseMatrix A;
  CholFactor chol;

  long size() const { return static_cast<long>(interior.size()); }
  std::vector<double> restrict_to_interior(const Field& f) const;
  Field extend_from_interior(std::span<const double> u) const;
};

DirichletOperator make_dirichlet_operator(const Params& params,
                                          std::shared_ptr<const Grid> grid);

// Solves (A+1) u = rhs in Omega_eps with u = exterior datum outside; the
// returned field carries the datum values on the exterior box nodes.
Field solve_dirichlet(const DirichletOperator& dop, const Field& rhs,
                      const Field* exterior_datum = nullptr, double* residual = nullptr);

// Exterior-datum field for the Robin problem: Gamma(. - y) outside Omega_eps.
Field gamma_datum(const GammaResult& gamma, const DirichletOperator& dop, long y_global);

struct RobinData {
  long y_global = -1;
  double d = 0.0;     // dist(y, boundary of Omega_eps), lattice metric
  Field H;            // regular part: datum Gamma(.-y) outside, harmonic inside
  Field G;            // Gamma(.-y) - H; zero outside Omega_eps
  double residual = 0.0;
};

RobinData robin(const DirichletOperator& dop, const GammaResult& gamma, long y_global);

// H-columns over interior nodes, cached; column y is h^n-scaled so that
// h^n G(x,y) is the inverse matrix entry.
struct RobinCache {
  const DirichletOperator* dop = nullptr;
  const GammaResult* gamma = nullptr;
  std::map<long, std::vector<double>> h_columns;  // key: global y index

  const std::vector<double>& column(long y_global);
};

// Distance from a node to the exterior region, in lattice metric.
double boundary_distance(const Grid& g, long idx);

// beta_xi(x) = int_{complement} Gamma(z - xi) Gamma(x - z) dz, continuum
// radial quadrature over complement nodes plus analytic two-tail remainder.
Field barrier_beta(const DirichletOperator& dop, const GammaResult& gamma, long xi_global);

struct LambdaPi {
  Field Lambda;  // int_{complement} w_xi^p(y) Gamma(x-y) dy
  Field Pi;      // int_{Omega_eps} H(x,y) w_xi^p(y) dy (Robin columns)
  double dropped_mass = 0.0;  // w^p mass below the column cutoff
};

LambdaPi lambda_pi(const DirichletOperator& dop, const GammaResult& gamma,
                   RobinCache& cache, const Params& params, const GroundState& gs,
                   std::array<int, 2> xi_cells = {0, 0}, double cutoff_rel = 1e-8);

struct UbarDecomposition {
  Field u_bar;
  Field w_xi;
  LambdaPi lp;
  double residual = 0.0;  // ||u_bar - (w - Lambda - Pi)||_inf / ||w||_inf, interior
  double max_w_minus_ubar = 0.0;
};

UbarDecomposition ubar_decomposition(const DirichletOperator& dop, const GammaResult& gamma,
                                     RobinCache& cache, const Params& params,
                                     const GroundState& gs,
                                     std::array<int, 2> xi_cells = {0, 0});

}  // namespace fraconc
