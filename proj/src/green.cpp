#include "fraconc/green.hpp"

#include <array>
#include <cmath>

#include "fraconc/common.hpp"
#include "fraconc/quadrature.hpp"

namespace fraconc {

std::vector<double> DirichletOperator::restrict_to_interior(const Field& f) const {
  std::vector<double> out(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k)
    out[k] = f[interior[k]];
  return out;
}

Field DirichletOperator::extend_from_interior(std::span<const double> u) const {
  Field f(grid, ExteriorRule::zero());
  for (std::size_t k = 0; k < interior.size(); ++k) f[interior[k]] = u[k];
  return f;
}

DirichletOperator make_dirichlet_operator(const Params& params,
                                          std::shared_ptr<const Grid> grid) {
  DirichletOperator dop;
  dop.grid = grid;
  dop.op = FracOperator::make(params.n, params.s, grid->h, grid->L, 1);
  dop.interior = grid->interior_indices();
  require(!dop.interior.empty(), "DirichletOperator: empty interior (degenerate mask)");
  dop.local_of.assign(static_cast<std::size_t>(grid->node_count()), -1);
  for (std::size_t k = 0; k < dop.interior.size(); ++k)
    dop.local_of[static_cast<std::size_t>(dop.interior[k])] = static_cast<long>(k);

  const long ni = dop.size();
  dop.A = DenseMatrix(static_cast<int>(ni), static_cast<int>(ni));
  const double diag = dop.op.diagonal();
  const Grid& g = *grid;
  for (long row = 0; row < ni; ++row) {
    const long gi = dop.interior[static_cast<std::size_t>(row)];
    const int mx = g.mx_of(gi);
    const int my = g.my_of(gi);
    dop.A(static_cast<int>(row), static_cast<int>(row)) = diag;
    for (const auto& c : dop.op.couplings) {
      const int tx = mx + c.dmx;
      const int ty = my + c.dmy;
      if (!g.in_box(tx, ty)) continue;
      const long gj = g.index(tx, ty);
      const long col = dop.local_of[static_cast<std::size_t>(gj)];
      if (col < 0) continue;
      dop.A(static_cast<int>(row), static_cast<int>(col)) -= c.w;
    }
  }
  dop.chol = CholFactor::compute(dop.A);
  return dop;
}

Field solve_dirichlet(const DirichletOperator& dop, const Field& rhs,
                      const Field* exterior_datum, double* residual) {
  const Grid& g = *dop.grid;
  std::vector<double> b = dop.restrict_to_interior(rhs);

  Field datum_ext(dop.grid, ExteriorRule::zero());
  bool have_datum = false;
  if (exterior_datum) {
    have_datum = true;
    datum_ext.exterior = exterior_datum->exterior;
    for (long i = 0; i < g.node_count(); ++i)
      datum_ext[i] = g.inside(i) ? 0.0 : (*exterior_datum)[i];
    Field fold = dop.op.apply(datum_ext);
    for (std::size_t k = 0; k < dop.interior.size(); ++k)
      b[k] -= fold[dop.interior[k]];
  }

  std::vector<double> u = dop.chol.solve(b);
  if (residual) {
    std::vector<double> au = dop.A.apply(u);
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      scale = std::max(scale, std::abs(b[k]));
      err = std::max(err, std::abs(au[k] - b[k]));
    }
    *residual = err / std::max(scale, 1e-300);
  }

  Field out(dop.grid, have_datum ? datum_ext.exterior : ExteriorRule::zero());
  for (long i = 0; i < g.node_count(); ++i)
    out[i] = g.inside(i) ? 0.0 : datum_ext[i];
  for (std::size_t k = 0; k < dop.interior.size(); ++k) out[dop.interior[k]] = u[k];
  return out;
}

double boundary_distance(const Grid& g, long idx) {
  const Point x = g.point(idx);
  double dmin = 1e300;
  for (long j = 0; j < g.node_count(); ++j) {
    if (g.inside(j)) continue;
    const Point y = g.point(j);
    const double d = g.n == 1 ? std::abs(x[0] - y[0])
                              : std::hypot(x[0] - y[0], x[1] - y[1]);
    dmin = std::min(dmin, d);
  }
  // beyond-box exterior
  dmin = std::min(dmin, g.L - std::abs(x[0]));
  if (g.n == 2) dmin = std::min(dmin, g.L - std::abs(x[1]));
  return dmin;
}

Field gamma_datum(const GammaResult& gamma, const DirichletOperator& dop, long y_global) {
  const Grid& g = *dop.grid;
  const int yx = g.mx_of(y_global);
  const int yy = g.my_of(y_global);
  Field datum(dop.grid,
              ExteriorRule::power_tail(gamma.tail_amplitude, gamma.field.exterior.exponent,
                                       g.point(y_global)));
  for (long i = 0; i < g.node_count(); ++i)
    datum[i] = gamma.field.at_lattice(g.mx_of(i) - yx, g.my_of(i) - yy);
  return datum;
}

RobinData robin(const DirichletOperator& dop, const GammaResult& gamma, long y_global) {
  const Grid& g = *dop.grid;
  require(y_global >= 0 && y_global < g.node_count() && g.inside(y_global),
          "robin: source must lie strictly inside Omega_eps");
  RobinData out;
  out.y_global = y_global;
  out.d = boundary_distance(g, y_global);

  // G column: (A+1) G = h^{-n} delta_y with zero exterior; then H = Gamma - G,
  // which solves the homogeneous problem with exterior datum Gamma(.-y).
  const double hn = g.n == 1 ? g.h : g.h * g.h;
  Field rhs(dop.grid, ExteriorRule::zero());
  rhs[y_global] = 1.0 / hn;
  out.G = solve_dirichlet(dop, rhs, nullptr, nullptr);

  Field datum = gamma_datum(gamma, dop, y_global);
  out.H = datum;
  for (long i = 0; i < g.node_count(); ++i)
    if (g.inside(i)) out.H[i] = datum[i] - out.G[i];

  // residual of the H-equation (datum route), a cross-check of the two forms
  {
    std::vector<double> hloc = dop.restrict_to_interior(out.H);
    std::vector<double> ah = dop.A.apply(hloc);
    Field datum_ext(dop.grid, datum.exterior);
    for (long i = 0; i < g.node_count(); ++i) datum_ext[i] = g.inside(i) ? 0.0 : datum[i];
    Field fold = dop.op.apply(datum_ext);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < hloc.size(); ++k) {
      err = std::max(err, std::abs(ah[k] + fold[dop.interior[k]]));
      scale = std::max(scale, std::abs(hloc[k]));
    }
    out.residual = err / std::max(scale, 1e-300);
  }
  return out;
}

const std::vector<double>& RobinCache::column(long y_global) {
  auto it = h_columns.find(y_global);
  if (it != h_columns.end()) return it->second;
  const Grid& g = *dop->grid;
  require(g.inside(y_global), "RobinCache: source outside Omega_eps");
  const double hn = g.n == 1 ? g.h : g.h * g.h;
  std::vector<double> rhs(dop->interior.size(), 0.0);
  rhs[static_cast<std::size_t>(dop->local_of[static_cast<std::size_t>(y_global)])] = 1.0 / hn;
  std::vector<double> gcol = dop->chol.solve(rhs);
  const int yx = g.mx_of(y_global);
  const int yy = g.my_of(y_global);
  std::vector<double> hcol(dop->interior.size());
  for (std::size_t k = 0; k < dop->interior.size(); ++k) {
    const long gi = dop->interior[k];
    hcol[k] = gamma->field.at_lattice(g.mx_of(gi) - yx, g.my_of(gi) - yy) - gcol[k];
  }
  return h_columns.emplace(y_global, std::move(hcol)).first->second;
}

namespace {

// Continuum-route two-tail remainder for integrals over the box complement:
// \int_{|z| > R} f(z) Gamma(x - z) dz (n = 1).
double complement_tail_1d(const RadialProfile& prof, double R, double x,
                          const std::function<double(double)>& f_of_z) {
  auto right = [&](double z) { return f_of_z(z) * prof.eval(std::abs(x - z)); };
  auto left = [&](double z) { return f_of_z(-z) * prof.eval(std::abs(x + z)); };
  return gauss_semi_infinite(right, R, 20) + gauss_semi_infinite(left, R, 20);
}

}  // namespace

Field barrier_beta(const DirichletOperator& dop, const GammaResult& gamma, long xi_global) {
  const Grid& g = *dop.grid;
  require(g.inside(xi_global), "barrier_beta: xi must lie inside Omega_eps");
  require(boundary_distance(g, xi_global) >= 1.0,
          "barrier_beta: requires dist(xi, boundary) >= 1");
  const Point xi = g.point(xi_global);
  const double hn = g.n == 1 ? g.h : g.h * g.h;
  const double R = g.L + 0.5 * g.h;

  // complement nodes within the box
  std::vector<long> comp;
  for (long z = 0; z < g.node_count(); ++z)
    if (!g.inside(z)) comp.push_back(z);

  // The lattice sum uses the discrete Gamma samples (the same structure the
  // ground-state convolution telescopes against), so the operator annihilates
  // beta at interior nodes up to the tail model; the two-tail remainder
  // closes the complement beyond the box.
  Field beta(dop.grid, ExteriorRule::zero());
  const int xim = g.mx_of(xi_global);
  const int yim = g.my_of(xi_global);
  parallel_for(0, static_cast<std::size_t>(g.node_count()), [&](std::size_t ui) {
    const long i = static_cast<long>(ui);
    const int mx = g.mx_of(i);
    const int my = g.my_of(i);
    std::vector<double> terms(comp.size());
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const int zx = g.mx_of(comp[k]);
      const int zy = g.my_of(comp[k]);
      terms[k] = gamma.field.at_lattice(zx - xim, zy - yim) *
                 gamma.field.at_lattice(mx - zx, my - zy);
    }
    double val = hn * pairwise_sum(terms);
    if (g.n == 1) {
      val += complement_tail_1d(gamma.profile, R, g.point(i)[0], [&](double z) {
        return gamma.profile.eval(std::abs(z - xi[0]));
      });
    }
    beta[i] = val;
  });
  if (g.n == 1) {
    const double q = gamma.field.exterior.exponent;
    beta.exterior = ExteriorRule::power_tail(
        beta.fit_tail_amplitude(q, 0.8 * g.L, 0.975 * g.L), q);
  }
  return beta;
}

LambdaPi lambda_pi(const DirichletOperator& dop, const GammaResult& gamma, RobinCache& cache,
                   const Params& params, const GroundState& gs,
                   std::array<int, 2> xi_cells, double cutoff_rel) {
  const Grid& g = *dop.grid;
  const long xi_global = g.index(xi_cells[0], xi_cells[1]);
  require(g.inside(xi_global), "lambda_pi: xi must lie inside Omega_eps");
  require(boundary_distance(g, xi_global) >= 2.0, "lambda_pi: requires dist >= 2");

  Field w_xi = gs.w.translated(xi_cells[0], xi_cells[1]);
  Field wp = field_pow(w_xi, params.p);
  const Point xi = g.point(xi_global);
  const double hn = g.n == 1 ? g.h : g.h * g.h;
  const double R = g.L + 0.5 * g.h;

  LambdaPi out;
  // Lambda: complement quadrature against the continuum profile + tails.
  std::vector<long> comp;
  for (long z = 0; z < g.node_count(); ++z)
    if (!g.inside(z)) comp.push_back(z);
  out.Lambda = Field(dop.grid, ExteriorRule::zero());
  parallel_for(0, static_cast<std::size_t>(g.node_count()), [&](std::size_t ui) {
    const long i = static_cast<long>(ui);
    const Point x = g.point(i);
    std::vector<double> terms(comp.size());
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const Point y = g.point(comp[k]);
      const double rx = g.n == 1 ? std::abs(x[0] - y[0]) : std::hypot(x[0] - y[0], x[1] - y[1]);
      terms[k] = wp[comp[k]] * gamma.profile.eval(rx);
    }
    double val = hn * pairwise_sum(terms);
    if (g.n == 1 && wp.exterior.kind == ExteriorRule::Kind::PowerTail) {
      const double amp = wp.exterior.amplitude;
      const double q = wp.exterior.exponent;
      val += complement_tail_1d(gamma.profile, R, x[0], [&](double z) {
        return amp * std::pow(std::abs(z - xi[0]), -q);
      });
    }
    out.Lambda[i] = val;
  });

  // Pi: Robin columns against the significant part of w_xi^p.
  const double wpmax = wp.max_abs();
  std::vector<long> sources;
  std::vector<double> weights;
  double kept = 0.0, dropped = 0.0;
  for (long y = 0; y < g.node_count(); ++y) {
    if (!g.inside(y)) continue;
    const double v = wp[y];
    if (v > cutoff_rel * wpmax) {
      sources.push_back(y);
      weights.push_back(v);
      kept += v;
    } else {
      dropped += v;
    }
  }
  out.dropped_mass = dropped / std::max(kept + dropped, 1e-300);
  for (long y : sources) cache.column(y);  // populate (solves are independent)

  out.Pi = Field(dop.grid, ExteriorRule::zero());
  parallel_for(0, static_cast<std::size_t>(g.node_count()), [&](std::size_t ui) {
    const long i = static_cast<long>(ui);
    std::vector<double> terms(sources.size());
    if (g.inside(i)) {
      const long loc = dop.local_of[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < sources.size(); ++k)
        terms[k] = cache.h_columns.at(sources[k])[static_cast<std::size_t>(loc)] * weights[k];
    } else {
      // outside Omega_eps the Robin kernel equals Gamma(x - y)
      const int mx = g.mx_of(i), my = g.my_of(i);
      for (std::size_t k = 0; k < sources.size(); ++k) {
        const long y = sources[k];
        terms[k] = gamma.field.at_lattice(mx - g.mx_of(y), my - g.my_of(y)) * weights[k];
      }
    }
    out.Pi[i] = hn * pairwise_sum(terms);
  });
  return out;
}

UbarDecomposition ubar_decomposition(const DirichletOperator& dop, const GammaResult& gamma,
                                     RobinCache& cache, const Params& params,
                                     const GroundState& gs, std::array<int, 2> xi_cells) {
  UbarDecomposition out;
  out.w_xi = gs.w.translated(xi_cells[0], xi_cells[1]);
  Field wp = field_pow(out.w_xi, params.p);
  out.u_bar = solve_dirichlet(dop, wp, nullptr, nullptr);
  out.lp = lambda_pi(dop, gamma, cache, params, gs, xi_cells);

  const double wmax = out.w_xi.max_abs();
  double err = 0.0, dmax = 0.0;
  for (long i : dop.interior) {
    const double recon = out.w_xi[i] - out.lp.Lambda[i] - out.lp.Pi[i];
    err = std::max(err, std::abs(out.u_bar[i] - recon));
    dmax = std::max(dmax, std::abs(out.w_xi[i] - out.u_bar[i]));
  }
  out.residual = err / wmax;
  out.max_w_minus_ubar = dmax;
  return out;
}

}  // namespace fraconc
