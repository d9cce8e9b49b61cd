#include "fraconc/groundstate.hpp"

#include <cmath>

#include "fraconc/common.hpp"

namespace fraconc {

namespace {

double fit_window_lo(const Grid& g) { return 0.80 * g.L; }
double fit_window_hi(const Grid& g) { return 0.975 * g.L; }

void refit_tail(Field& f, double exponent, double floor_amplitude = 0.0) {
  const double a = f.fit_tail_amplitude(exponent, fit_window_lo(*f.grid), fit_window_hi(*f.grid));
  f.exterior = ExteriorRule::power_tail(std::max(a, floor_amplitude), exponent);
}

GroundState finalize_state(const Params& params, const GammaResult& gamma, Field w,
                           double m_final, int iterations, double tol) {
  const Grid& g = *w.grid;
  const double q = params.n + 2.0 * params.s;
  refit_tail(w, q);

  if (params.n == 1) {
    // The discrete operator taps w on (L, 2L]; fitting the tail amplitude to
    // the convolution extension there keeps the equation and the exterior
    // model consistent.
    Field wp = field_pow(w, params.p);
    const int M = g.half;
    const int E = 2 * M;
    std::vector<double> wpe(2 * E + 1);
    for (int m = -E; m <= E; ++m) wpe[m + E] = wp.at_lattice(m);
    double num = 0.0, den = 0.0;
    for (int m = M + 2; m <= static_cast<int>(1.9 * M); ++m) {
      for (int sign : {-1, +1}) {
        const int mi = sign * m;
        double acc = 0.0;
        for (int j = -M; j <= M; ++j) {
          const int off = mi - j;
          const double gv = std::abs(off) <= E ? gamma.field.at_lattice(off) : 0.0;
          acc += wpe[j + E] * gv;
        }
        const double val = g.h * acc;
        const double r = std::abs(mi) * g.h;
        if (r < 1.05 * g.L || r > 1.9 * g.L) continue;
        const double basis = std::pow(r, -q);
        num += val * basis;
        den += basis * basis;
      }
    }
    if (den > 0.0 && num > 0.0)
      w.exterior = ExteriorRule::power_tail(num / den, q);
  }

  GroundState out;
  out.m_final = m_final;
  out.iterations = iterations;

  // discrete-equation residual over |x| <= L/2
  const FracOperator op = FracOperator::make(params.n, params.s, g.h, g.L, 1);
  Field lhs = op.apply(w);
  double res = 0.0;
  for (long i = 0; i < g.node_count(); ++i) {
    if (g.radius(i) > 0.5 * g.L) continue;
    const double v = w[i];
    res = std::max(res, std::abs(lhs[i] - (v <= 0.0 ? 0.0 : std::pow(v, params.p))));
  }
  out.residual = res;

  // convolution identity
  Field conv = convolve(gamma.field, field_pow(w, params.p));
  double dmax = 0.0;
  for (long i = 0; i < g.node_count(); ++i) dmax = std::max(dmax, std::abs(conv[i] - w[i]));
  out.conv_identity = dmax / w.max_abs();

  // radial profile (n = 1: symmetrized over the two sides)
  if (params.n == 1) {
    for (int m = 0; m <= g.half; ++m) {
      out.profile_r.push_back(m * g.h);
      out.profile_v.push_back(0.5 * (w.at_lattice(m) + w.at_lattice(-m)));
    }
  } else {
    for (int m = 0; m <= g.half; ++m) {
      out.profile_r.push_back(m * g.h);
      out.profile_v.push_back(0.5 * (w.at_lattice(m, 0) + w.at_lattice(-m, 0)));
    }
  }

  out.w = std::move(w);
  out.decay_exponent = decay_fit(out.w, std::min(8.0, 0.2 * g.L), std::min(30.0, 0.75 * g.L));

  // I(w) by the quadratic form; the identity with \int w^{p+1} is a test, not
  // the definition.
  {
    const FracOperator op0 = FracOperator::make(params.n, params.s, g.h, g.L, 0);
    Field aw = op0.apply(out.w);
    const double quad = inner(aw, out.w);
    Field w2 = field_pow(out.w, 2.0);
    Field wp1 = field_pow(out.w, params.p + 1.0);
    out.energy = 0.5 * (quad + w2.whole_integral()) - wp1.whole_integral() / (params.p + 1.0);
  }

  DerivativeFields dz = derivative_fields(params, out);
  DenseMatrix gm = gram(dz, nullptr, true);
  out.alpha = gm(0, 0);
  require(out.m_final > 0.0, "ground state: invalid Petviashvili factor");
  (void)tol;
  return out;
}

}  // namespace

GroundState solve_ground_state(const Params& params, std::shared_ptr<const Grid> grid,
                               const GammaResult& gamma, double tol, const Cache* cache,
                               int max_iter, std::optional<Field> seed) {
  params.validate();
  require(tol > 0.0, "solve_ground_state: tol must be positive");
  const Grid& g = *grid;

  json key_subset = {{"what", "groundstate"}, {"rev", 2},
                     {"n", params.n},   {"s", params.s},
                     {"p", params.p},         {"h", g.h},        {"L", g.L},
                     {"tol", tol}};
  const std::string key = Cache::key_of(key_subset);
  if (cache && !seed) {
    if (auto hit = cache->load("groundstate", key)) {
      Field w = field_from_json(hit->at("w"), grid);
      return finalize_state(params, gamma, std::move(w), hit->at("m_final").get<double>(),
                            hit->at("iterations").get<int>(), tol);
    }
  }

  const double gamma_exp = params.p / (params.p - 1.0);
  const double q = params.n + 2.0 * params.s;

  for (double amp : {1.0, 2.0, 0.5}) {
    Field w = seed ? *seed : make_field(grid, [&](int, Point x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return amp * std::exp(-r2);
    });
    double m = 0.0;
    int it = 0;
    bool ok = false;
    for (; it < max_iter; ++it) {
      if (it > 0) refit_tail(w, q);
      Field wp = field_pow(w, params.p);
      Field conv = convolve(gamma.field, wp);
      const double denom = inner(conv, w);
      if (!(denom > 0.0)) break;
      m = inner(w, w) / denom;
      if (!std::isfinite(m) || m > 1e8) break;
      const double factor = std::pow(m, gamma_exp);
      for (std::size_t k = 0; k < w.values.size(); ++k) {
        double v = factor * conv.values[k];
        w.values[k] = v > 0.0 ? v : 0.0;
      }
      if (w.max_abs() < 1e-10 || w.max_abs() > 1e8) break;
      if (std::abs(m - 1.0) < tol) {
        ok = true;
        ++it;
        break;
      }
    }
    if (ok) {
      GroundState state = finalize_state(params, gamma, std::move(w), m, it, tol);
      if (cache && !seed) {
        json payload = {{"w", field_to_json(state.w, params.s)},
                        {"m_final", m},
                        {"iterations", it},
                        {"sidecar",
                         {{"p", params.p},
                          {"s", params.s},
                          {"n", params.n},
                          {"residual", state.residual},
                          {"decay_exponent", state.decay_exponent},
                          {"alpha", state.alpha},
                          {"energy", state.energy}}}};
        cache->store("groundstate", key, payload);
      }
      return state;
    }
    if (seed) break;  // caller-provided seed: no amplitude continuation
  }
  fail("solve_ground_state: Petviashvili iteration did not converge");
}

double decay_fit_samples(std::span<const double> r, std::span<const double> v,
                         double r0, double r1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r0 || r[i] > r1) continue;
    require(v[i] > 0.0, "decay_fit: nonpositive sample in window");
    const double x = std::log(r[i]);
    const double y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  require(count >= 8, "decay_fit: window must contain at least 8 nodes");
  const double n = static_cast<double>(count);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() >= 2 && x.size() == y.size(), "loglog_slope: need at least 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: nonpositive sample");
    const double a = std::log(x[i]);
    const double b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double decay_fit(const Field& f, double r0, double r1) {
  require(r1 <= f.grid->L, "decay_fit: window must stay inside the truncation box");
  std::vector<double> rs, vs;
  for (long i = 0; i < f.grid->node_count(); ++i) {
    const double r = f.grid->radius(i);
    if (r < r0 || r > r1) continue;
    rs.push_back(r);
    vs.push_back(f[i]);
  }
  return decay_fit_samples(rs, vs, r0, r1);
}

Field abs_field(const Field& f) {
  Field out(f.grid, ExteriorRule::zero());
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = std::abs(f.values[i]);
  return out;
}

DerivativeFields derivative_fields(const Params& params, const GroundState& gs,
                                   std::array<int, 2> xi_cells) {
  const Grid& g = *gs.w.grid;
  Field w_xi = (xi_cells[0] == 0 && xi_cells[1] == 0)
                   ? gs.w
                   : gs.w.translated(xi_cells[0], xi_cells[1]);
  DerivativeFields out;
  out.xi_cells = xi_cells;
  out.nu1 = std::min(params.n + 2.0 * params.s + 1.0,
                     params.p * (params.n + 2.0 * params.s));
  const double inv2h = 1.0 / (2.0 * g.h);
  for (int axis = 0; axis < params.n; ++axis) {
    Field z(gs.w.grid, ExteriorRule::zero());
    for (long i = 0; i < g.node_count(); ++i) {
      const int mx = g.mx_of(i);
      const int my = g.my_of(i);
      const double up = axis == 0 ? w_xi.at_lattice(mx + 1, my) : w_xi.at_lattice(mx, my + 1);
      const double dn = axis == 0 ? w_xi.at_lattice(mx - 1, my) : w_xi.at_lattice(mx, my - 1);
      z[i] = (up - dn) * inv2h;
    }
    Field za = abs_field(z);
    // recenter at xi for the amplitude fit window
    double amp = 0.0;
    {
      double num = 0.0, den = 0.0;
      for (long i = 0; i < g.node_count(); ++i) {
        Point x = g.point(i);
        x[0] -= xi_cells[0] * g.h;
        x[1] -= xi_cells[1] * g.h;
        const double r = params.n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
        if (r < 0.55 * g.L || r > 0.9 * g.L) continue;
        const double b = std::pow(r, -out.nu1);
        num += za[i] * b;
        den += b * b;
      }
      amp = den > 0.0 ? num / den : 0.0;
    }
    out.tail_amplitude.push_back(std::max(amp, 0.0));
    out.Z.push_back(std::move(z));
  }
  return out;
}

DenseMatrix gram(const DerivativeFields& dz, const Grid* region_mask_grid, bool whole_space) {
  const int n = static_cast<int>(dz.Z.size());
  require(n >= 1, "gram: no derivative fields");
  const Grid& g = *dz.Z[0].grid;
  DenseMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double val = 0.0;
      if (region_mask_grid) {
        require(region_mask_grid->node_count() == g.node_count(), "gram: region grid mismatch");
        std::vector<double> prod;
        prod.reserve(g.node_count());
        for (long k = 0; k < g.node_count(); ++k)
          if (region_mask_grid->inside(k)) prod.push_back(dz.Z[i][k] * dz.Z[j][k]);
        double cell = g.h;
        if (g.n == 2) cell *= g.h;
        val = cell * pairwise_sum(prod);
      } else {
        val = inner(dz.Z[i], dz.Z[j]);
        if (whole_space && i == j) {
          val += power_tail_mass(g.n, g.L + 0.5 * g.h,
                                 dz.tail_amplitude[i] * dz.tail_amplitude[j], 2.0 * dz.nu1);
        }
        // off-diagonal tails vanish by odd symmetry
      }
      out(i, j) = val;
      out(j, i) = val;
    }
  }
  return out;
}

TailCheck tail_integral_check(const Params& params, const Field& w, double q, double delta,
                              std::array<int, 2> xi_cells) {
  require(q > 1.0, "tail_integral_check: q must exceed 1");
  require(delta >= 1.0, "tail_integral_check: delta must be at least 1");
  const Grid& g = *w.grid;
  require(delta < g.L || w.exterior.kind == ExteriorRule::Kind::PowerTail,
          "tail_integral_check: delta beyond truncation without tail rule");
  Field wq = field_pow(w, q);
  std::vector<double> terms;
  for (long i = 0; i < g.node_count(); ++i) {
    Point x = g.point(i);
    x[0] -= xi_cells[0] * g.h;
    x[1] -= xi_cells[1] * g.h;
    const double r = params.n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
    if (r > delta) terms.push_back(wq[i]);
  }
  double cell = g.h;
  if (g.n == 2) cell *= g.h;
  double integral = cell * pairwise_sum(terms);
  if (wq.exterior.kind == ExteriorRule::Kind::PowerTail)
    integral += power_tail_mass(g.n, g.L + 0.5 * g.h, wq.exterior.amplitude,
                                wq.exterior.exponent);
  TailCheck out;
  out.integral = integral;
  out.bound_exponent = params.n * (q - 1.0) + 2.0 * params.s * q;
  out.ratio = integral * std::pow(delta, out.bound_exponent);
  return out;
}

}  // namespace fraconc
