#include "fraconc/frac.hpp"

#include <cmath>

#include "fraconc/common.hpp"
#include "fraconc/quadrature.hpp"

namespace fraconc {

double cns_constant(int n, double s) {
  require(s > 0.0 && s < 1.0, "cns_constant: s must lie in (0,1)");
  require(n >= 1, "cns_constant: n must be positive");
  // 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|), with |Gamma(-s)| written as
  // Gamma(2-s)/(s(1-s)) so the expression stays finite near s = 1.
  return std::pow(4.0, s) * std::tgamma(0.5 * n + s) * s * (1.0 - s) /
         (std::pow(M_PI, 0.5 * n) * std::tgamma(2.0 - s));
}

namespace {

// \int_a^b y^{-1-2s} dy
double kernel_mass(double a, double b, double s) {
  return (std::pow(a, -2.0 * s) - std::pow(b, -2.0 * s)) / (2.0 * s);
}

// \int_a^b y^{1-2s} dy
double second_moment(double a, double b, double s) {
  const double e = 2.0 - 2.0 * s;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

// \int_{[-h/2,h/2]^2} |z|^{-2s} dz by quadrant Gauss panels.
double square_cell_moment(double h, double s) {
  double total = 0.0;
  auto inner = [&](double x) {
    return gauss_composite(
        [&](double y) { return std::pow(x * x + y * y, -s); }, 0.0, 0.5 * h, 8);
  };
  total = gauss_composite(inner, 0.0, 0.5 * h, 8);
  return 4.0 * total;
}

}  // namespace

FracOperator FracOperator::make(int n, double s, double h, double L, int mass_shift) {
  require(n == 1 || n == 2, "FracOperator: n must be 1 or 2");
  require(s > 0.0 && s < 1.0, "FracOperator: s must lie in (0,1)");
  require(h > 0.0 && L > 0.0, "FracOperator: h, L must be positive");
  FracOperator op;
  op.n = n;
  op.s = s;
  op.cns = cns_constant(n, s);
  op.h = h;
  op.L = L;
  op.mass_shift = mass_shift;

  const int m_box = static_cast<int>(std::round(L / h));
  if (n == 1) {
    const int m_glob = 2 * m_box + 2;
    op.y_max = (m_glob + 0.5) * h;
    std::vector<double> cell_w(m_glob + 1, 0.0);
    double lattice_second_moment = 0.0;
    for (int m = 1; m <= m_glob; ++m) {
      cell_w[m] = kernel_mass((m - 0.5) * h, (m + 0.5) * h, s);
      lattice_second_moment += cell_w[m] * (m * h) * (m * h);
    }
    // Singular cell [0,h/2] by Taylor, plus the lattice moment deficit so the
    // scheme reproduces quadratics over [0, y_max] exactly.
    const double m0 = second_moment(0.0, 0.5 * h, s);
    const double kappa = second_moment(0.5 * h, op.y_max, s) - lattice_second_moment;
    const double sd = (m0 + kappa) / (h * h);
    op.couplings.reserve(2 * m_glob);
    op.pairs.reserve(m_glob);
    for (int m = 1; m <= m_glob; ++m) {
      const double w = op.cns * (cell_w[m] + (m == 1 ? sd : 0.0));
      op.couplings.push_back({m, 0, w});
      op.couplings.push_back({-m, 0, w});
      op.pairs.push_back({m, 0, w});
    }
    op.far_coef = op.cns * 2.0 * std::pow(op.y_max, -2.0 * s) / (2.0 * s);
  } else {
    const int m_glob = 2 * m_box + 2;
    const double r_max = (m_glob + 0.5) * h;
    op.y_max = r_max;
    const double half_c = 0.5 * op.cns;  // full-plane (2f - f+ - f-) form
    // Midpoint cell weights over the full offset lattice, singular cell via
    // the 5-point Taylor term with the exact square-cell moment.
    const double q_cell = square_cell_moment(h, s);
    const double sd2 = half_c * 0.5 * q_cell / (h * h);
    for (int my = 0; my <= m_glob; ++my) {
      for (int mx = (my == 0 ? 1 : -m_glob); mx <= m_glob; ++mx) {
        const double r = h * std::hypot(static_cast<double>(mx), static_cast<double>(my));
        if (r > r_max) continue;
        double w = half_c * h * h * std::pow(r, -2.0 - 2.0 * s);
        if ((std::abs(mx) == 1 && my == 0) || (mx == 0 && my == 1)) w += sd2;
        op.pairs.push_back({mx, my, w});
        op.couplings.push_back({mx, my, w});
        op.couplings.push_back({-mx, -my, w});
      }
    }
    op.far_coef = half_c * 2.0 * 2.0 * M_PI * std::pow(r_max, -2.0 * s) / (2.0 * s);
  }
  for (const auto& c : op.couplings) op.coupling_total += c.w;
  return op;
}

double FracOperator::tail_coefficient() const {
  const double R = L + 0.5 * h;
  if (n == 1) return cns * 2.0 * kernel_mass(R, 1e300, s);
  return cns * M_PI * std::pow(R, -2.0 * s) / s;
}

namespace {

// Far contribution \int_{y_max}^inf f_rule(x +- y) y^{-1-2s} dy (n = 1) or the
// centered ring model (n = 2) for PowerTail rules.
double far_tail(const FracOperator& op, const Field& f, Point x) {
  if (f.exterior.kind == ExteriorRule::Kind::Zero) return 0.0;
  const double A = f.exterior.amplitude;
  if (A == 0.0) return 0.0;
  const double q = f.exterior.exponent;
  const double s = op.s;
  if (op.n == 1) {
    const double c = f.exterior.center[0];
    auto g = [&](double y) {
      return (std::pow(std::abs(x[0] + y - c), -q) + std::pow(std::abs(x[0] - y - c), -q)) *
             std::pow(y, -1.0 - 2.0 * s);
    };
    return op.cns * A * gauss_semi_infinite(g, op.y_max);
  }
  // Centered model: \int_{|z|>y_max} A |z|^{-q} |z|^{-2-2s} dz, both signs.
  return op.cns * A * 2.0 * M_PI * std::pow(op.y_max, -(q + 2.0 * s)) / (q + 2.0 * s);
}

}  // namespace

Field FracOperator::apply(const Field& f) const {
  const Grid& g = *f.grid;
  require(g.n == n && std::abs(g.h - h) < 1e-14 && std::abs(g.L - L) < 1e-12,
          "FracOperator::apply: grid mismatch");
  if (f.exterior.kind == ExteriorRule::Kind::Prescribed)
    fail("frac_apply: Prescribed exterior rule has no closed-form tail integral");
  if (f.exterior.kind == ExteriorRule::Kind::PowerTail && f.exterior.amplitude != 0.0)
    require(f.exterior.exponent > n,
            "frac_apply: PowerTail exponent must exceed n for integrability");
  Field out(f.grid, ExteriorRule::zero());
  const double diag = diagonal();
  const bool zero_rule = f.exterior.kind == ExteriorRule::Kind::Zero;

  if (n == 1 && zero_rule) {
    // fast path: in-box pair couplings only, fixed ascending order
    const int half = g.half;
    const double* v = f.values.data();
    parallel_for(0, static_cast<std::size_t>(g.node_count()), [&](std::size_t ui) {
      const long i = static_cast<long>(ui);
      double acc = 0.0;
      for (const auto& c : pairs) {
        const long jp = i + c.dmx;
        const long jm = i - c.dmx;
        acc += c.w * ((jp >= 0 && jp <= 2 * half ? v[jp] : 0.0) +
                      (jm >= 0 && jm <= 2 * half ? v[jm] : 0.0));
      }
      out[i] = diag * f[i] - acc;
    });
    return out;
  }

  parallel_for(0, static_cast<std::size_t>(g.node_count()), [&](std::size_t ui) {
    const long i = static_cast<long>(ui);
    const int mx = g.mx_of(i);
    const int my = g.my_of(i);
    double acc = 0.0;
    for (const auto& c : pairs)
      acc += c.w * (f.at_lattice(mx + c.dmx, my + c.dmy) +
                    f.at_lattice(mx - c.dmx, my - c.dmy));
    out[i] = diag * f[i] - acc - far_tail(*this, f, g.point(i));
  });
  return out;
}

FracOperator frac_operator(const Params& params, const Grid& grid, int mass_shift) {
  return FracOperator::make(params.n, params.s, grid.h, grid.L, mass_shift);
}

Field frac_apply(const FracOperator& op, const Field& f) { return op.apply(f); }

}  // namespace fraconc
