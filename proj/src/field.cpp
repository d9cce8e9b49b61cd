#include "fraconc/field.hpp"

#include <cmath>

#include "fraconc/common.hpp"

namespace fraconc {

ExteriorRule ExteriorRule::power_tail(double amplitude, double exponent, Point center) {
  ExteriorRule r;
  r.kind = Kind::PowerTail;
  r.amplitude = amplitude;
  r.exponent = exponent;
  r.center = center;
  return r;
}

ExteriorRule ExteriorRule::prescribed_fn(std::function<double(int n, Point)> fn) {
  ExteriorRule r;
  r.kind = Kind::Prescribed;
  r.prescribed = std::move(fn);
  return r;
}

double Field::rule_value(Point x) const {
  switch (exterior.kind) {
    case ExteriorRule::Kind::Zero:
      return 0.0;
    case ExteriorRule::Kind::PowerTail: {
      const double dx = x[0] - exterior.center[0];
      const double dy = grid->n == 2 ? x[1] - exterior.center[1] : 0.0;
      const double r = grid->n == 1 ? std::abs(dx) : std::hypot(dx, dy);
      return exterior.amplitude * std::pow(r, -exterior.exponent);
    }
    case ExteriorRule::Kind::Prescribed:
      return exterior.prescribed(grid->n, x);
  }
  return 0.0;
}

double Field::at_lattice(int mx, int my) const {
  if (grid->in_box(mx, my)) return values[static_cast<std::size_t>(grid->index(mx, my))];
  return rule_value(grid->lattice_point(mx, my));
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double Field::box_integral() const {
  double cell = grid->h;
  if (grid->n == 2) cell *= grid->h;
  return cell * pairwise_sum(values);
}

double Field::whole_integral() const {
  double total = box_integral();
  if (exterior.kind == ExteriorRule::Kind::PowerTail) {
    total += power_tail_mass(grid->n, grid->L + 0.5 * grid->h, exterior.amplitude,
                             exterior.exponent, exterior.center);
  }
  return total;
}

double power_tail_mass(int n, double R, double amplitude, double exponent, Point center) {
  if (amplitude == 0.0) return 0.0;
  if (n == 1) {
    require(exponent > 1.0, "power_tail_mass: exponent must exceed n");
    const double right = R - center[0];
    const double left = R + center[0];
    require(right > 0.0 && left > 0.0, "power_tail_mass: center outside box");
    return amplitude / (exponent - 1.0) *
           (std::pow(right, 1.0 - exponent) + std::pow(left, 1.0 - exponent));
  }
  require(exponent > 2.0, "power_tail_mass: exponent must exceed n");
  // Centered ring formula; adequate for the 2D diagnostics.
  return amplitude * 2.0 * M_PI / (exponent - 2.0) * std::pow(R, 2.0 - exponent);
}

Field Field::translated(int cells_x, int cells_y) const {
  Field out(grid, exterior);
  const int half = grid->half;
  if (grid->n == 1) {
    for (int m = -half; m <= half; ++m)
      out[grid->index(m)] = at_lattice(m - cells_x);
    out.exterior.center[0] += cells_x * grid->h;
  } else {
    for (int my = -half; my <= half; ++my)
      for (int mx = -half; mx <= half; ++mx)
        out[grid->index(mx, my)] = at_lattice(mx - cells_x, my - cells_y);
    out.exterior.center[0] += cells_x * grid->h;
    out.exterior.center[1] += cells_y * grid->h;
  }
  return out;
}

double Field::fit_tail_amplitude(double q, double r0, double r1) const {
  // A minimizing sum (f - A r^{-q})^2 over window nodes.
  double num = 0.0, den = 0.0;
  long count = 0;
  for (long i = 0; i < grid->node_count(); ++i) {
    const double r = grid->radius(i);
    if (r < r0 || r > r1) continue;
    const double basis = std::pow(r, -q);
    num += values[static_cast<std::size_t>(i)] * basis;
    den += basis * basis;
    ++count;
  }
  require(count >= 4, "fit_tail_amplitude: window too small");
  return num / den;
}

Field make_field(std::shared_ptr<const Grid> g,
                 const std::function<double(int n, Point)>& fn, ExteriorRule rule) {
  Field f(std::move(g), std::move(rule));
  for (long i = 0; i < f.grid->node_count(); ++i) f[i] = fn(f.grid->n, f.grid->point(i));
  return f;
}

Field field_pow(const Field& f, double expo) {
  Field out(f.grid, f.exterior);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double v = f.values[i];
    out.values[i] = v <= 0.0 ? 0.0 : std::pow(v, expo);
  }
  if (f.exterior.kind == ExteriorRule::Kind::PowerTail) {
    out.exterior.amplitude = std::pow(std::max(f.exterior.amplitude, 0.0), expo);
    out.exterior.exponent = f.exterior.exponent * expo;
  } else if (f.exterior.kind == ExteriorRule::Kind::Prescribed) {
    auto base = f.exterior.prescribed;
    out.exterior.prescribed = [base, expo](int n, Point x) {
      const double v = base(n, x);
      return v <= 0.0 ? 0.0 : std::pow(v, expo);
    };
  }
  return out;
}

double inner(const Field& a, const Field& b) {
  require(a.grid.get() == b.grid.get() || (a.grid->n == b.grid->n && a.grid->L == b.grid->L && a.grid->h == b.grid->h),
          "inner: incompatible grids");
  std::vector<double> prod(a.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.values[i] * b.values[i];
  double cell = a.grid->h;
  if (a.grid->n == 2) cell *= a.grid->h;
  return cell * pairwise_sum(prod);
}

}  // namespace fraconc
