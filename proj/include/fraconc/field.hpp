#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fraconc/grid.hpp"

namespace fraconc {

// Exterior-extension rule for values beyond the truncation box.
struct ExteriorRule {
  enum class Kind { Zero, PowerTail, Prescribed };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;   // PowerTail: A * |x - center|^{-exponent}
  double exponent = 0.0;
  Point center{0.0, 0.0};
  std::function<double(int n, Point)> prescribed;

  static ExteriorRule zero() { return ExteriorRule{}; }
  static ExteriorRule power_tail(double amplitude, double exponent, Point center = {0.0, 0.0});
  static ExteriorRule prescribed_fn(std::function<double(int n, Point)> fn);
};

// Scalar field aligned with a Grid, plus the exterior rule.
struct Field {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;
  ExteriorRule exterior;

  Field() = default;
  Field(std::shared_ptr<const Grid> g, ExteriorRule rule = ExteriorRule::zero())
      : grid(std::move(g)),
        values(static_cast<std::size_t>(grid->node_count()), 0.0),
        exterior(std::move(rule)) {}

  double& operator[](long i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](long i) const { return values[static_cast<std::size_t>(i)]; }

  // Value at lattice coordinates: node value inside the box, rule outside.
  double at_lattice(int mx, int my = 0) const;
  double rule_value(Point x) const;

  double max_abs() const;
  // h^n * sum of node values (cell quadrature over the box).
  double box_integral() const;
  // Box quadrature plus the closed-form PowerTail remainder.
  double whole_integral() const;

  Field translated(int cells_x, int cells_y = 0) const;

  // Least-squares amplitude of A * r^{-q} over radial window [r0, r1].
  double fit_tail_amplitude(double q, double r0, double r1) const;
};

Field make_field(std::shared_ptr<const Grid> g,
                 const std::function<double(int n, Point)>& fn,
                 ExteriorRule rule = ExteriorRule::zero());

// Pointwise power with consistent PowerTail metadata (q -> q * expo).
Field field_pow(const Field& f, double expo);

// h^n-weighted inner product over box nodes.
double inner(const Field& a, const Field& b);

// Closed-form integral of A|x-c|^{-q} over the complement of the box
// [-R, R]^n (n=1 exact for off-center; n=2 centered ring formula).
double power_tail_mass(int n, double R, double amplitude, double exponent, Point center = {0.0, 0.0});

}  // namespace fraconc
