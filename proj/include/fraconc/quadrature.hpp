#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fraconc {

// Nodes/weights of the 16-point Gauss-Legendre rule on [-1, 1].
std::span<const double> gauss16_nodes();
std::span<const double> gauss16_weights();

// 16-point Gauss on [a, b].
double gauss_panel(const std::function<double(double)>& f, double a, double b);

// Composite Gauss over [a, b] with n equal panels.
double gauss_composite(const std::function<double(double)>& f, double a, double b, int panels);

// \int_a^\infty f, mapped by y = a + t/(1-t); integrand must decay at least
// like y^{-1-eta} with eta > 0.
double gauss_semi_infinite(const std::function<double(double)>& f, double a, int panels = 24);

}  // namespace fraconc
