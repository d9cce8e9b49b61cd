#pragma once

#include "fraconc/field.hpp"

namespace fraconc {

// Discrete (f*g)(x_i) = h^n sum f(y) g(x_i - y) over the union of the lattice
// ranges of both factors (values beyond the box come from the exterior
// rules), plus a mirrored two-tail quadrature remainder when both rules are
// PowerTail. The term pairing is symmetric, so f*g == g*f bitwise in 1D.
Field convolve(const Field& f, const Field& g);

}  // namespace fraconc
