#pragma once

#include <array>
#include <functional>
#include <span>

#include "fraconc/common.hpp"

namespace fraconc {

using Point = std::array<double, 2>;  // second coordinate unused when n == 1

enum class DomainKind { Interval, Ball };

// Bounded domain Omega: interval (-a, a) or ball of radius a, with an
// optional general mask override.
struct Domain {
  DomainKind kind = DomainKind::Interval;
  double radius = 1.0;
  std::function<bool(int n, Point)> mask_override;

  double diameter() const { return 2.0 * radius; }

  bool contains(int n, Point x, double scale = 1.0) const {
    if (mask_override) {
      Point y{x[0] / scale, x[1] / scale};
      return mask_override(n, y);
    }
    double r2 = x[0] * x[0];
    if (n == 2) r2 += x[1] * x[1];
    const double r = radius * scale;
    // Strict inequality: nodes landing exactly on the boundary are exterior.
    return r2 < r * r * (1.0 - 1e-12);
  }
};

struct Params {
  int n = 1;
  double s = 0.4;
  double p = 2.0;
  double eps = 0.1;
  Domain domain;

  double critical_exponent() const {
    return (n + 2.0 * s) / (n - 2.0 * s);
  }

  void validate() const {
    require(n == 1 || n == 2, "Params: n must be 1 or 2");
    require(s > 0.0 && s < 1.0, "Params: s must lie in (0,1)");
    require(static_cast<double>(n) > 2.0 * s, "Params: requires n > 2s");
    require(p > 1.0 && p < critical_exponent(),
            "Params: p must lie in (1,(n+2s)/(n-2s))");
    require(eps > 0.0, "Params: eps must be positive");
    require(domain.radius > 0.0, "Params: domain must have nonempty interior");
  }
};

}  // namespace fraconc
