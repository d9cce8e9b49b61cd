#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "fraconc/params.hpp"

namespace fraconc {

// Uniform truncated lattice on [-L, L]^n with an odd node count per axis so
// the origin is a node. mask marks nodes inside Omega_eps = Omega / eps.
struct Grid {
  int n = 1;
  double L = 0.0;
  double h = 0.0;
  int half = 0;  // nodes per axis = 2*half + 1
  std::vector<std::uint8_t> mask;

  int nodes_per_axis() const { return 2 * half + 1; }
  long node_count() const {
    long m = nodes_per_axis();
    return n == 1 ? m : m * m;
  }

  // Lattice index <-> integer coordinates in [-half, half].
  long index(int mx, int my = 0) const {
    if (n == 1) return static_cast<long>(mx + half);
    return static_cast<long>(my + half) * nodes_per_axis() + (mx + half);
  }
  int mx_of(long idx) const {
    return static_cast<int>(idx % nodes_per_axis()) - half;
  }
  int my_of(long idx) const {
    return n == 1 ? 0 : static_cast<int>(idx / nodes_per_axis()) - half;
  }
  bool in_box(int mx, int my = 0) const {
    return mx >= -half && mx <= half && (n == 1 || (my >= -half && my <= half));
  }
  Point point(long idx) const {
    return Point{h * mx_of(idx), h * my_of(idx)};
  }
  Point lattice_point(int mx, int my = 0) const {
    return Point{h * mx, h * my};
  }
  long origin_index() const { return index(0, 0); }
  bool inside(long idx) const { return mask[static_cast<std::size_t>(idx)] != 0; }

  double radius(long idx) const {
    Point x = point(idx);
    return n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
  }

  std::vector<long> interior_indices() const;
};

// build_grid: mask derived from the domain descriptor scaled by 1/eps.
std::shared_ptr<const Grid> build_grid(const Params& params, double L, double h);

// Whole-space grid (mask everywhere true), for entire-space objects.
std::shared_ptr<const Grid> build_free_grid(int n, double L, double h);

}  // namespace fraconc
