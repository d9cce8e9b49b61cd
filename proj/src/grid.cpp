#include "fraconc/grid.hpp"

#include <cmath>

namespace fraconc {

namespace {

std::shared_ptr<Grid> make_box(int n, double L, double h) {
  require(L > 0.0, "build_grid: L must be positive");
  require(h > 0.0, "build_grid: h must be positive");
  const double cells = L / h;
  const double rounded = std::round(cells);
  require(std::abs(cells - rounded) < 1e-9 && rounded >= 1.0,
          "build_grid: h must divide L evenly (odd node count per axis)");
  auto g = std::make_shared<Grid>();
  g->n = n;
  g->L = L;
  g->h = h;
  g->half = static_cast<int>(rounded);
  g->mask.assign(static_cast<std::size_t>(g->node_count()), 1);
  return g;
}

}  // namespace

std::vector<long> Grid::interior_indices() const {
  std::vector<long> out;
  for (long i = 0; i < node_count(); ++i)
    if (mask[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

std::shared_ptr<const Grid> build_grid(const Params& params, double L, double h) {
  params.validate();
  auto g = make_box(params.n, L, h);
  const double scale = 1.0 / params.eps;
  for (long i = 0; i < g->node_count(); ++i) {
    g->mask[static_cast<std::size_t>(i)] =
        params.domain.contains(params.n, g->point(i), scale) ? 1 : 0;
  }
  return g;
}

std::shared_ptr<const Grid> build_free_grid(int n, double L, double h) {
  require(n == 1 || n == 2, "build_free_grid: n must be 1 or 2");
  return make_box(n, L, h);
}

}  // namespace fraconc
