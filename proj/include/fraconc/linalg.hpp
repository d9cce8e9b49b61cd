#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fraconc {

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  std::vector<double> apply(std::span<const double> x) const;
};

// LU with partial pivoting, for symmetric-indefinite saddle systems and the
// general dense solves.
struct LuFactor {
  DenseMatrix lu;
  std::vector<int> piv;
  static LuFactor compute(DenseMatrix m);
  std::vector<double> solve(std::span<const double> b) const;
};

// Cholesky for the SPD Dirichlet operators.
struct CholFactor {
  DenseMatrix l;
  static CholFactor compute(const DenseMatrix& m);
  std::vector<double> solve(std::span<const double> b) const;
};

// Preconditioned CG; returns iteration count, -1 on non-convergence.
int conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                       std::span<const double> b, std::span<double> x,
                       double rel_tol, int max_iter,
                       std::span<const double> inv_diag = {});

double dot(std::span<const double> x, std::span<const double> y);

}  // namespace fraconc
