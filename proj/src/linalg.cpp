#include "fraconc/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "fraconc/common.hpp"

namespace fraconc {

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(rows, 0.0);
  parallel_for(0, static_cast<std::size_t>(rows), [&](std::size_t i) {
    const double* row = a.data() + i * cols;
    double s = 0.0;
    for (int j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  });
  return y;
}

LuFactor LuFactor::compute(DenseMatrix m) {
  const int n = m.rows;
  require(m.rows == m.cols, "LuFactor: matrix must be square");
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int imax = k;
    double amax = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(m(i, k));
      if (v > amax) { amax = v; imax = i; }
    }
    if (amax == 0.0) fail("LuFactor: singular matrix");
    if (imax != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(imax, j));
      std::swap(piv[k], piv[imax]);
    }
    const double pivval = m(k, k);
    for (int i = k + 1; i < n; ++i) {
      double f = m(i, k) / pivval;
      m(i, k) = f;
      if (f == 0.0) continue;
      double* ri = &m(i, k + 1);
      const double* rk = &m(k, k + 1);
      for (int j = 0; j < n - k - 1; ++j) ri[j] -= f * rk[j];
    }
  }
  return LuFactor{std::move(m), std::move(piv)};
}

std::vector<double> LuFactor::solve(std::span<const double> b) const {
  const int n = lu.rows;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[piv[i]];
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    const double* row = lu.a.data() + static_cast<std::size_t>(i) * lu.cols;
    for (int j = 0; j < i; ++j) s -= row[j] * x[j];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    const double* row = lu.a.data() + static_cast<std::size_t>(i) * lu.cols;
    for (int j = i + 1; j < n; ++j) s -= row[j] * x[j];
    x[i] = s / row[i];
  }
  return x;
}

CholFactor CholFactor::compute(const DenseMatrix& m) {
  const int n = m.rows;
  require(m.rows == m.cols, "CholFactor: matrix must be square");
  DenseMatrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      const double* ri = &l(i, 0);
      const double* rj = &l(j, 0);
      for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
      if (i == j) {
        if (s <= 0.0) fail("CholFactor: matrix not positive definite");
        l(i, j) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return CholFactor{std::move(l)};
}

std::vector<double> CholFactor::solve(std::span<const double> b) const {
  const int n = l.rows;
  std::vector<double> x(b.begin(), b.end());
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    const double* row = l.a.data() + static_cast<std::size_t>(i) * l.cols;
    for (int j = 0; j < i; ++j) s -= row[j] * x[j];
    x[i] = s / row[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= l(j, i) * x[j];
    x[i] = s / l(i, i);
  }
  return x;
}

double dot(std::span<const double> x, std::span<const double> y) {
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = x[i] * y[i];
  return pairwise_sum(prod);
}

int conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                       std::span<const double> b, std::span<double> x,
                       double rel_tol, int max_iter,
                       std::span<const double> inv_diag) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    for (auto& v : x) v = 0.0;
    return 0;
  }
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (inv_diag.empty()) out = in;
    else for (std::size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
  };
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    apply(p, ap);
    double pap = dot(p, ap);
    if (pap <= 0.0) fail("conjugate_gradient: operator not positive definite");
    double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return it + 1;
    precond(r, z);
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return -1;
}

}  // namespace fraconc
