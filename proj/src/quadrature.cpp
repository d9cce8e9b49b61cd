#include "fraconc/quadrature.hpp"

#include <array>
#include <cmath>

namespace fraconc {

namespace {
// 16-point Gauss-Legendre abscissae/weights (positive half; rule is symmetric).
constexpr std::array<double, 8> kX = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kW = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

std::array<double, 16> make_nodes() {
  std::array<double, 16> n{};
  for (int i = 0; i < 8; ++i) {
    n[i] = -kX[7 - i];
    n[8 + i] = kX[i];
  }
  return n;
}
std::array<double, 16> make_weights() {
  std::array<double, 16> w{};
  for (int i = 0; i < 8; ++i) {
    w[i] = kW[7 - i];
    w[8 + i] = kW[i];
  }
  return w;
}
const std::array<double, 16> g_nodes = make_nodes();
const std::array<double, 16> g_weights = make_weights();
}  // namespace

std::span<const double> gauss16_nodes() { return g_nodes; }
std::span<const double> gauss16_weights() { return g_weights; }

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 16; ++i) s += g_weights[i] * f(mid + half * g_nodes[i]);
  return s * half;
}

double gauss_composite(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels < 1) panels = 1;
  const double w = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) s += gauss_panel(f, a + p * w, a + (p + 1) * w);
  return s;
}

double gauss_semi_infinite(const std::function<double(double)>& f, double a, int panels) {
  auto g = [&](double t) {
    const double om = 1.0 - t;
    const double y = a + t / om;
    return f(y) / (om * om);
  };
  // Graded panels toward t=1 resolve the decaying far field.
  double s = 0.0;
  double t0 = 0.0;
  for (int p = 0; p < panels; ++p) {
    double t1 = 1.0 - std::pow(0.5, (p + 1) * 24.0 / panels);
    if (p == panels - 1) t1 = 1.0 - 1e-12;
    s += gauss_panel(g, t0, t1);
    t0 = t1;
  }
  return s;
}

}  // namespace fraconc
