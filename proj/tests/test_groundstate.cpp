#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/testlab.hpp"

using namespace fraconc;
using namespace testlab;

TEST_CASE("petviashvili converges to the ground state") {
  const Base& b = base();
  const GroundState& gs = b.gs;

  SUBCASE("discrete-equation residual") {
    CHECK(gs.residual < 1e-6);
  }

  SUBCASE("fixed point of the convolution identity") {
    CHECK(gs.conv_identity < 1e-4);
    CHECK(std::abs(gs.m_final - 1.0) < 1e-10);
  }

  SUBCASE("even symmetry is preserved") {
    double emax = 0.0;
    for (int m = 0; m <= b.grid->half; ++m)
      emax = std::max(emax, std::abs(gs.w.at_lattice(m) - gs.w.at_lattice(-m)));
    CHECK(emax < 1e-12 * gs.w.max_abs());
  }

  SUBCASE("positive and radially decreasing") {
    double mn = 1e300;
    for (double v : gs.w.values) mn = std::min(mn, v);
    CHECK(mn > 0.0);
    for (std::size_t k = 1; k < gs.profile_r.size(); ++k)
      CHECK(gs.profile_v[k] <= gs.profile_v[k - 1] * (1.0 + 1e-12));
  }

  SUBCASE("decay exponent in the expected band") {
    CHECK(gs.decay_exponent >= 1.65);
    CHECK(gs.decay_exponent <= 1.95);
  }

  SUBCASE("rejects bad tolerance") {
    CHECK_THROWS(solve_ground_state(b.params, b.grid, b.gamma, -1.0));
  }
}

TEST_CASE("decay_fit") {
  auto g = build_free_grid(1, 40.0, 0.05);

  SUBCASE("exact power field") {
    Field f = make_field(g, [](int, Point x) {
      const double r = std::max(std::abs(x[0]), 1e-3);
      return std::pow(r, -1.8);
    });
    CHECK(decay_fit(f, 2.0, 30.0) == doctest::Approx(1.8).epsilon(1e-6));
  }

  SUBCASE("window validation") {
    Field f = make_field(g, [](int, Point) { return 1.0; });
    CHECK_THROWS(decay_fit(f, 39.9, 39.95));  // fewer than 8 nodes
    CHECK_THROWS(decay_fit(f, 5.0, 50.0));    // beyond the truncation box
    Field neg = make_field(g, [](int, Point x) { return x[0]; });
    CHECK_THROWS(decay_fit(neg, 5.0, 30.0));  // nonpositive samples
  }

  SUBCASE("Z_1 decays at least like nu_1") {
    const Base& b = base();
    DerivativeFields dz = derivative_fields(b.params, b.gs);
    const double nu1 = std::min(1.0 + 2.0 * 0.4 + 1.0, 2.0 * (1.0 + 2.0 * 0.4));
    CHECK(dz.nu1 == doctest::Approx(nu1));
    const double fit = decay_fit(abs_field(dz.Z[0]), 8.0, 30.0);
    CHECK(fit >= nu1 - 0.2);
  }
}

TEST_CASE("translation covariance") {
  const Base& b = base();
  Field seed = make_field(b.grid, [&](int, Point x) {
    const double t = x[0] - b.grid->h;  // shifted Gaussian seed
    return std::exp(-t * t);
  });
  GroundState shifted =
      solve_ground_state(b.params, b.grid, b.gamma, 1e-10, nullptr, 2000, seed);
  Field expected = b.gs.w.translated(1);
  double emax = 0.0;
  for (long i = 0; i < b.grid->node_count(); ++i) {
    if (std::abs(b.grid->point(i)[0]) > 30.0) continue;
    emax = std::max(emax, std::abs(shifted.w[i] - expected[i]));
  }
  CHECK(emax < 1e-6 * b.gs.w.max_abs());
}

TEST_CASE("derivative fields are consistent with the radial profile") {
  // 2D: Z_i of a synthetic radial field must match w'(r) x_i / r.
  auto g2 = build_free_grid(2, 8.0, 0.25);
  auto profile = [](double r) { return std::exp(-0.4 * r * r); };
  auto dprofile = [](double r) { return -0.8 * r * std::exp(-0.4 * r * r); };
  GroundState fake;
  fake.w = make_field(g2, [&](int, Point x) { return profile(std::hypot(x[0], x[1])); });
  Params p2 = desk_params();
  p2.n = 2;
  DerivativeFields dz = derivative_fields(p2, fake);
  double emax = 0.0;
  for (long i = 0; i < g2->node_count(); ++i) {
    const Point x = g2->point(i);
    const double r = std::hypot(x[0], x[1]);
    if (r < 0.25 || r > 6.0) continue;
    const double want = dprofile(r) * x[0] / r;
    emax = std::max(emax, std::abs(dz.Z[0][i] - want));
  }
  CHECK(emax < 0.5 * 0.25 * 0.25);  // O(h^2)

  SUBCASE("odd in its own axis, even in the other") {
    for (long i = 0; i < g2->node_count(); ++i) {
      const int mx = g2->mx_of(i), my = g2->my_of(i);
      CHECK(dz.Z[0][i] == doctest::Approx(-dz.Z[0][g2->index(-mx, my)]).epsilon(1e-12));
      CHECK(dz.Z[0][i] == doctest::Approx(dz.Z[0][g2->index(mx, -my)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gram identities") {
  SUBCASE("2D orthogonality and equal diagonals") {
    auto g2 = build_free_grid(2, 8.0, 0.25);
    GroundState fake;
    fake.w = make_field(g2, [&](int, Point x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return std::exp(-0.4 * r2) + 0.3 * std::exp(-0.1 * r2);
    });
    Params p2 = desk_params();
    p2.n = 2;
    DerivativeFields dz = derivative_fields(p2, fake);
    DenseMatrix gm = gram(dz, nullptr, false);
    CHECK(std::abs(gm(0, 1)) / gm(0, 0) < 1e-3);
    CHECK(gm(0, 0) == doctest::Approx(gm(1, 1)).epsilon(1e-6));
  }

  SUBCASE("restriction to Omega_eps deviates by the tail, shrinking with eps") {
    const Base& b = base();
    DerivativeFields dz = derivative_fields(b.params, b.gs);
    DenseMatrix whole = gram(dz, nullptr, true);
    double dev[2];
    int k = 0;
    for (double eps : {0.1, 0.05}) {
      Params p = b.params;
      p.eps = eps;
      auto region = build_grid(p, 40.0, 0.05);
      DenseMatrix gm = gram(dz, region.get(), false);
      dev[k++] = std::abs(gm(0, 0) - whole(0, 0));
    }
    CHECK(dev[0] > 0.0);
    CHECK(dev[1] * 2.0 <= dev[0]);  // halving eps shrinks the deviation >= 2x
  }
}

TEST_CASE("exterior-ball tail integrals") {
  const Base& b = base();
  const Params& p = b.params;

  SUBCASE("normalized ratio is uniformly bounded") {
    std::vector<double> ratios;
    for (double delta : {2.0, 4.0, 8.0, 16.0})
      ratios.push_back(tail_integral_check(p, b.gs.w, p.p, delta).ratio);
    double lo = 1e300, hi = 0.0;
    for (double r : ratios) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 3.0);
  }

  SUBCASE("q = p+1 reproduces the J1 bound exponent") {
    TailCheck tc = tail_integral_check(p, b.gs.w, p.p + 1.0, 4.0);
    CHECK(tc.bound_exponent ==
          doctest::Approx(p.n * p.p + 2.0 * p.s * (p.p + 1.0)));
  }

  SUBCASE("doubling delta divides the integral by about 2^{n(q-1)+2sq}") {
    const double q = p.p;
    TailCheck a = tail_integral_check(p, b.gs.w, q, 4.0);
    TailCheck bb = tail_integral_check(p, b.gs.w, q, 8.0);
    const double want = std::pow(2.0, p.n * (q - 1.0) + 2.0 * p.s * q);
    CHECK(a.integral / bb.integral == doctest::Approx(want).epsilon(0.2));
  }

  SUBCASE("guards") {
    CHECK_THROWS(tail_integral_check(p, b.gs.w, 0.5, 4.0));
    CHECK_THROWS(tail_integral_check(p, b.gs.w, 2.0, 0.5));
  }
}

TEST_CASE("energy identity at the solution") {
  const Base& b = base();
  WholeEnergy we = energy_whole(b.params, b.gs);
  Field wp1 = field_pow(b.gs.w, b.params.p + 1.0);
  const double ident = (0.5 - 1.0 / (b.params.p + 1.0)) * wp1.whole_integral();
  CHECK(std::abs(we.value - ident) / std::abs(we.value) < 1e-3);
  CHECK(we.value > 0.0);
}

TEST_CASE("ground state caches by parameter key") {
  namespace fs = std::filesystem;
  Cache c;
  c.dir = fs::temp_directory_path() / "fraconc-gs-cache-test";
  c.enabled = true;
  fs::remove_all(c.dir);
  fs::create_directories(c.dir);

  auto g = build_free_grid(1, 10.0, 0.1);
  Params p = desk_params();
  GammaResult gm = fundamental_solution(p, g);
  GroundState a = solve_ground_state(p, g, gm, 1e-8, &c);
  GroundState bb = solve_ground_state(p, g, gm, 1e-8, &c);  // cache hit
  CHECK(a.w.values == bb.w.values);
  CHECK(bb.iterations == a.iterations);

  // key change invalidates: different p
  Params p2 = p;
  p2.p = 2.5;
  GroundState cc = solve_ground_state(p2, g, gm, 1e-8, &c);
  CHECK(cc.w.values != a.w.values);
  fs::remove_all(c.dir);
}
