#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fraconc/convolve.hpp"
#include "fraconc/io.hpp"
#include "support/testlab.hpp"

using namespace fraconc;
using namespace testlab;

TEST_CASE("build_grid masks follow Omega/eps") {
  Params p = desk_params();
  p.eps = 0.1;
  auto g = build_grid(p, 40.0, 0.05);
  // mask true exactly on |x| < 10
  for (long i = 0; i < g->node_count(); ++i) {
    const double x = g->point(i)[0];
    CHECK(g->inside(i) == (std::abs(x) < 10.0 - 1e-12));
  }
  CHECK_FALSE(g->inside(g->index(200)));   // node at exactly +10
  CHECK(g->inside(g->index(199)));

  auto g2 = build_free_grid(1, 10.0, 0.1);
  CHECK(g2->node_count() == 201);
  CHECK(g2->origin_index() == 100);
  CHECK(g2->point(g2->origin_index())[0] == 0.0);

  Params pb = desk_params();
  pb.n = 2;
  pb.eps = 0.25;
  pb.domain.kind = DomainKind::Ball;
  auto gb = build_grid(pb, 16.0, 0.25);
  for (long i = 0; i < gb->node_count(); ++i) {
    const Point x = gb->point(i);
    CHECK(gb->inside(i) == (std::hypot(x[0], x[1]) < 4.0 - 1e-12));
  }

  // general mask override: keep only the right half of the interval
  Params pm = desk_params();
  pm.eps = 0.1;
  pm.domain.mask_override = [](int, Point x) { return x[0] > 0.2 && x[0] < 1.0; };
  auto gm = build_grid(pm, 40.0, 0.05);
  for (long i = 0; i < gm->node_count(); ++i) {
    const double x = gm->point(i)[0];
    CHECK(gm->inside(i) == (x > 2.0 && x < 10.0));
  }
}

TEST_CASE("build_grid rejects bad geometry") {
  Params p = desk_params();
  CHECK_THROWS(build_grid(p, 40.0, -0.05));
  CHECK_THROWS(build_grid(p, -40.0, 0.05));
  CHECK_THROWS(build_grid(p, 40.0, 0.07));  // does not divide evenly
}

TEST_CASE("params admissibility") {
  Params p = desk_params();
  CHECK_NOTHROW(p.validate());
  p.s = 0.6;  // violates n > 2s for n = 1
  CHECK_THROWS(p.validate());
  p = desk_params();
  p.p = 9.5;  // beyond (n+2s)/(n-2s) = 9
  CHECK_THROWS(p.validate());
  p = desk_params();
  p.eps = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("cns constant: positive sweep and classical limit") {
  for (double s : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
    CHECK(cns_constant(1, s) > 0.0);
  CHECK_THROWS(cns_constant(1, 0.0));
  CHECK_THROWS(cns_constant(1, 1.0));

  // s -> 1: the operator approaches -Laplacian on a quadratic patch
  auto g = build_free_grid(1, 10.0, 0.05);
  Field f = make_field(g, [](int, Point x) {
    const double r = std::abs(x[0]) / 5.0;
    if (r >= 1.0) return 0.0;
    return x[0] * x[0] * std::exp(1.0 - 1.0 / (1.0 - r * r));
  });
  FracOperator op = FracOperator::make(1, 0.999, 0.05, 10.0, 0);
  Field af = op.apply(f);
  CHECK(af[g->origin_index()] == doctest::Approx(-2.0).epsilon(0.02));
}

TEST_CASE("cns constant: s = 1/2 discrete operator matches the spectral oracle") {
  auto g = build_free_grid(1, 40.0, 0.05);
  auto fn = [](double x) { return std::exp(-x * x / 4.0); };  // broad Gaussian
  Field f = make_field(g, [&](int, Point x) { return fn(x[0]); });
  FracOperator op = FracOperator::make(1, 0.5, 0.05, 40.0, 0);
  Field af = op.apply(f);
  auto oracle = spectral_oracle(fn, *g, 0.5);
  double emax = 0.0, vmax = 0.0;
  for (long i = 0; i < g->node_count(); ++i) {
    if (std::abs(g->point(i)[0]) > 5.0) continue;
    vmax = std::max(vmax, std::abs(oracle[static_cast<std::size_t>(i)]));
    emax = std::max(emax, std::abs(af[i] - oracle[static_cast<std::size_t>(i)]));
  }
  CHECK(emax / vmax < 0.01);
}

TEST_CASE("frac_apply basics") {
  auto g = build_free_grid(1, 40.0, 0.05);
  FracOperator op = FracOperator::make(1, 0.4, 0.05, 40.0, 0);

  SUBCASE("zero maps to zero") {
    Field z(g, ExteriorRule::zero());
    Field az = op.apply(z);
    CHECK(az.max_abs() == 0.0);
  }

  SUBCASE("Gaussian matches the FFT multiplier oracle to 1e-3") {
    auto fn = [](double x) { return std::exp(-x * x); };
    Field f = make_field(g, [&](int, Point x) { return fn(x[0]); });
    Field af = op.apply(f);
    auto oracle = spectral_oracle(fn, *g, 0.4);
    double emax = 0.0, vmax = 0.0;
    for (long i = 0; i < g->node_count(); ++i) {
      if (std::abs(g->point(i)[0]) > 5.0) continue;
      vmax = std::max(vmax, std::abs(oracle[static_cast<std::size_t>(i)]));
      emax = std::max(emax, std::abs(af[i] - oracle[static_cast<std::size_t>(i)]));
    }
    CHECK(emax / vmax < 1e-3);
  }

  SUBCASE("even input gives even output") {
    Field f = make_field(g, [](int, Point x) { return std::exp(-0.3 * x[0] * x[0]); });
    Field af = op.apply(f);
    for (int m = 0; m <= g->half; ++m)
      CHECK(af.at_lattice(m) == af.at_lattice(-m));
  }

  SUBCASE("Prescribed exterior rule is rejected") {
    Field f(g, ExteriorRule::prescribed_fn([](int, Point) { return 1.0; }));
    CHECK_THROWS(op.apply(f));
  }
}

TEST_CASE("spectral consistency improves under refinement") {
  SplitMix64 rng(20240811);
  double err_coarse = 0.0, err_fine = 0.0;
  auto gc = build_free_grid(1, 40.0, 0.05);
  auto gf = build_free_grid(1, 40.0, 0.025);
  FracOperator oc = FracOperator::make(1, 0.4, 0.05, 40.0, 0);
  FracOperator of = FracOperator::make(1, 0.4, 0.025, 40.0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    RandomBumps rb = random_bump_field(gc, rng);
    Field fc = rb.field;
    Field ff = make_field(gf, [&](int, Point x) { return rb.fn(x[0]); });
    auto oracle_c = spectral_oracle(rb.fn, *gc, 0.4);
    auto oracle_f = spectral_oracle(rb.fn, *gf, 0.4, 4);
    Field ac = oc.apply(fc);
    Field af = of.apply(ff);
    err_coarse = std::max(err_coarse, rel_l2(ac.values, oracle_c));
    err_fine = std::max(err_fine, rel_l2(af.values, oracle_f));
  }
  CHECK(err_coarse < 1e-2);
  CHECK(err_fine < err_coarse);
}

TEST_CASE("maximum-principle structure") {
  auto g = build_free_grid(1, 20.0, 0.1);
  FracOperator op = FracOperator::make(1, 0.4, 0.1, 20.0, 0);

  // every neighbor coupling is nonnegative and the row sum stays nonnegative
  double total = 0.0;
  for (const auto& c : op.couplings) {
    CHECK(c.w >= 0.0);
    total += c.w;
  }
  CHECK(op.diagonal() - total >= 0.0);

  // off-center contribution at the global max node of a nonnegative field
  SplitMix64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    RandomBumps rb = random_bump_field(g, rng);
    Field f = rb.field;
    for (auto& v : f.values) v = std::abs(v);
    long argmax = 0;
    for (long i = 0; i < g->node_count(); ++i)
      if (f[i] > f[argmax]) argmax = i;
    Field af = op.apply(f);
    CHECK(af[argmax] >= 0.0);
  }
}

TEST_CASE("tail-correction exactness on the constant-1 field") {
  auto g = build_free_grid(1, 40.0, 0.05);
  FracOperator op = FracOperator::make(1, 0.4, 0.05, 40.0, 0);
  Field one = make_field(g, [](int, Point) { return 1.0; });
  Field a1 = op.apply(one);
  const double expect = op.tail_coefficient();
  CHECK(expect > 0.0);
  CHECK(std::abs(a1[g->origin_index()] - expect) <= 1e-10 * expect);
}

TEST_CASE("fundamental solution") {
  const Base& b = base();
  const GammaResult& gm = b.gamma;

  SUBCASE("unit mass") {
    CHECK(std::abs(gm.field.whole_integral() - 1.0) < 1e-3);
  }

  SUBCASE("radial symmetry on the grid") {
    for (int m = 0; m <= b.grid->half; ++m)
      CHECK(gm.field.at_lattice(m) == gm.field.at_lattice(-m));
  }

  SUBCASE("positivity") {
    double mn = 1e300;
    for (double v : gm.field.values) mn = std::min(mn, v);
    CHECK(mn > 0.0);
  }

  SUBCASE("profile agrees with the direct inverse-multiplier quadrature") {
    for (double r : {0.3, 1.0, 5.0, 12.0, 33.0, 50.0}) {
      const double direct = gamma_direct_1d(r, 0.4);
      CHECK(gm.profile.eval(r) == doctest::Approx(direct).epsilon(1e-6));
    }
  }

  SUBCASE("power-law tail window") {
    std::vector<double> rs, vs;
    for (double r = 5.0; r <= 50.0 + 1e-9; r += 0.05) {
      rs.push_back(r);
      vs.push_back(gm.profile.eval(r));
    }
    const double slope = decay_fit_samples(rs, vs, 5.0, 50.0);
    CHECK(slope > 1.6);
    CHECK(slope < 1.9);
  }

  SUBCASE("quadrature convergence flag") {
    CHECK(gm.quad_error < 1e-7);
    GammaOptions strict;
    strict.quad_tol = 1e-30;
    auto tiny = build_free_grid(1, 2.0, 0.5);
    Params p = desk_params();
    CHECK_THROWS(fundamental_solution(p, tiny, strict));
  }

  SUBCASE("grid samples invert the discrete operator") {
    FracOperator op = FracOperator::make(1, 0.4, 0.05, 40.0, 1);
    Field res = op.apply(gm.field);
    const double hn = 1.0 / b.grid->h;
    for (long i = 0; i < b.grid->node_count(); ++i) {
      const double want = i == gm.origin_index ? hn : 0.0;
      CHECK(std::abs(res[i] - want) < 1e-9 * hn);
    }
  }
}

TEST_CASE("convolution engine") {
  auto g = build_free_grid(1, 20.0, 0.1);

  SUBCASE("discrete delta is the identity element") {
    Field f = make_field(g, [](int, Point x) { return std::exp(-0.5 * x[0] * x[0]); });
    Field delta(g, ExteriorRule::zero());
    delta[g->origin_index()] = 1.0 / g->h;
    Field conv = convolve(f, delta);
    double emax = 0.0;
    for (long i = 0; i < g->node_count(); ++i) emax = std::max(emax, std::abs(conv[i] - f[i]));
    CHECK(emax < 1e-12);
  }

  SUBCASE("commutativity") {
    Field f = make_field(g, [](int, Point x) { return 1.0 / (1.0 + std::pow(x[0] * x[0], 1.4)); },
                         ExteriorRule::power_tail(1.0, 2.8));
    Field q = make_field(g, [](int, Point x) { return 1.0 / (1.0 + std::pow(x[0] * x[0], 0.9)); },
                         ExteriorRule::power_tail(1.0, 1.8));
    Field fg = convolve(f, q);
    Field gf = convolve(q, f);
    double emax = 0.0;
    for (long i = 0; i < g->node_count(); ++i) emax = std::max(emax, std::abs(fg[i] - gf[i]));
    CHECK(emax < 1e-12);
  }

  SUBCASE("tail exponent of the product is min(a, b)") {
    auto gw = build_free_grid(1, 60.0, 0.1);
    const double a = 2.8, bq = 1.8;
    Field f = make_field(gw, [&](int, Point x) { return std::pow(1.0 + x[0] * x[0], -a / 2.0); },
                         ExteriorRule::power_tail(1.0, a));
    Field q = make_field(gw, [&](int, Point x) { return std::pow(1.0 + x[0] * x[0], -bq / 2.0); },
                         ExteriorRule::power_tail(1.0, bq));
    Field conv = convolve(f, q);
    const double fit = decay_fit(conv, 20.0, 50.0);
    CHECK(std::abs(fit - std::min(a, bq)) <= 0.15);
  }

  SUBCASE("incompatible grids are rejected") {
    auto g2 = build_free_grid(1, 20.0, 0.05);
    Field f(g), q(g2);
    CHECK_THROWS(convolve(f, q));
  }
}

TEST_CASE("field containers serialize round-trip") {
  auto g = build_free_grid(1, 2.0, 0.5);
  Field f = make_field(g, [](int, Point x) { return x[0] * 1.7; },
                       ExteriorRule::power_tail(0.25, 1.8));
  json j = field_to_json(f, 0.4);
  Field back = field_from_json(j);
  CHECK(back.values == f.values);
  CHECK(back.exterior.amplitude == f.exterior.amplitude);
  CHECK(back.grid->L == g->L);

  json gj = grid_to_json(*g);
  auto gback = grid_from_json(gj);
  CHECK(gback->node_count() == g->node_count());
}

TEST_CASE("deterministic pairwise summation") {
  SplitMix64 rng(99);
  std::vector<double> v(10000);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  const double s1 = pairwise_sum(v);
  set_thread_count(8);
  const double s8 = pairwise_sum(v);
  set_thread_count(1);
  CHECK(s1 == s8);
}
