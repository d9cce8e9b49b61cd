#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/testlab.hpp"

using namespace fraconc;
using namespace testlab;

TEST_CASE("whole-space energy routes agree") {
  const Base& b = base();
  WholeEnergy we = energy_whole(b.params, b.gs);
  CHECK(we.route_disagreement < 1e-3);
  CHECK(we.value > 0.0);

  Field wp1 = field_pow(b.gs.w, b.params.p + 1.0);
  const double ident = (0.5 - 1.0 / (b.params.p + 1.0)) * wp1.whole_integral();
  CHECK(std::abs(we.value - ident) / we.value < 1e-3);
}

TEST_CASE("domain energy") {
  EpsMachinery m = machinery(0.1);

  SUBCASE("zero field has zero energy") {
    Field zero(m.grid, ExteriorRule::zero());
    CHECK(energy_domain(m.params, m.dop, zero) == 0.0);
  }

  SUBCASE("exterior violation is rejected") {
    Field bad = make_field(m.grid, [](int, Point) { return 1.0; });
    CHECK_THROWS(energy_domain(m.params, m.dop, bad));
  }

  SUBCASE("I_eps(u_bar) equals the equation form of the functional") {
    Field wp = field_pow(base().gs.w, 2.0);
    Field ub = solve_dirichlet(m.dop, wp, nullptr, nullptr);
    const double direct = energy_domain(m.params, m.dop, ub);
    // 1/2 int w^p ubar - 1/(p+1) int ubar^{p+1}
    std::vector<double> t1, t2;
    for (long i : m.dop.interior) {
      t1.push_back(wp[i] * ub[i]);
      t2.push_back(std::pow(ub[i], 3.0));
    }
    const double form = 0.5 * m.grid->h * pairwise_sum(t1) -
                        m.grid->h * pairwise_sum(t2) / 3.0;
    CHECK(std::abs(direct - form) / std::abs(direct) < 1e-3);
  }

  SUBCASE("I_eps(u_bar) approaches I(w) as eps shrinks") {
    EpsMachinery ms = machinery(0.05);
    Field wp = field_pow(base().gs.w, 2.0);
    Field ub = solve_dirichlet(ms.dop, wp, nullptr, nullptr);
    const double ieps = energy_domain(ms.params, ms.dop, ub);
    CHECK(std::abs(ieps - base().gs.energy) < 5e-2);
  }

  SUBCASE("quadratic form is symmetric") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> u(m.dop.interior.size()), v(m.dop.interior.size());
      for (auto& x : u) x = rng.uniform(-1.0, 1.0);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      auto au = m.dop.A.apply(u);
      auto av = m.dop.A.apply(v);
      const double uv = dot(au, v), vu = dot(av, u);
      CHECK(std::abs(uv - vu) <= 1e-10 * std::max(std::abs(uv), 1.0));
    }
  }
}

TEST_CASE("reduced-energy kernel") {
  EpsMachinery m = machinery(0.1);
  RobinCache rc;
  rc.dop = &m.dop;
  rc.gamma = &base().gamma;

  SUBCASE("two routes agree") {
    HcalResult hr = hcal(m.dop, base().gamma, rc, m.params, base().gs, {0, 0});
    CHECK(hr.route_disagreement < 1e-3);
    CHECK(hr.value > 0.0);
    CHECK(hr.dropped_mass <= 1e-4);
  }

  SUBCASE("interval symmetry") {
    const int off = 40;
    CHECK(hcal_at(m, {off, 0}) == doctest::Approx(hcal_at(m, {-off, 0})).epsilon(1e-9));
  }

  SUBCASE("enlarging the domain decreases Hcal at the center") {
    Params pwide = m.params;
    pwide.domain.radius = 1.5;
    EpsMachinery mw = make_machinery(pwide, 0.1, 40.0, 0.05, base().gamma, base().gs);
    CHECK(hcal_at(mw, {0, 0}) < hcal_at(m, {0, 0}));
  }
}

TEST_CASE("energy expansion along the sweep") {
  std::vector<EnergyReport> reps;
  for (double eps : {0.2, 0.1, 0.05}) {
    EpsMachinery m = machinery(eps);
    reps.push_back(energy_expansion(m, {0, 0}));
  }

  SUBCASE("decomposition closes exactly") {
    for (const auto& r : reps) CHECK(r.identity_error < 1e-6);
  }

  SUBCASE("normalized remainder is positive and strictly decreasing") {
    for (const auto& r : reps) CHECK(r.eps_power > 0.0);
    CHECK(reps[1].eps_power < reps[0].eps_power);
    CHECK(reps[2].eps_power < reps[1].eps_power);
  }

  SUBCASE("J1 scales like eps^{np+2s(p+1)} up to the preasymptotic correction") {
    std::vector<double> epss{0.2, 0.1, 0.05}, j1s;
    for (const auto& r : reps) j1s.push_back(r.J1);
    CHECK(loglog_slope(epss, j1s) >= 2.0 + 0.8 * 3.0 - 0.45);
    // two-point slopes approach the asymptotic rate from below
    const double s01 = std::log(j1s[0] / j1s[1]) / std::log(2.0);
    const double s12 = std::log(j1s[1] / j1s[2]) / std::log(2.0);
    CHECK(s12 > s01);
    CHECK(s12 <= 2.0 + 0.8 * 3.0 + 0.1);
  }

  SUBCASE("J21 is dominated by J22 along the sweep") {
    std::vector<double> ratio;
    for (const auto& r : reps) ratio.push_back(std::abs(r.J21) / r.J22);
    CHECK(ratio[1] < ratio[0]);
    CHECK(ratio[2] < ratio[1]);
  }

  SUBCASE("Hcal is positive and J1 nonnegative") {
    for (const auto& r : reps) {
      CHECK(r.Hcal > 0.0);
      CHECK(r.J1 >= 0.0);
    }
  }
}

TEST_CASE("interior minimum of the reduced-energy kernel") {
  EpsMachinery m = machinery(0.1);

  BoundaryGap gap = min_boundary_gap(m, 0.25);
  CHECK(gap.interior_min < gap.boundary_min);
  CHECK(std::abs(m.grid->mx_of(gap.argmin_global)) <= 1);

  SUBCASE("scaling of the ordering constants") {
    // interior_min <= c1 eps^{n+4s} with c1 from the maximal-distance point
    const double eps_pow = std::pow(0.1, 1.0 + 1.6);
    CHECK(gap.interior_min / eps_pow < 1e3);
    CHECK(gap.boundary_min / eps_pow > gap.interior_min / eps_pow);
  }

  SUBCASE("halving delta lifts the ring minimum by about 2^{n+4s}") {
    BoundaryGap half = min_boundary_gap(m, 0.125);
    const double want = std::pow(2.0, 1.0 + 1.6);
    CHECK(half.boundary_min / gap.boundary_min == doctest::Approx(want).epsilon(0.4));
  }

  SUBCASE("empty region is rejected") {
    CHECK_THROWS(min_boundary_gap(m, 1.5));
  }
}
