// fraconc: numerical experiments around concentration for the fractional
// Schrodinger equation with exterior Dirichlet datum.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fraconc/config.hpp"
#include "fraconc/reduction.hpp"

using namespace fraconc;

namespace {

struct Lab {
  ExperimentConfig cfg;
  Cache cache;
  std::shared_ptr<const Grid> grid;
  GammaResult gamma;
  GroundState gs;

  explicit Lab(const ExperimentConfig& c)
      : cfg(c), cache(c.cache()) {
    grid = build_free_grid(cfg.params.n, cfg.L, cfg.h);
    gamma = fundamental_solution(cfg.params, grid, {}, &cache);
    gs = solve_ground_state(cfg.params, grid, gamma, cfg.tol.petviashvili, &cache);
  }

  std::filesystem::path out(const std::string& name) const {
    return cfg.output_dir / name;
  }
};

bool all_flags(const json& flags) {
  for (const auto& [k, v] : flags.items()) {
    (void)k;
    if (v.is_boolean() && !v.get<bool>()) return false;
  }
  return true;
}

int finish(const Lab& lab, const std::string& name, json report) {
  report["pass"] = all_flags(report["pass_flags"]);
  write_json_atomic(lab.out(name + ".json"), report);
  std::cout << name << ": " << (report["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
  for (const auto& [k, v] : report["pass_flags"].items())
    std::cout << "  " << k << ": "
              << (v.is_boolean() ? (v.get<bool>() ? "ok" : "FAIL") : v.dump()) << "\n";
  return report["pass"].get<bool>() ? 0 : 1;
}

int run_gamma(Lab& lab) {
  const GammaResult& gm = lab.gamma;
  CsvWriter csv;
  csv.columns = {"r", "gamma"};
  for (std::size_t i = 0; i < gm.profile.r.size(); ++i)
    csv.add_row({gm.profile.r[i], gm.profile.v[i]});
  csv.write(lab.out("gamma_profile.csv"));

  const double integral = gm.field.whole_integral();
  std::vector<double> rs, vs;
  for (double r = 5.0; r <= 50.0 + 1e-9; r += lab.cfg.h) {
    rs.push_back(r);
    vs.push_back(gm.profile.eval(r));
  }
  const double slope = decay_fit_samples(rs, vs, 5.0, 50.0);
  const double target = lab.cfg.params.n + 2.0 * lab.cfg.params.s;
  double min_val = 1e300;
  for (double v : gm.field.values) min_val = std::min(min_val, v);
  bool symmetric = true;
  for (int m = 0; m <= lab.grid->half; ++m)
    symmetric = symmetric && gm.field.at_lattice(m) == gm.field.at_lattice(-m);

  json rep;
  rep["integral"] = integral;
  rep["slope_5_50"] = slope;
  rep["slope_8_50_diagnostic"] = [&] {
    std::vector<double> r2, v2;
    for (double r = 8.0; r <= 50.0 + 1e-9; r += lab.cfg.h) {
      r2.push_back(r);
      v2.push_back(gm.profile.eval(r));
    }
    return decay_fit_samples(r2, v2, 8.0, 50.0);
  }();
  rep["tail_amplitude"] = gm.tail_amplitude;
  rep["quad_error"] = gm.quad_error;
  rep["notes"] = "the [5,50] slope window sits in the kernel's preasymptotic range; "
                 "the [8,50] diagnostic tracks the same decay clear of it";
  rep["pass_flags"] = {{"integral_within_1e3", std::abs(integral - 1.0) < 1e-3},
                       {"slope_within_band", std::abs(slope - target) <= 0.1},
                       {"positive", min_val > 0.0},
                       {"radially_symmetric", symmetric}};
  return finish(lab, "gamma", rep);
}

int run_ground(Lab& lab) {
  const GroundState& gs = lab.gs;
  CsvWriter csv;
  csv.columns = {"r", "w"};
  for (std::size_t i = 0; i < gs.profile_r.size(); ++i)
    csv.add_row({gs.profile_r[i], gs.profile_v[i]});
  csv.write(lab.out("ground_profile.csv"));

  WholeEnergy we = energy_whole(lab.cfg.params, gs);
  Field wp1 = field_pow(gs.w, lab.cfg.params.p + 1.0);
  const double ident = (0.5 - 1.0 / (lab.cfg.params.p + 1.0)) * wp1.whole_integral();
  const double ident_err = std::abs(we.value - ident) / std::abs(we.value);

  write_json_atomic(lab.out("ground_state.json"),
                    json{{"field", field_to_json(gs.w, lab.cfg.params.s)},
                         {"sidecar",
                          {{"p", lab.cfg.params.p},
                           {"s", lab.cfg.params.s},
                           {"n", lab.cfg.params.n},
                           {"residual", gs.residual},
                           {"decay_exponent", gs.decay_exponent},
                           {"alpha", gs.alpha},
                           {"energy", gs.energy}}}});

  json rep;
  rep["residual"] = gs.residual;
  rep["decay_exponent"] = gs.decay_exponent;
  rep["conv_identity"] = gs.conv_identity;
  rep["alpha"] = gs.alpha;
  rep["energy"] = we.value;
  rep["energy_spectral"] = we.value_spectral;
  rep["iterations"] = gs.iterations;
  const double decay_target = lab.cfg.params.n + 2.0 * lab.cfg.params.s;
  rep["pass_flags"] = {{"residual_below_1e6", gs.residual < 1e-6},
                       {"decay_in_band", std::abs(gs.decay_exponent - decay_target) <= 0.15},
                       {"conv_identity_below_1e4", gs.conv_identity < 1e-4},
                       {"energy_identity_below_1e3", ident_err < 1e-3},
                       {"energy_routes_below_1e3", we.route_disagreement < 1e-3}};
  return finish(lab, "ground", rep);
}

// Scaling studies need room: dist up to max(d_list) with the opposite
// boundary much further, so they run at sweeps.study_eps on a wider box.
Lab make_study_lab(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.params.eps = cfg.sweeps.study_eps;
  cfg.L = 2.0 * cfg.params.domain.radius / cfg.params.eps;
  return Lab(cfg);
}

int run_robin(Lab& lab) {
  Lab study = make_study_lab(lab.cfg);
  EpsMachinery m = make_machinery(study.cfg.params, study.cfg.params.eps, study.cfg.L,
                                  study.cfg.h, study.gamma, study.gs);
  const Grid& g = *m.grid;
  CsvWriter csv;
  csv.columns = {"d", "H_near_diag", "residual"};
  std::vector<double> ds, hv;
  json manifest = json::array();
  const double edge = study.cfg.params.domain.radius / study.cfg.params.eps;
  for (double d : lab.cfg.sweeps.d_list) {
    const int ym = static_cast<int>(std::lround((edge - d) / g.h));
    RobinData rd = robin(m.dop, study.gamma, g.index(ym));
    const double val = rd.H[g.index(ym + 1)];
    ds.push_back(d);
    hv.push_back(val);
    csv.add_row({d, val, rd.residual});
    manifest.push_back(json{{"y", g.point(rd.y_global)[0]}, {"d", rd.d},
                            {"residual", rd.residual}});
  }
  csv.write(lab.out("robin_sweep.csv"));
  write_json_atomic(lab.out("robin_columns.json"), manifest);
  const double slope = loglog_slope(ds, hv);
  const double target = -(lab.cfg.params.n + 4.0 * lab.cfg.params.s);

  json rep;
  rep["slope"] = slope;
  rep["target"] = target;
  rep["d_list"] = ds;
  rep["H_values"] = hv;
  rep["pass_flags"] = {{"slope_within_band", std::abs(slope - target) <= 0.25}};
  return finish(lab, "robin", rep);
}

int run_barrier(Lab& lab) {
  Lab study = make_study_lab(lab.cfg);
  EpsMachinery m = make_machinery(study.cfg.params, study.cfg.params.eps, study.cfg.L,
                                  study.cfg.h, study.gamma, study.gs);
  const Grid& g = *m.grid;
  const long xi = g.origin_index();
  Field beta = barrier_beta(m.dop, study.gamma, xi);
  RobinData rd = robin(m.dop, study.gamma, xi);
  double lo = 1e300, hi = 0.0, beta_min = 1e300;
  CsvWriter csv;
  csv.columns = {"x", "beta", "H", "ratio"};
  for (long i : m.dop.interior) {
    const double ratio = beta[i] / rd.H[i];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    beta_min = std::min(beta_min, beta[i]);
    csv.add_row({g.point(i)[0], beta[i], rd.H[i], ratio});
  }
  csv.write(lab.out("barrier_band.csv"));

  Field abeta = m.dop.op.apply(beta);
  double worst = 0.0;
  for (long i : m.dop.interior) worst = std::max(worst, std::abs(abeta[i]));
  const double rel_res = worst / beta.max_abs();

  json rep;
  rep["band_low"] = lo;
  rep["band_high"] = hi;
  rep["band_ratio"] = hi / lo;
  rep["residual"] = rel_res;
  rep["pass_flags"] = {{"band_ratio_below_50", hi / lo < 50.0},
                       {"band_positive", lo > 0.0},
                       {"beta_positive", beta_min > 0.0},
                       {"residual_below_1e2", rel_res < 1e-2}};
  return finish(lab, "barrier", rep);
}

double reference_eps(const ExperimentConfig& cfg) {
  const auto& l = cfg.sweeps.eps_list;
  return l.size() >= 2 ? l[1] : l.front();
}

int run_hcal(Lab& lab) {
  Lab study = make_study_lab(lab.cfg);
  EpsMachinery m = make_machinery(study.cfg.params, study.cfg.params.eps, study.cfg.L,
                                  study.cfg.h, study.gamma, study.gs);
  const Grid& g = *m.grid;
  const double edge = study.cfg.params.domain.radius / study.cfg.params.eps;
  CsvWriter csv;
  csv.columns = {"d", "Hcal"};
  std::vector<double> ds, hv;
  for (double d : lab.cfg.sweeps.d_list) {
    const int xm = static_cast<int>(std::lround((edge - d) / g.h));
    const double v = hcal_at(m, {xm, 0});
    ds.push_back(d);
    hv.push_back(v);
    csv.add_row({d, v});
  }
  csv.write(lab.out("hcal_sweep.csv"));
  const double slope = loglog_slope(ds, hv);
  const double target = -(lab.cfg.params.n + 4.0 * lab.cfg.params.s);

  // two-route agreement and symmetry at the pipeline eps
  EpsMachinery mp = make_machinery(lab.cfg.params, reference_eps(lab.cfg), lab.cfg.L,
                                   lab.cfg.h, lab.gamma, lab.gs);
  HcalResult hr = hcal(mp.dop, lab.gamma, mp.robin_cache(), mp.params, lab.gs, {0, 0});
  const int off = static_cast<int>(std::lround(2.0 / lab.cfg.h));
  const double h_plus = hcal_at(mp, {off, 0});
  const double h_minus = hcal_at(mp, {-off, 0});
  BoundaryGap gap = min_boundary_gap(mp, lab.cfg.sweeps.delta);

  json rep;
  rep["slope"] = slope;
  rep["two_route_disagreement"] = hr.route_disagreement;
  rep["symmetry_gap"] = std::abs(h_plus - h_minus) / h_plus;
  rep["interior_min"] = gap.interior_min;
  rep["boundary_min"] = gap.boundary_min;
  rep["pass_flags"] = {
      {"slope_within_band", std::abs(slope - target) <= 0.2},
      {"two_routes_below_1e3", hr.route_disagreement < 1e-3},
      {"interval_symmetry", std::abs(h_plus - h_minus) / h_plus < 1e-8},
      {"interior_min_below_boundary_min", gap.interior_min < gap.boundary_min}};
  return finish(lab, "hcal", rep);
}

int run_expand(Lab& lab) {
  CsvWriter csv;
  csv.columns = {"eps", "d",  "Hcal", "I_eps", "residual", "eps_power",
                 "J1",  "J21", "J22",  "J3"};
  std::vector<double> epss, powers, j1s, j21r;
  for (double eps : lab.cfg.sweeps.eps_list) {
    EpsMachinery m = make_machinery(lab.cfg.params, eps, lab.cfg.L, lab.cfg.h, lab.gamma,
                                    lab.gs);
    EnergyReport r = energy_expansion(m, {0, 0});
    csv.add_row({r.eps, r.d, r.Hcal, r.I_eps, r.residual, r.eps_power, r.J1, r.J21, r.J22,
                 r.J3});
    epss.push_back(eps);
    powers.push_back(r.eps_power);
    j1s.push_back(r.J1);
    j21r.push_back(std::abs(r.J21) / r.J22);
  }
  csv.write(lab.out("expand_sweep.csv"));

  bool decreasing = true, j21_vanishing = true;
  for (std::size_t i = 1; i < powers.size(); ++i) {
    decreasing = decreasing && powers[i] < powers[i - 1];
    j21_vanishing = j21_vanishing && j21r[i] < j21r[i - 1];
  }
  const double j1_slope = loglog_slope(epss, j1s);
  const double j1_target = lab.cfg.params.n * lab.cfg.params.p +
                           2.0 * lab.cfg.params.s * (lab.cfg.params.p + 1.0);

  json rep;
  rep["eps_power"] = powers;
  rep["J1_slope"] = j1_slope;
  rep["J21_over_J22"] = j21r;
  rep["pass_flags"] = {{"eps_power_strictly_decreasing", decreasing},
                       {"J1_slope_at_least", j1_slope >= j1_target - 0.45},
                       {"J21_dominated_by_J22", j21_vanishing}};
  return finish(lab, "expand", rep);
}

int run_reduce(Lab& lab) {
  json per_eps = json::array();
  std::vector<double> epss, psis, jdiffs;
  bool contraction_ok = true, xi_ok = true;
  double c_min = 0.0, c_off = 0.0;
  for (double eps : lab.cfg.sweeps.eps_list) {
    EpsMachinery m = make_machinery(lab.cfg.params, eps, lab.cfg.L, lab.cfg.h, lab.gamma,
                                    lab.gs);
    MinimizeResult mr = minimize_reduced(m, lab.cfg.sweeps.delta, 8, lab.cfg.tol.fixed_point);
    ReductionContext ctx = make_reduction_context(m, mr.xi_cells);
    ReductionState st = nonlinear_projected_solve(ctx, lab.cfg.tol.fixed_point);
    reduced_functional(m, ctx, st);
    epss.push_back(eps);
    psis.push_back(st.star_norm_psi);
    jdiffs.push_back(std::abs(st.J - st.I_eps_ubar) /
                     std::pow(eps, lab.cfg.params.n + 4.0 * lab.cfg.params.s));
    contraction_ok = contraction_ok && st.contraction_factor < 1.0;
    xi_ok = xi_ok && std::abs(mr.xi_cells[0]) <= 1;
    if (eps == reference_eps(lab.cfg)) {
      c_min = std::abs(mr.c_at_min[0]);
      // off-critical scale: boundary-adjacent test point of Omega_{eps,delta}
      const double limit = lab.cfg.sweeps.delta / eps;
      int edge = static_cast<int>((lab.cfg.params.domain.radius / eps - limit) / lab.cfg.h) - 2;
      while (edge > 0 && !m.grid->inside(m.grid->index(edge))) --edge;
      ReductionContext ctx_b = make_reduction_context(m, {edge, 0});
      ReductionState st_b = nonlinear_projected_solve(ctx_b, lab.cfg.tol.fixed_point);
      c_off = std::abs(st_b.c[0]);
    }
    per_eps.push_back(json{{"eps", eps},
                           {"xi_cells", mr.xi_cells[0]},
                           {"J_min", mr.J_min},
                           {"star_norm_psi", st.star_norm_psi},
                           {"contraction", st.contraction_factor},
                           {"c", st.c}});
  }
  const double psi_slope = loglog_slope(epss, psis);
  bool jdiff_decreasing = true;
  for (std::size_t i = 1; i < jdiffs.size(); ++i)
    jdiff_decreasing = jdiff_decreasing && jdiffs[i] < jdiffs[i - 1];

  json rep;
  rep["per_eps"] = per_eps;
  rep["psi_slope"] = psi_slope;
  rep["c_at_min"] = c_min;
  rep["c_off_critical"] = c_off;
  rep["pass_flags"] = {
      {"xi_within_one_cell_of_0", xi_ok},
      {"contraction_below_1", contraction_ok},
      {"psi_slope_at_least_1_5", psi_slope >= lab.cfg.params.n + 2.0 * lab.cfg.params.s - 0.3},
      {"c_collapses_at_min", c_min <= 1e-4 * c_off},
      {"Jdiff_power_decreasing", jdiff_decreasing}};
  return finish(lab, "reduce", rep);
}

int run_solve(Lab& lab) {
  json per_eps = json::array();
  std::vector<double> epss, errs;
  bool newton_ok = true, positive_ok = true;
  double min_dist = 1e300;
  for (double eps : lab.cfg.sweeps.eps_list) {
    EpsMachinery m = make_machinery(lab.cfg.params, eps, lab.cfg.L, lab.cfg.h, lab.gamma,
                                    lab.gs);
    MinimizeResult mr = minimize_reduced(m, lab.cfg.sweeps.delta, 8, lab.cfg.tol.fixed_point);
    FinalReport fr = assemble_and_verify(m, mr, lab.cfg.tol.newton);
    epss.push_back(eps);
    errs.push_back(fr.error_vs_ground_state);
    if (eps == reference_eps(lab.cfg)) newton_ok = fr.newton_correction < 1e-3;
    positive_ok = positive_ok && fr.positive;
    min_dist = std::min(min_dist, fr.dist_to_boundary);

    // profiles of U_eps(x) = u_eps(x / eps) and the scaled ground state
    CsvWriter prof;
    prof.columns = {"x", "U_eps", "w_scaled"};
    const Grid& g = *m.grid;
    ReductionContext ctx = make_reduction_context(m, mr.xi_cells);
    ReductionState st = nonlinear_projected_solve(ctx, lab.cfg.tol.fixed_point);
    for (long i : m.dop.interior) {
      const double xe = g.point(i)[0];
      prof.add_row({eps * xe, ctx.u_bar[i] + st.Psi[i], ctx.w_xi[i]});
    }
    char name[64];
    std::snprintf(name, sizeof(name), "solution_eps_%g.csv", eps);
    prof.write(lab.out(name));

    per_eps.push_back(json{{"eps", fr.eps},
                           {"xi_bar", fr.xi_bar},
                           {"dist_to_boundary", fr.dist_to_boundary},
                           {"c_vector", fr.c_vector},
                           {"star_norm_Psi", fr.star_norm_psi},
                           {"newton_correction", fr.newton_correction},
                           {"error_vs_ground_state", fr.error_vs_ground_state}});
  }
  const double err_slope = loglog_slope(epss, errs);

  json rep;
  rep["per_eps"] = per_eps;
  rep["slopes"] = {{"error_vs_ground_state", err_slope}};
  rep["pass_flags"] = {
      {"error_slope_at_least_1_5",
       err_slope >= lab.cfg.params.n + 2.0 * lab.cfg.params.s - 0.3},
      {"newton_correction_below_1e3", newton_ok},
      {"positive", positive_ok},
      {"distance_bounded_away", min_dist >= 0.5 * lab.cfg.params.domain.radius}};
  return finish(lab, "solve", rep);
}

int run_report(const ExperimentConfig& cfg) {
  int bad = 0;
  json summary;
  for (const char* name : {"gamma", "ground", "robin", "barrier", "hcal", "expand",
                           "reduce", "solve"}) {
    const auto path = cfg.output_dir / (std::string(name) + ".json");
    std::ifstream in(path);
    if (!in.good()) continue;
    json j;
    in >> j;
    summary[name] = j["pass_flags"];
    std::cout << name << ": " << (j["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
    if (!j["pass"].get<bool>()) ++bad;
  }
  // recompute the monotonicity flag from the stored sweep CSV
  {
    std::ifstream in(cfg.output_dir / "expand_sweep.csv");
    if (in.good()) {
      std::string line;
      std::getline(in, line);  // schema comment
      std::getline(in, line);  // header
      std::vector<double> powers;
      while (std::getline(in, line)) {
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
          auto comma = line.find(',', pos);
          row.push_back(std::strtod(line.c_str() + pos, nullptr));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        if (row.size() >= 6) powers.push_back(row[5]);
      }
      bool mono = powers.size() >= 2;
      for (std::size_t i = 1; i < powers.size(); ++i) mono = mono && powers[i] < powers[i - 1];
      summary["expand_recheck"] = {{"eps_power_strictly_decreasing", mono}};
      if (!mono) ++bad;
      std::cout << "expand_recheck: " << (mono ? "pass" : "FAIL") << "\n";
    }
  }
  write_json_atomic(cfg.output_dir / "report.json", summary);
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraconc - concentration phenomena laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 1;
  bool no_cache = false;
  std::string out_dir;
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--override", overrides, "dotted-path overrides key=value");
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("--no-cache", no_cache, "disable the ground-state cache");
  app.add_option("--out", out_dir, "output directory");

  for (const char* name : {"gamma", "ground", "robin", "barrier", "hcal", "expand",
                           "reduce", "solve", "report"})
    app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in.good()) throw std::invalid_argument("cannot open config: " + config_path);
      json j;
      in >> j;
      cfg = ExperimentConfig::from_json(j);
    } else {
      cfg = ExperimentConfig::defaults();
    }
    for (const auto& kv : overrides) cfg.apply_override(kv);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (no_cache) cfg.use_cache = false;
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
  } catch (const std::exception& e) {
    json err = {{"error", "config"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "report") return run_report(cfg);
    Lab lab(cfg);
    if (sub == "gamma") return run_gamma(lab);
    if (sub == "ground") return run_ground(lab);
    if (sub == "robin") return run_robin(lab);
    if (sub == "barrier") return run_barrier(lab);
    if (sub == "hcal") return run_hcal(lab);
    if (sub == "expand") return run_expand(lab);
    if (sub == "reduce") return run_reduce(lab);
    if (sub == "solve") return run_solve(lab);
  } catch (const std::exception& e) {
    json err = {{"error", "runtime"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 2;
}
