#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fraconc/io.hpp"
#include "fraconc/params.hpp"

namespace fraconc {

struct Tolerances {
  double petviashvili = 1e-10;
  double linear = 1e-10;
  double fixed_point = 1e-11;
  double newton = 1e-12;
};

struct Sweeps {
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::vector<double> d_list{5.0, 8.0, 12.0, 18.0};
  double delta = 0.25;
  // Scaling studies need dist(xi, dOmega_eps) up to max(d_list) with the far
  // boundary much further away, hence their own small eps.
  double study_eps = 0.025;
};

struct ExperimentConfig {
  Params params;
  double L = 40.0;
  double h = 0.05;
  Sweeps sweeps;
  Tolerances tol;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir = ".fraconc-cache";
  bool use_cache = true;
  int threads = 1;

  static ExperimentConfig defaults();
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  void apply_override(const std::string& key_eq_value);
  void validate() const;

  Cache cache() const { return Cache::resolve(cache_dir, use_cache); }
};

}  // namespace fraconc
