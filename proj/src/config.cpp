#include "fraconc/config.hpp"

#include <algorithm>

namespace fraconc {

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.params.n = 1;
  c.params.s = 0.4;
  c.params.p = 2.0;
  c.params.eps = 0.1;
  c.params.domain.kind = DomainKind::Interval;
  c.params.domain.radius = 1.0;
  return c;
}

json ExperimentConfig::to_json() const {
  return json{
      {"params",
       {{"n", params.n},
        {"s", params.s},
        {"p", params.p},
        {"eps", params.eps},
        {"domain",
         {{"type", params.domain.kind == DomainKind::Interval ? "interval" : "ball"},
          {"radius", params.domain.radius}}}}},
      {"grid", {{"L", L}, {"h", h}}},
      {"sweeps",
       {{"eps_list", sweeps.eps_list},
        {"d_list", sweeps.d_list},
        {"delta", sweeps.delta},
        {"study_eps", sweeps.study_eps}}},
      {"tolerances",
       {{"petviashvili", tol.petviashvili},
        {"linear", tol.linear},
        {"fixed_point", tol.fixed_point},
        {"newton", tol.newton}}},
      {"output_dir", output_dir.string()},
      {"cache_dir", cache_dir.string()}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c = defaults();
  if (j.contains("params")) {
    const json& p = j["params"];
    if (p.contains("n")) c.params.n = p["n"].get<int>();
    if (p.contains("s")) c.params.s = p["s"].get<double>();
    if (p.contains("p")) c.params.p = p["p"].get<double>();
    if (p.contains("eps")) c.params.eps = p["eps"].get<double>();
    if (p.contains("domain")) {
      const json& d = p["domain"];
      if (d.contains("type")) {
        const std::string t = d["type"].get<std::string>();
        require(t == "interval" || t == "ball", "config: domain.type must be interval or ball");
        c.params.domain.kind = t == "interval" ? DomainKind::Interval : DomainKind::Ball;
      }
      if (d.contains("radius")) c.params.domain.radius = d["radius"].get<double>();
      if (d.contains("half_width")) c.params.domain.radius = d["half_width"].get<double>();
    }
  }
  if (j.contains("grid")) {
    if (j["grid"].contains("L")) c.L = j["grid"]["L"].get<double>();
    if (j["grid"].contains("h")) c.h = j["grid"]["h"].get<double>();
  }
  if (j.contains("sweeps")) {
    const json& s = j["sweeps"];
    if (s.contains("eps_list")) c.sweeps.eps_list = s["eps_list"].get<std::vector<double>>();
    if (s.contains("d_list")) c.sweeps.d_list = s["d_list"].get<std::vector<double>>();
    if (s.contains("delta")) c.sweeps.delta = s["delta"].get<double>();
    if (s.contains("study_eps")) c.sweeps.study_eps = s["study_eps"].get<double>();
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (t.contains("petviashvili")) c.tol.petviashvili = t["petviashvili"].get<double>();
    if (t.contains("linear")) c.tol.linear = t["linear"].get<double>();
    if (t.contains("fixed_point")) c.tol.fixed_point = t["fixed_point"].get<double>();
    if (t.contains("newton")) c.tol.newton = t["newton"].get<double>();
  }
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("cache_dir")) c.cache_dir = j["cache_dir"].get<std::string>();
  return c;
}

void ExperimentConfig::apply_override(const std::string& kv) {
  const auto eq = kv.find('=');
  require(eq != std::string::npos, "override must be key=value: " + kv);
  const std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);

  json root = to_json();
  json* node = &root;
  std::size_t pos = 0;
  for (;;) {
    const auto dotpos = path.find('.', pos);
    const std::string part = path.substr(pos, dotpos == std::string::npos ? std::string::npos
                                                                           : dotpos - pos);
    require(!part.empty(), "override: empty path segment in " + kv);
    if (dotpos == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
      break;
    }
    node = &(*node)[part];
    pos = dotpos + 1;
  }
  *this = from_json(root);
}

void ExperimentConfig::validate() const {
  params.validate();
  require(L > 0 && h > 0, "config: grid L, h must be positive");
  require(tol.petviashvili > 0 && tol.linear > 0 && tol.fixed_point > 0 && tol.newton > 0,
          "config: tolerances must be positive");
  require(!sweeps.eps_list.empty(), "config: eps_list must not be empty");
  for (std::size_t i = 1; i < sweeps.eps_list.size(); ++i)
    require(sweeps.eps_list[i] < sweeps.eps_list[i - 1],
            "config: eps_list must be strictly decreasing");
  require(sweeps.delta > 0, "config: delta must be positive");
}

}  // namespace fraconc
