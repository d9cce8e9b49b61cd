#include "fraconc/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "fraconc/common.hpp"

namespace fraconc {

json grid_to_json(const Grid& g) {
  return json{{"n", g.n}, {"L", g.L}, {"h", g.h},
              {"mask", std::vector<int>(g.mask.begin(), g.mask.end())}};
}

std::shared_ptr<const Grid> grid_from_json(const json& j) {
  auto g = std::make_shared<Grid>();
  g->n = j.at("n").get<int>();
  g->L = j.at("L").get<double>();
  g->h = j.at("h").get<double>();
  g->half = static_cast<int>(std::round(g->L / g->h));
  auto mask = j.at("mask").get<std::vector<int>>();
  require(static_cast<long>(mask.size()) == g->node_count(), "grid_from_json: bad mask size");
  g->mask.assign(mask.begin(), mask.end());
  return g;
}

json field_to_json(const Field& f, double s) {
  json rule;
  switch (f.exterior.kind) {
    case ExteriorRule::Kind::Zero:
      rule = json{{"kind", "zero"}};
      break;
    case ExteriorRule::Kind::PowerTail:
      rule = json{{"kind", "power_tail"},
                  {"amplitude", f.exterior.amplitude},
                  {"exponent", f.exterior.exponent},
                  {"center", {f.exterior.center[0], f.exterior.center[1]}}};
      break;
    case ExteriorRule::Kind::Prescribed:
      fail("field_to_json: Prescribed exterior rule is not serializable");
  }
  return json{{"n", f.grid->n}, {"s", s},        {"L", f.grid->L},
              {"h", f.grid->h}, {"exterior_rule", rule}, {"values", f.values}};
}

Field field_from_json(const json& j, std::shared_ptr<const Grid> grid) {
  if (!grid) {
    auto g = std::make_shared<Grid>();
    g->n = j.at("n").get<int>();
    g->L = j.at("L").get<double>();
    g->h = j.at("h").get<double>();
    g->half = static_cast<int>(std::round(g->L / g->h));
    g->mask.assign(static_cast<std::size_t>(g->node_count()), 1);
    grid = g;
  }
  ExteriorRule rule;
  const json& r = j.at("exterior_rule");
  const std::string kind = r.at("kind").get<std::string>();
  if (kind == "power_tail") {
    rule = ExteriorRule::power_tail(r.at("amplitude").get<double>(),
                                    r.at("exponent").get<double>());
    rule.center[0] = r.at("center")[0].get<double>();
    rule.center[1] = r.at("center")[1].get<double>();
  }
  Field f(grid, rule);
  auto vals = j.at("values").get<std::vector<double>>();
  require(vals.size() == f.values.size(), "field_from_json: bad value count");
  f.values = std::move(vals);
  return f;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "write_text_atomic: cannot open " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::add_row(std::initializer_list<double> vals) {
  rows.emplace_back(vals);
}

std::string CsvWriter::to_string() const {
  std::string out = "# fraconc-v1\n";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += columns[c];
    out += (c + 1 < columns.size()) ? ',' : '\n';
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += format_double(row[c]);
      out += (c + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
  write_text_atomic(path, to_string());
}

Cache Cache::resolve(const std::filesystem::path& configured, bool enabled) {
  Cache c;
  c.enabled = enabled;
  const char* env = std::getenv("FRACONC_CACHE");
  c.dir = (env && *env) ? std::filesystem::path(env) : configured;
  if (c.enabled && !c.dir.empty()) std::filesystem::create_directories(c.dir);
  return c;
}

std::string Cache::key_of(const json& subset) {
  const std::string canon = subset.dump();
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : canon) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

std::optional<json> Cache::load(const std::string& name, const std::string& key) const {
  if (!enabled || dir.empty()) return std::nullopt;
  const auto path = dir / (name + "-" + key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return std::nullopt;
  json j;
  try {
    in >> j;
  } catch (...) {
    return std::nullopt;
  }
  return j;
}

void Cache::store(const std::string& name, const std::string& key, const json& payload) const {
  if (!enabled || dir.empty()) return;
  write_json_atomic(dir / (name + "-" + key + ".json"), payload);
}

}  // namespace fraconc
