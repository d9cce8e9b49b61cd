#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraconc/field.hpp"

namespace fraconc {

using json = nlohmann::json;

// Self-describing container {n, s, L, h, exterior_rule, values}.
json field_to_json(const Field& f, double s);
Field field_from_json(const json& j, std::shared_ptr<const Grid> grid = nullptr);

json grid_to_json(const Grid& g);
std::shared_ptr<const Grid> grid_from_json(const json& j);

// Atomic writes: temp file + rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const json& j);

// CSV with the schema header line "# fraconc-v1"; full double precision,
// locale-independent.
struct CsvWriter {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void add_row(std::initializer_list<double> vals);
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;
};

std::string format_double(double v);

// Content-keyed JSON cache. Key = FNV-1a hash of a canonical JSON subset, so
// any change to the keyed quantities invalidates the entry.
struct Cache {
  std::filesystem::path dir;
  bool enabled = true;

  static Cache resolve(const std::filesystem::path& configured, bool enabled);
  static std::string key_of(const json& subset);
  std::optional<json> load(const std::string& name, const std::string& key) const;
  void store(const std::string& name, const std::string& key, const json& payload) const;
};

}  // namespace fraconc
