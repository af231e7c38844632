#pragma once

// Scene files (metric pairs as expression strings) and Levi-Civita parameter files.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geq/equiv.hpp"
#include "geq/fields.hpp"

namespace geq::cli {

using Json = nlohmann::json;

struct Scene {
  Chart chart;
  std::vector<std::vector<std::string>> g_text, gbar_text;  // upper triangle, "0" below
  MetricField g, gbar;
  std::optional<VectorField> vector_field;
};

/// Validation failures throw Error naming the JSON path, e.g. "/g/0/1".
Scene parse_scene(const Json& j);
Scene load_scene(const std::string& path);
Json scene_to_json(const Chart& chart, const std::vector<std::vector<std::string>>& g,
                   const std::vector<std::vector<std::string>>& gbar);

equiv::LeviCivitaParams parse_lc_params(const Json& j);
equiv::LeviCivitaParams load_lc_params(const std::string& path);

Json read_json_file(const std::string& path);

}  // namespace geq::cli
