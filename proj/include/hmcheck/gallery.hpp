#pragma once

// Named built-in charts and maps, each with a machine-readable block of
// expectations, plus the JSON schema shared with user input files.
//
// Metric file: {"name", "dimension", "coordinates": [...], "metric": [[...]]
// (upper triangle rows or the full symmetric matrix), "box": [[lo, hi], ...],
// optional "constraint": expr > 0}.
// Map file: {"name", "domain": "builtin:<name>" | metric object, "codomain":
// same, "components": [...], optional "leaf_coordinate": index}.

#include <string>
#include <vector>

#include <json.hpp>

#include "hmcheck/morphism.hpp"

namespace hmc {

enum class EntryKind { kMetric, kMap };

struct GalleryEntry {
  std::string name;  // canonical, e.g. "example32(3)"
  EntryKind kind = EntryKind::kMetric;
  std::string description;
  std::optional<MetricChart> metric;
  std::optional<SubmersionSpec> map;
  nlohmann::json expected;
};

class GalleryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `text` is "name" or "name(p1, p2, ...)" with integer parameters.
GalleryEntry builtin(const std::string& text);
GalleryEntry builtin(const std::string& name, const std::vector<int>& params);

/// Canonical instances exercised by `gallery run`.
std::vector<std::string> catalog();

nlohmann::json to_json(const MetricChart& chart);
nlohmann::json to_json(const SubmersionSpec& spec);
MetricChart metric_from_json(const nlohmann::json& j);
/// Charts given as "builtin:<name>" strings resolve through builtin().
SubmersionSpec map_from_json(const nlohmann::json& j);

}  // namespace hmc
