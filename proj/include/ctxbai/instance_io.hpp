#pragma once
// JSON instance files:
//   {"kind":"separator"|"non_separator","n":int,"k":int,
//    "A":[[k rows of n]], "mu":[k] or [[k rows of n]]}
// Optional keys: "mu_range":[lo,hi] (reward range used by the sub-Gaussian
// baseline) and "meta":{...} (free-form provenance, e.g. generator settings).

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ctxbai/model.hpp"

namespace ctxbai {

struct InstanceFile {
  Instance instance;
  std::optional<std::pair<double, double>> mu_range;
  nlohmann::json meta = nlohmann::json::object();
};

/// Parses and validates; throws UsageError naming the offending row/entry.
/// Rejects instances without a unique best arm.
InstanceFile parse_instance(const std::string& text);
InstanceFile load_instance(const std::filesystem::path& path);

nlohmann::json instance_to_json(const InstanceFile& file);
void save_instance(const std::filesystem::path& path, const InstanceFile& file);

}  // namespace ctxbai
