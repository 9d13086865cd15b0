#include "ctxbai/instance_io.hpp"

#include <fstream>
#include <sstream>

namespace ctxbai {

using nlohmann::json;

namespace {

std::vector<double> read_row(const json& row, const std::string& where, std::size_t expected) {
  if (!row.is_array()) throw UsageError(where + ": expected an array");
  if (row.size() != expected) {
    throw UsageError(where + ": expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(row.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!row[c].is_number()) {
      throw UsageError(where + " entry " + std::to_string(c + 1) + ": not a number");
    }
    out.push_back(row[c].get<double>());
  }
  return out;
}

std::size_t read_size(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long long>() < 1) {
    throw UsageError(std::string("field '") + key + "' must be a positive integer");
  }
  return doc[key].get<std::size_t>();
}

}  // namespace

InstanceFile parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("instance JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("instance JSON: top level must be an object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw UsageError("field 'kind' must be \"separator\" or \"non_separator\"");
  }
  const Setting kind = setting_from_string(doc["kind"].get<std::string>());
  const std::size_t n = read_size(doc, "n");
  const std::size_t k = read_size(doc, "k");

  if (!doc.contains("A") || !doc["A"].is_array() || doc["A"].size() != k) {
    throw UsageError("field 'A' must hold k = " + std::to_string(k) + " rows");
  }
  Matrix a(k, n);
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = read_row(doc["A"][j], "A row " + std::to_string(j + 1), n);
    for (std::size_t i = 0; i < n; ++i) a(j, i) = row[i];
  }

  if (!doc.contains("mu")) throw UsageError("missing field 'mu'");
  MeanSpec mu;
  if (kind == Setting::separator) {
    mu = MeanSpec::separator(read_row(doc["mu"], "mu", k));
  } else {
    if (!doc["mu"].is_array() || doc["mu"].size() != k) {
      throw UsageError("field 'mu' must hold k = " + std::to_string(k) + " rows");
    }
    Matrix m(k, n);
    for (std::size_t j = 0; j < k; ++j) {
      const auto row = read_row(doc["mu"][j], "mu row " + std::to_string(j + 1), n);
      for (std::size_t i = 0; i < n; ++i) m(j, i) = row[i];
    }
    mu = MeanSpec::non_separator(std::move(m));
  }

  InstanceFile out;
  out.instance = Instance(ContextMatrix(std::move(a)), std::move(mu));
  if (!best_arm(out.instance)) throw UsageError("instance has no unique best arm");

  if (doc.contains("mu_range")) {
    const auto r = read_row(doc["mu_range"], "mu_range", 2);
    if (!(r[0] < r[1])) throw UsageError("mu_range: lo must be below hi");
    out.mu_range = std::make_pair(r[0], r[1]);
  }
  if (doc.contains("meta")) out.meta = doc["meta"];
  return out;
}

InstanceFile load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

json instance_to_json(const InstanceFile& file) {
  const Instance& inst = file.instance;
  const std::size_t k = inst.contexts();
  const std::size_t n = inst.arms();
  json doc;
  doc["kind"] = to_string(inst.setting());
  doc["n"] = n;
  doc["k"] = k;
  json a = json::array();
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = inst.a().matrix().row(j);
    a.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["A"] = a;
  if (inst.mu().is_separator()) {
    doc["mu"] = inst.mu().per_context();
  } else {
    json mu = json::array();
    for (std::size_t j = 0; j < k; ++j) {
      const auto row = inst.mu().matrix().row(j);
      mu.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["mu"] = mu;
  }
  if (file.mu_range) doc["mu_range"] = {file.mu_range->first, file.mu_range->second};
  if (!file.meta.empty()) doc["meta"] = file.meta;
  return doc;
}

void save_instance(const std::filesystem::path& path, const InstanceFile& file) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << instance_to_json(file).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace ctxbai
