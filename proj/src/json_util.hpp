#pragma once
// Private helpers shared by dataset_io.cpp and campaign.cpp.

#include <string>

#include <json.hpp>

#include "centrex/datagen.hpp"
#include "centrex/errors.hpp"

namespace centrex::jsonio {

using nlohmann::json;

/// Parses `text`; syntax errors become DataError with a line and column.
json parse(const std::string& text, const std::string& where);

/// Object member lookup with a named error when absent.
const json& field(const json& obj, const char* name, const std::string& where);

template <typename T>
T get(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": field '" + name + "' has the wrong type");
  }
}

/// Like get(), but falls back to `fallback` when the member is absent.
template <typename T>
T get_or(const json& obj, const char* name, T fallback, const std::string& where) {
  if (!obj.contains(name)) return fallback;
  return get<T>(obj, name, where);
}

json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j, const std::string& where);

json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const json& j, const std::string& where);

}  // namespace centrex::jsonio
