#pragma once

#include <filesystem>
#include <json.hpp>

#include "omicq/errors.hpp"
#include "omicq/scaling.hpp"

namespace omicq {

using Json = nlohmann::json;

Json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Fetches a required key, turning absence or a type mismatch into a ValidationError.
template <typename T>
T json_get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace omicq
