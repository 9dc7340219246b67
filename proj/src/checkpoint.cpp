#include "omicq/checkpoint.hpp"

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

Json scaler_to_json(const Scaler& s) {
  return Json{{"kind", to_string(s.kind)}, {"shift", s.shift}, {"scale", s.scale}};
}

Scaler scaler_from_json(const Json& j) {
  Scaler s;
  s.kind = scaling_from_string(j.at("kind").get<std::string>());
  s.shift = j.at("shift").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.shift.size() != s.scale.size()) throw ValidationError("scaler shift/scale length mismatch");
  return s;
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace omicq
