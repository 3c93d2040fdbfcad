#include "handtrack/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "handtrack/error.hpp"

namespace handtrack {

namespace {

using nlohmann::json;

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCode::kFormat, what); }

json parse(const std::string& text, const std::string& what) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) format_error(what + ": top level must be an object");
    return doc;
  } catch (const json::parse_error& e) {
    format_error(what + ": parse error: " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) format_error(what + ": unknown field '" + key + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& what) {
  if (!obj.contains(key)) format_error(what + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    format_error(what + ": field '" + key + "': " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Camera camera_from_json_text(const std::string& text) {
  const std::string what = "camera config";
  const json doc = parse(text, what);
  reject_unknown(doc, {"fx", "fy", "cx", "cy", "width", "height", "color_to_depth"}, what);
  Camera c;
  c.fx = get<double>(doc, "fx", what);
  c.fy = get<double>(doc, "fy", what);
  c.cx = get<double>(doc, "cx", what);
  c.cy = get<double>(doc, "cy", what);
  c.width = get<int>(doc, "width", what);
  c.height = get<int>(doc, "height", what);
  if (doc.contains("color_to_depth")) {
    const json& x = doc.at("color_to_depth");
    if (!x.is_object()) format_error(what + ": color_to_depth must be an object");
    reject_unknown(x, {"rotation", "translation"}, what + " color_to_depth");
    const auto rot = get<std::vector<double>>(x, "rotation", what);
    const auto tr = get<std::vector<double>>(x, "translation", what);
    if (rot.size() != 9 || tr.size() != 3) format_error(what + ": rotation needs 9 and translation 3 values");
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) c.color_to_depth.rotation(r, k) = rot[3 * r + k];
    for (int k = 0; k < 3; ++k) c.color_to_depth.translation[k] = tr[k];
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidInput, what + ": " + e.what());
  }
  return c;
}

std::string camera_to_json_text(const Camera& c) {
  json doc;
  doc["fx"] = c.fx;
  doc["fy"] = c.fy;
  doc["cx"] = c.cx;
  doc["cy"] = c.cy;
  doc["width"] = c.width;
  doc["height"] = c.height;
  std::vector<double> rot;
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) rot.push_back(c.color_to_depth.rotation(r, k));
  doc["color_to_depth"] = {{"rotation", rot},
                           {"translation", {c.color_to_depth.translation.x(),
                                            c.color_to_depth.translation.y(),
                                            c.color_to_depth.translation.z()}}};
  return doc.dump(2) + "\n";
}

Camera load_camera(const std::filesystem::path& path) {
  try {
    return camera_from_json_text(slurp(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

EnergyWeights weights_from_json_text(const std::string& text) {
  const std::string what = "weights config";
  const json doc = parse(text, what);
  reject_unknown(doc, {"w_p3", "w_p2", "w_l", "w_t"}, what);
  EnergyWeights w;
  if (doc.contains("w_p3")) w.pos3d = get<double>(doc, "w_p3", what);
  if (doc.contains("w_p2")) w.pos2d = get<double>(doc, "w_p2", what);
  if (doc.contains("w_l")) w.limits = get<double>(doc, "w_l", what);
  if (doc.contains("w_t")) w.temporal = get<double>(doc, "w_t", what);
  w.validate();
  return w;
}

std::string weights_to_json_text(const EnergyWeights& w) {
  json doc = {{"w_p3", w.pos3d}, {"w_p2", w.pos2d}, {"w_l", w.limits}, {"w_t", w.temporal}};
  return doc.dump(2) + "\n";
}

EnergyWeights load_weights(const std::filesystem::path& path) {
  try {
    return weights_from_json_text(slurp(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace handtrack
