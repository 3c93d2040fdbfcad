#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "handtrack/error.hpp"
#include "handtrack/skeleton.hpp"

namespace handtrack {

namespace {

using nlohmann::json;

constexpr int kSkeletonFormatVersion = 1;

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorCode::kFormat, "skeleton config: " + what);
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) format_error(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) format_error("unknown field '" + key + "' in " + where);
  }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) format_error("missing field '" + std::string(key) + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    format_error("field '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

const std::map<std::string, DofKind>& kind_names() {
  static const std::map<std::string, DofKind> names = {
      {"translation_x", DofKind::kTranslationX}, {"translation_y", DofKind::kTranslationY},
      {"translation_z", DofKind::kTranslationZ}, {"rotation_x", DofKind::kRotationX},
      {"rotation_y", DofKind::kRotationY},       {"rotation_z", DofKind::kRotationZ},
      {"flexion", DofKind::kFlexion},            {"abduction", DofKind::kAbduction},
  };
  return names;
}

std::string kind_name(DofKind kind) {
  for (const auto& [name, k] : kind_names()) {
    if (k == kind) return name;
  }
  return "?";
}

}  // namespace

Skeleton skeleton_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    format_error(std::string("parse error: ") + e.what());
  }
  reject_unknown_keys(doc, {"format", "version", "root_joint", "joints", "dofs"}, "document");
  if (required<std::string>(doc, "format", "document") != "handtrack-skeleton") {
    format_error("format must be 'handtrack-skeleton'");
  }
  if (const int v = required<int>(doc, "version", "document"); v != kSkeletonFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "skeleton config: unsupported version " + std::to_string(v));
  }

  std::map<std::string, int> index_of;
  std::vector<JointDesc> joints;
  const json& jlist = doc.contains("joints") ? doc.at("joints") : json();
  if (!jlist.is_array()) format_error("'joints' must be an array");
  for (const auto& jj : jlist) {
    const std::string where = "joint #" + std::to_string(joints.size());
    reject_unknown_keys(jj, {"name", "parent", "offset", "bone_length"}, where);
    JointDesc jd;
    jd.name = required<std::string>(jj, "name", where);
    if (index_of.count(jd.name)) format_error("duplicate joint name '" + jd.name + "'");
    if (!jj.contains("parent")) format_error("missing field 'parent' in " + where);
    if (jj.at("parent").is_null()) {
      jd.parent = -1;
    } else {
      const auto parent = required<std::string>(jj, "parent", where);
      auto it = index_of.find(parent);
      if (it == index_of.end()) format_error(where + " references unknown or later parent '" + parent + "'");
      jd.parent = it->second;
    }
    const auto off = required<std::vector<double>>(jj, "offset", where);
    if (off.size() != 3) format_error(where + " offset must have 3 entries");
    jd.offset = Eigen::Vector3d(off[0], off[1], off[2]);
    jd.bone_length = required<double>(jj, "bone_length", where);
    index_of[jd.name] = static_cast<int>(joints.size());
    joints.push_back(std::move(jd));
  }

  std::vector<DofDesc> dofs;
  const json& dlist = doc.contains("dofs") ? doc.at("dofs") : json();
  if (!dlist.is_array()) format_error("'dofs' must be an array");
  for (const auto& dj : dlist) {
    const std::string where = "dof #" + std::to_string(dofs.size());
    reject_unknown_keys(dj, {"name", "joint", "kind", "lower", "upper"}, where);
    DofDesc dd;
    dd.name = required<std::string>(dj, "name", where);
    const auto joint_name = required<std::string>(dj, "joint", where);
    auto it = index_of.find(joint_name);
    if (it == index_of.end()) format_error(where + " references unknown joint '" + joint_name + "'");
    dd.joint = it->second;
    const auto kname = required<std::string>(dj, "kind", where);
    auto kit = kind_names().find(kname);
    if (kit == kind_names().end()) format_error(where + " has unknown kind '" + kname + "'");
    dd.kind = kit->second;
    const bool angular = dd.kind == DofKind::kFlexion || dd.kind == DofKind::kAbduction;
    if (angular) {
      dd.lower = required<double>(dj, "lower", where);
      dd.upper = required<double>(dj, "upper", where);
    } else if (dj.contains("lower") || dj.contains("upper")) {
      format_error(where + ": global DOFs take no limits");
    }
    dofs.push_back(std::move(dd));
  }

  const auto root = required<std::string>(doc, "root_joint", "document");
  auto rit = index_of.find(root);
  if (rit == index_of.end()) format_error("unknown root joint '" + root + "'");
  return Skeleton(std::move(joints), std::move(dofs), rit->second);
}

std::string skeleton_to_json_text(const Skeleton& sk) {
  json doc;
  doc["format"] = "handtrack-skeleton";
  doc["version"] = kSkeletonFormatVersion;
  doc["root_joint"] = sk.joint(sk.root_joint()).name;
  json joints = json::array();
  for (const auto& jd : sk.joints()) {
    json jj;
    jj["name"] = jd.name;
    jj["parent"] = jd.parent < 0 ? json(nullptr) : json(sk.joint(jd.parent).name);
    jj["offset"] = {jd.offset.x(), jd.offset.y(), jd.offset.z()};
    jj["bone_length"] = jd.bone_length;
    joints.push_back(std::move(jj));
  }
  doc["joints"] = std::move(joints);
  json dofs = json::array();
  for (const auto& dd : sk.dofs()) {
    json dj;
    dj["name"] = dd.name;
    dj["joint"] = sk.joint(dd.joint).name;
    dj["kind"] = kind_name(dd.kind);
    if (dd.kind == DofKind::kFlexion || dd.kind == DofKind::kAbduction) {
      dj["lower"] = dd.lower;
      dj["upper"] = dd.upper;
    }
    dofs.push_back(std::move(dj));
  }
  doc["dofs"] = std::move(dofs);
  return doc.dump(2) + "\n";
}

Skeleton load_skeleton(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open skeleton config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return skeleton_from_json_text(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace handtrack
