#include "vsc/pipeline/manifest.hpp"

#include <filesystem>

#include "vsc/io/config.hpp"

namespace vsc::pipe {

namespace {

namespace fs = std::filesystem;

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

std::string get_optional_path(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return j.at(key).get<std::string>();
}

}  // namespace

DatasetManifest DatasetManifest::load(const std::string& path) {
  const nlohmann::json j = io::load_json(path);
  const fs::path base = fs::path(path).parent_path();
  DatasetManifest m;
  try {
    for (const auto& js : j.at("specimens")) {
      SpecimenRecord spec;
      js.at("id").get_to(spec.id);
      for (const auto& jm : js.at("meshes")) {
        MeshRecord mesh;
        jm.at("level").get_to(mesh.level);
        mesh.path = resolve(base, jm.at("path").get<std::string>());
        spec.meshes.push_back(std::move(mesh));
      }
      for (const auto& jf : js.at("frames")) {
        FrameRecord f;
        jf.at("recording").get_to(f.recording);
        jf.at("view").get_to(f.view);
        f.color_path = resolve(base, get_optional_path(jf, "color"));
        f.depth_path = resolve(base, jf.at("depth").get<std::string>());
        f.intrinsics_path = resolve(base, jf.at("intrinsics").get<std::string>());
        f.pose_path = resolve(base, jf.at("pose").get<std::string>());
        f.spine_mask_path = resolve(base, get_optional_path(jf, "spine_mask"));
        f.labels_path = resolve(base, get_optional_path(jf, "labels"));
        spec.frames.push_back(std::move(f));
      }
      m.specimens.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, "manifest " + path + ": " + e.what());
  }
  if (m.specimens.empty())
    fail(ErrorCategory::Format, "manifest " + path + ": no specimens");
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  const fs::path base = fs::path(path).parent_path();
  auto relativize = [&](const std::string& p) -> nlohmann::json {
    if (p.empty()) return nullptr;
    return fs::path(p).lexically_proximate(base).string();
  };
  nlohmann::json j;
  j["specimens"] = nlohmann::json::array();
  for (const auto& spec : specimens) {
    nlohmann::json js;
    js["id"] = spec.id;
    js["meshes"] = nlohmann::json::array();
    for (const auto& m : spec.meshes)
      js["meshes"].push_back({{"level", m.level}, {"path", relativize(m.path)}});
    js["frames"] = nlohmann::json::array();
    for (const auto& f : spec.frames) {
      nlohmann::json jf;
      jf["recording"] = f.recording;
      jf["view"] = f.view;
      jf["color"] = relativize(f.color_path);
      jf["depth"] = relativize(f.depth_path);
      jf["intrinsics"] = relativize(f.intrinsics_path);
      jf["pose"] = relativize(f.pose_path);
      jf["spine_mask"] = relativize(f.spine_mask_path);
      jf["labels"] = relativize(f.labels_path);
      js["frames"].push_back(std::move(jf));
    }
    j["specimens"].push_back(std::move(js));
  }
  io::save_json(path, j);
}

std::vector<std::string> DatasetManifest::specimen_ids() const {
  std::vector<std::string> ids;
  ids.reserve(specimens.size());
  for (const auto& s : specimens) ids.push_back(s.id);
  return ids;
}

const SpecimenRecord& DatasetManifest::specimen(const std::string& id) const {
  for (const auto& s : specimens)
    if (s.id == id) return s;
  fail(ErrorCategory::NotFound, "manifest: unknown specimen " + id);
}

}  // namespace vsc::pipe
