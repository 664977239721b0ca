#include "vsc/io/config.hpp"

#include "vsc/io/fsio.hpp"

namespace vsc::io {

nlohmann::json load_json(const std::string& path) {
  const auto buf = read_file(path);
  try {
    return nlohmann::json::parse(buf.begin(), buf.end());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, "json parse error in " + path + ": " + e.what());
  }
}

void save_json(const std::string& path, const nlohmann::json& j) {
  atomic_write_file(path, j.dump(2) + "\n");
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    fail(ErrorCategory::Config, "override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  nlohmann::json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) fail(ErrorCategory::Config, "bad override key: " + path);
    if (!cur->is_object() || !cur->contains(key))
      fail(ErrorCategory::Config, "unknown config key: " + path);
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // plain string
  *cur = std::move(value);
}

geom::CameraIntrinsics intrinsics_from_json(const nlohmann::json& j) {
  geom::CameraIntrinsics intr;
  try {
    j.at("fx").get_to(intr.fx);
    j.at("fy").get_to(intr.fy);
    j.at("cx").get_to(intr.cx);
    j.at("cy").get_to(intr.cy);
    j.at("width").get_to(intr.width);
    j.at("height").get_to(intr.height);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, std::string("intrinsics json: ") + e.what());
  }
  intr.validate();
  return intr;
}

nlohmann::json intrinsics_to_json(const geom::CameraIntrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy},         {"cx", intr.cx},
          {"cy", intr.cy}, {"width", intr.width},   {"height", intr.height}};
}

geom::RigidTransform pose_from_json(const nlohmann::json& j) {
  std::vector<double> m;
  try {
    j.at("matrix").get_to(m);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, std::string("pose json: ") + e.what());
  }
  if (m.size() != 16)
    fail(ErrorCategory::Format, "pose json: matrix must have 16 row-major values");
  if (m[12] != 0 || m[13] != 0 || m[14] != 0 || m[15] != 1)
    fail(ErrorCategory::Format, "pose json: last row must be 0 0 0 1");
  geom::RigidTransform t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation.at(r, c) = m[4 * r + c];
  t.translation = {m[3], m[7], m[11]};
  t.validate();
  return t;
}

nlohmann::json pose_to_json(const geom::RigidTransform& t) {
  std::vector<double> m(16, 0.0);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[4 * r + c] = t.rotation.at(r, c);
  }
  m[3] = t.translation.x;
  m[7] = t.translation.y;
  m[11] = t.translation.z;
  m[15] = 1.0;
  return {{"matrix", m}};
}

}  // namespace vsc::io
