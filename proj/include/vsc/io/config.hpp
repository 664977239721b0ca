#pragma once

#include <string>

#include <json.hpp>

#include "vsc/geometry/types.hpp"

namespace vsc::io {

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

// Applies "a.b.c=value" onto a JSON document. The value is parsed as JSON
// (numbers, bools, arrays); anything unparseable is taken as a string. The
// dotted path must already exist, so typos are rejected instead of silently
// adding keys.
void apply_override(nlohmann::json& j, const std::string& assignment);

// {"fx":..,"fy":..,"cx":..,"cy":..,"width":..,"height":..}
geom::CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json intrinsics_to_json(const geom::CameraIntrinsics& intr);

// {"matrix": [16 row-major values]}, the top-left 3x3 orthonormal.
geom::RigidTransform pose_from_json(const nlohmann::json& j);
nlohmann::json pose_to_json(const geom::RigidTransform& t);

}  // namespace vsc::io
