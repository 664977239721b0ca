#pragma once

#include <string>
#include <vector>

#include "vsc/geometry/types.hpp"

namespace vsc::pipe {

struct FrameRecord {
  int recording = 0;
  int view = 0;
  std::string color_path;
  std::string depth_path;
  std::string intrinsics_path;
  std::string pose_path;        // per-frame T_CT^CAM
  std::string spine_mask_path;  // optional external spine mask (empty = none)
  std::string labels_path;      // optional external per-point labels (empty = none)
};

struct MeshRecord {
  int level = 0;
  std::string path;
};

struct SpecimenRecord {
  std::string id;
  std::vector<MeshRecord> meshes;
  std::vector<FrameRecord> frames;
};

struct DatasetManifest {
  std::vector<SpecimenRecord> specimens;

  // Relative paths inside the file resolve against the manifest directory.
  static DatasetManifest load(const std::string& path);
  void save(const std::string& path) const;

  std::vector<std::string> specimen_ids() const;
  const SpecimenRecord& specimen(const std::string& id) const;
};

}  // namespace vsc::pipe
