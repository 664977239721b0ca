#pragma once

#include <string>

#include "vsc/geometry/types.hpp"

namespace vsc::io {

// PLY carrier for clouds and meshes. ascii 1.0 and binary_little_endian 1.0
// are supported; big-endian files are rejected as unsupported. Colors are
// float red/green/blue (uchar accepted on read, scaled to [0,1]); labels ride
// as a scalar vertex property "label"; the mesh level rides as a
// "comment level <n>" header line.

geom::PointCloud read_ply_cloud(const std::string& path);
geom::TriangleMesh read_ply_mesh(const std::string& path);

void write_ply(const std::string& path, const geom::PointCloud& cloud,
               bool binary = true);
void write_ply(const std::string& path, const geom::TriangleMesh& mesh,
               bool binary = true);

}  // namespace vsc::io
