#pragma once

#include <string>

#include "vsc/geometry/types.hpp"

namespace vsc::io {

// Depth rides as 16-bit grayscale PNG in millimeters (0 = invalid); color as
// 8-bit RGB. Any other layout is a format error naming the expectation.

geom::DepthImage read_depth_png(const std::string& path);
geom::ColorImage read_color_png(const std::string& path);

// Depth values are rounded to whole millimeters and clamped to [0, 65535].
void write_depth_png(const std::string& path, const geom::DepthImage& depth);
void write_color_png(const std::string& path, const geom::ColorImage& color);

// Masks ride as 8-bit grayscale PNG; pixel value = label, 0 = background.
geom::MaskImage read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const geom::MaskImage& mask);

}  // namespace vsc::io
