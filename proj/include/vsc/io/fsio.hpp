#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vsc::io {

std::vector<std::uint8_t> read_file(const std::string& path);

// Write to "<path>.tmp" then rename, so partial output never lands under the
// final name.
void atomic_write_file(const std::string& path, const void* data, std::size_t size);
void atomic_write_file(const std::string& path, const std::string& text);

std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed = 0);

}  // namespace vsc::io
