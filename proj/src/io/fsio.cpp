#include "vsc/io/fsio.hpp"

#include <array>
#include <cstdio>
#include <filesystem>

#include "vsc/core.hpp"

namespace vsc::io {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorCategory::Io, "cannot open file: " + path);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> data(size > 0 ? std::size_t(size) : 0);
  if (!data.empty() && std::fread(data.data(), 1, data.size(), f) != data.size()) {
    std::fclose(f);
    fail(ErrorCategory::Io, "short read: " + path);
  }
  std::fclose(f);
  return data;
}

void atomic_write_file(const std::string& path, const void* data, std::size_t size) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) fail(ErrorCategory::Io, "cannot open file for writing: " + tmp);
  if (size != 0 && std::fwrite(data, 1, size, f) != size) {
    std::fclose(f);
    std::remove(tmp.c_str());
    fail(ErrorCategory::Io, "short write: " + tmp);
  }
  if (std::fclose(f) != 0) {
    std::remove(tmp.c_str());
    fail(ErrorCategory::Io, "close failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorCategory::Io, "rename failed: " + path + " (" + ec.message() + ")");
  }
}

void atomic_write_file(const std::string& path, const std::string& text) {
  atomic_write_file(path, text.data(), text.size());
}

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed) {
  static const auto table = make_crc_table();
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint32_t c = seed ^ 0xffffffffu;
  for (std::size_t i = 0; i < size; ++i) c = table[(c ^ p[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

}  // namespace vsc::io
