#include "vsc/net/checkpoint.hpp"

#include <cstring>

#include "vsc/io/fsio.hpp"

namespace vsc::net {

namespace {

constexpr char kMagic[8] = {'V', 'S', 'C', 'K', 'P', 'T', '0', '1'};

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(std::uint8_t(v));
  buf.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(buf, bits);
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      fail(ErrorCategory::Truncated, "checkpoint truncated", pos);
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(buf[pos]) | std::uint16_t(buf[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

void save_model(const CompletionModel& model, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  const std::string cfg = model.config().to_json_string();
  put_u32(buf, std::uint32_t(cfg.size()));
  buf.insert(buf.end(), cfg.begin(), cfg.end());
  put_u64(buf, model.seed());
  put_u32(buf, std::uint32_t(model.params().count()));
  for (const auto& e : model.params().entries()) {
    put_u16(buf, std::uint16_t(e.name.size()));
    buf.insert(buf.end(), e.name.begin(), e.name.end());
    put_u32(buf, std::uint32_t(e.value.rows));
    put_u32(buf, std::uint32_t(e.value.cols));
    for (double d : e.value.v) put_f64(buf, d);
  }
  put_u32(buf, io::crc32(buf.data(), buf.size()));
  io::atomic_write_file(path, buf.data(), buf.size());
}

CompletionModel load_model(const std::string& path) {
  const auto buf = io::read_file(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 8) != 0)
    fail(ErrorCategory::Format, "not a model checkpoint: " + path, 0);
  const std::uint32_t stored_crc = [&] {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[buf.size() - 4 + i]) << (8 * i);
    return v;
  }();
  if (io::crc32(buf.data(), buf.size() - 4) != stored_crc)
    fail(ErrorCategory::Format, "checkpoint checksum mismatch: " + path,
         buf.size() - 4);

  Reader r{buf, 8};
  const std::uint32_t cfg_len = r.u32();
  const ModelConfig cfg = ModelConfig::from_json_string(r.bytes(cfg_len));
  const std::uint64_t seed = r.u64();
  CompletionModel model(cfg, seed);

  const std::uint32_t count = r.u32();
  if (count != model.params().count())
    fail(ErrorCategory::Format, "checkpoint parameter count does not match config");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    auto& entry = model.params().entries()[i];
    if (name != entry.name)
      fail(ErrorCategory::Format, "checkpoint parameter order mismatch at " + name,
           r.pos);
    const std::uint32_t rows = r.u32(), cols = r.u32();
    if (int(rows) != entry.value.rows || int(cols) != entry.value.cols)
      fail(ErrorCategory::Format, "checkpoint parameter shape mismatch at " + name,
           r.pos);
    for (double& d : entry.value.v) d = r.f64();
  }
  return model;
}

}  // namespace vsc::net
