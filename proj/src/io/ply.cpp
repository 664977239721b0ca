#include "vsc/io/ply.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "vsc/io/fsio.hpp"

namespace vsc::io {

namespace {

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::I8:
    case PlyType::U8: return 1;
    case PlyType::I16:
    case PlyType::U16: return 2;
    case PlyType::I32:
    case PlyType::U32:
    case PlyType::F32: return 4;
    case PlyType::F64: return 8;
  }
  return 0;
}

PlyType parse_type(const std::string& s, std::size_t offset) {
  if (s == "char" || s == "int8") return PlyType::I8;
  if (s == "uchar" || s == "uint8") return PlyType::U8;
  if (s == "short" || s == "int16") return PlyType::I16;
  if (s == "ushort" || s == "uint16") return PlyType::U16;
  if (s == "int" || s == "int32") return PlyType::I32;
  if (s == "uint" || s == "uint32") return PlyType::U32;
  if (s == "float" || s == "float32") return PlyType::F32;
  if (s == "double" || s == "float64") return PlyType::F64;
  fail(ErrorCategory::Format, "ply: unknown property type '" + s + "'", offset);
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::F32;
  bool is_list = false;
  PlyType count_type = PlyType::U8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  int level = 0;
  std::size_t data_offset = 0;  // first byte after end_header line
};

// Header lines are ASCII regardless of payload format.
PlyHeader parse_header(const std::vector<std::uint8_t>& buf) {
  PlyHeader h;
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) -> bool {
    if (pos >= buf.size()) return false;
    std::size_t end = pos;
    while (end < buf.size() && buf[end] != '\n') ++end;
    line.assign(reinterpret_cast<const char*>(buf.data() + pos), end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end < buf.size() ? end + 1 : end;
    return true;
  };

  std::string line;
  if (!next_line(line) || line != "ply")
    fail(ErrorCategory::Format, "ply: missing 'ply' magic", 0);

  bool format_seen = false, ended = false;
  while (next_line(line)) {
    const std::size_t line_start = pos - line.size() - 1;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (version != "1.0")
        fail(ErrorCategory::Unsupported, "ply: unsupported version " + version,
             line_start);
      if (fmt == "ascii") {
        h.binary = false;
      } else if (fmt == "binary_little_endian") {
        h.binary = true;
      } else if (fmt == "binary_big_endian") {
        fail(ErrorCategory::Unsupported, "ply: big-endian payload not supported",
             line_start);
      } else {
        fail(ErrorCategory::Format, "ply: unknown format '" + fmt + "'", line_start);
      }
      format_seen = true;
    } else if (word == "comment") {
      std::string key;
      ss >> key;
      if (key == "level") ss >> h.level;
    } else if (word == "element") {
      PlyElement e;
      if (!(ss >> e.name >> e.count))
        fail(ErrorCategory::Format, "ply: malformed element line", line_start);
      h.elements.push_back(std::move(e));
    } else if (word == "property") {
      if (h.elements.empty())
        fail(ErrorCategory::Format, "ply: property before element", line_start);
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        std::string ct, it;
        if (!(ss >> ct >> it >> p.name))
          fail(ErrorCategory::Format, "ply: malformed list property", line_start);
        p.is_list = true;
        p.count_type = parse_type(ct, line_start);
        p.type = parse_type(it, line_start);
      } else {
        if (!(ss >> p.name))
          fail(ErrorCategory::Format, "ply: malformed property line", line_start);
        p.type = parse_type(t, line_start);
      }
      h.elements.back().properties.push_back(std::move(p));
    } else if (word == "end_header") {
      ended = true;
      break;
    } else if (word == "obj_info" || word.empty()) {
      // ignored
    } else {
      fail(ErrorCategory::Format, "ply: unexpected header line '" + word + "'",
           line_start);
    }
  }
  if (!ended) fail(ErrorCategory::Format, "ply: missing end_header", pos);
  if (!format_seen) fail(ErrorCategory::Format, "ply: missing format line", pos);
  h.data_offset = pos;
  return h;
}

class BinaryCursor {
 public:
  BinaryCursor(const std::vector<std::uint8_t>& buf, std::size_t pos)
      : buf_(buf), pos_(pos) {}

  double scalar(PlyType t) {
    const std::size_t n = type_size(t);
    if (pos_ + n > buf_.size())
      fail(ErrorCategory::Truncated, "ply: truncated binary payload", pos_);
    const std::uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    switch (t) {
      case PlyType::I8: return double(std::int8_t(p[0]));
      case PlyType::U8: return double(p[0]);
      case PlyType::I16: {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return double(v);
      }
      case PlyType::U16: {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return double(v);
      }
      case PlyType::I32: {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return double(v);
      }
      case PlyType::U32: {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return double(v);
      }
      case PlyType::F32: {
        float v;
        std::memcpy(&v, p, 4);
        return double(v);
      }
      case PlyType::F64: {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
    }
    return 0;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::vector<std::uint8_t>& buf, std::size_t pos)
      : buf_(buf), pos_(pos) {}

  double scalar(PlyType) {
    skip_space();
    if (pos_ >= buf_.size())
      fail(ErrorCategory::Truncated, "ply: truncated ascii payload", pos_);
    const char* begin = reinterpret_cast<const char*>(buf_.data() + pos_);
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin)
      fail(ErrorCategory::Format, "ply: bad ascii number", pos_);
    pos_ += std::size_t(end - begin);
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space() {
    while (pos_ < buf_.size() &&
           (buf_[pos_] == ' ' || buf_[pos_] == '\n' || buf_[pos_] == '\r' ||
            buf_[pos_] == '\t'))
      ++pos_;
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_;
};

struct Parsed {
  geom::PointCloud cloud;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  int level = 0;
};

template <class Cursor>
void parse_elements(const PlyHeader& h, Cursor cur, Parsed& out) {
  for (const PlyElement& elem : h.elements) {
    if (elem.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, il = -1;
      for (std::size_t p = 0; p < elem.properties.size(); ++p) {
        const auto& prop = elem.properties[p];
        if (prop.is_list)
          fail(ErrorCategory::Unsupported, "ply: list property on vertex element",
               cur.pos());
        if (prop.name == "x") ix = int(p);
        if (prop.name == "y") iy = int(p);
        if (prop.name == "z") iz = int(p);
        if (prop.name == "red") ir = int(p);
        if (prop.name == "green") ig = int(p);
        if (prop.name == "blue") ib = int(p);
        if (prop.name == "label") il = int(p);
      }
      if (ix < 0 || iy < 0 || iz < 0)
        fail(ErrorCategory::Format, "ply: vertex element missing x/y/z", cur.pos());
      const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;
      const bool color_is_byte = has_color && elem.properties[ir].type == PlyType::U8;

      out.cloud.points.reserve(elem.count);
      std::vector<double> row(elem.properties.size());
      for (std::size_t i = 0; i < elem.count; ++i) {
        for (std::size_t p = 0; p < elem.properties.size(); ++p)
          row[p] = cur.scalar(elem.properties[p].type);
        out.cloud.points.push_back({row[ix], row[iy], row[iz]});
        if (has_color) {
          const float s = color_is_byte ? 1.f / 255.f : 1.f;
          out.cloud.colors.push_back(
              {float(row[ir]) * s, float(row[ig]) * s, float(row[ib]) * s});
        }
        if (il >= 0) out.cloud.labels.push_back(int(row[il]));
      }
    } else if (elem.name == "face") {
      int list_idx = -1;
      for (std::size_t p = 0; p < elem.properties.size(); ++p)
        if (elem.properties[p].is_list &&
            (elem.properties[p].name == "vertex_indices" ||
             elem.properties[p].name == "vertex_index"))
          list_idx = int(p);
      if (list_idx < 0)
        fail(ErrorCategory::Format, "ply: face element without vertex_indices",
             cur.pos());
      out.triangles.reserve(elem.count);
      for (std::size_t i = 0; i < elem.count; ++i) {
        for (std::size_t p = 0; p < elem.properties.size(); ++p) {
          const auto& prop = elem.properties[p];
          if (!prop.is_list) {
            cur.scalar(prop.type);
            continue;
          }
          const std::size_t n = std::size_t(cur.scalar(prop.count_type));
          std::vector<std::uint32_t> poly(n);
          for (std::size_t j = 0; j < n; ++j)
            poly[j] = std::uint32_t(cur.scalar(prop.type));
          if (int(p) == list_idx) {
            if (n < 3)
              fail(ErrorCategory::Format, "ply: face with fewer than 3 vertices",
                   cur.pos());
            for (std::size_t j = 2; j < n; ++j)  // fan-triangulate polygons
              out.triangles.push_back({poly[0], poly[j - 1], poly[j]});
          }
        }
      }
    } else {
      // Unknown element: consume its payload.
      for (std::size_t i = 0; i < elem.count; ++i)
        for (const auto& prop : elem.properties) {
          if (prop.is_list) {
            const std::size_t n = std::size_t(cur.scalar(prop.count_type));
            for (std::size_t j = 0; j < n; ++j) cur.scalar(prop.type);
          } else {
            cur.scalar(prop.type);
          }
        }
    }
  }
  out.level = h.level;
}

Parsed read_ply(const std::string& path) {
  const auto buf = read_file(path);
  const PlyHeader h = parse_header(buf);
  Parsed out;
  if (h.binary)
    parse_elements(h, BinaryCursor(buf, h.data_offset), out);
  else
    parse_elements(h, AsciiCursor(buf, h.data_offset), out);
  return out;
}

void append_f64_le(std::vector<std::uint8_t>& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(bits >> (8 * i)));
}

void append_f32_le(std::vector<std::uint8_t>& buf, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(bits >> (8 * i)));
}

void append_i32_le(std::vector<std::uint8_t>& buf, std::int32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(std::uint32_t(v) >> (8 * i)));
}

std::string ply_header(bool binary, std::size_t n_vertices, bool colors, bool labels,
                       std::size_t n_faces, int level) {
  std::ostringstream os;
  os << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  if (level > 0) os << "comment level " << level << "\n";
  os << "element vertex " << n_vertices << "\n"
     << "property double x\nproperty double y\nproperty double z\n";
  if (colors)
    os << "property float red\nproperty float green\nproperty float blue\n";
  if (labels) os << "property int label\n";
  if (n_faces > 0)
    os << "element face " << n_faces
       << "\nproperty list uchar int vertex_indices\n";
  os << "end_header\n";
  return os.str();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt9f(float v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%.9g", double(v));
  return buf;
}

}  // namespace

geom::PointCloud read_ply_cloud(const std::string& path) {
  Parsed p = read_ply(path);
  p.cloud.validate();
  return std::move(p.cloud);
}

geom::TriangleMesh read_ply_mesh(const std::string& path) {
  Parsed p = read_ply(path);
  geom::TriangleMesh mesh;
  mesh.vertices = std::move(p.cloud.points);
  mesh.triangles = std::move(p.triangles);
  mesh.level = p.level;
  if (mesh.triangles.empty())
    fail(ErrorCategory::Format, "ply: no faces; not a mesh: " + path);
  mesh.validate();
  return mesh;
}

void write_ply(const std::string& path, const geom::PointCloud& cloud, bool binary) {
  cloud.validate();
  const std::string header = ply_header(binary, cloud.size(), cloud.has_colors(),
                                        cloud.has_labels(), 0, 0);
  if (binary) {
    std::vector<std::uint8_t> buf(header.begin(), header.end());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      append_f64_le(buf, cloud.points[i].x);
      append_f64_le(buf, cloud.points[i].y);
      append_f64_le(buf, cloud.points[i].z);
      if (cloud.has_colors())
        for (int c = 0; c < 3; ++c) append_f32_le(buf, cloud.colors[i][c]);
      if (cloud.has_labels()) append_i32_le(buf, cloud.labels[i]);
    }
    atomic_write_file(path, buf.data(), buf.size());
  } else {
    std::ostringstream os;
    os << header;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      os << fmt17(cloud.points[i].x) << ' ' << fmt17(cloud.points[i].y) << ' '
         << fmt17(cloud.points[i].z);
      if (cloud.has_colors())
        for (int c = 0; c < 3; ++c) os << ' ' << fmt9f(cloud.colors[i][c]);
      if (cloud.has_labels()) os << ' ' << cloud.labels[i];
      os << '\n';
    }
    atomic_write_file(path, os.str());
  }
}

void write_ply(const std::string& path, const geom::TriangleMesh& mesh, bool binary) {
  mesh.validate();
  const std::string header = ply_header(binary, mesh.vertices.size(), false, false,
                                        mesh.triangles.size(), mesh.level);
  if (binary) {
    std::vector<std::uint8_t> buf(header.begin(), header.end());
    for (const Vec3& v : mesh.vertices) {
      append_f64_le(buf, v.x);
      append_f64_le(buf, v.y);
      append_f64_le(buf, v.z);
    }
    for (const auto& t : mesh.triangles) {
      buf.push_back(3);
      for (std::uint32_t idx : t) append_i32_le(buf, std::int32_t(idx));
    }
    atomic_write_file(path, buf.data(), buf.size());
  } else {
    std::ostringstream os;
    os << header;
    for (const Vec3& v : mesh.vertices)
      os << fmt17(v.x) << ' ' << fmt17(v.y) << ' ' << fmt17(v.z) << '\n';
    for (const auto& t : mesh.triangles)
      os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    atomic_write_file(path, os.str());
  }
}

}  // namespace vsc::io
