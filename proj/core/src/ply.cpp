#include "sgf/ply.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <optional>
#include <sstream>

#include "sgf/error.hpp"

namespace sgf::ply {

namespace {

enum class Scalar { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::optional<Scalar> scalar_from_name(std::string_view n) {
  if (n == "char" || n == "int8") return Scalar::kInt8;
  if (n == "uchar" || n == "uint8") return Scalar::kUint8;
  if (n == "short" || n == "int16") return Scalar::kInt16;
  if (n == "ushort" || n == "uint16") return Scalar::kUint16;
  if (n == "int" || n == "int32") return Scalar::kInt32;
  if (n == "uint" || n == "uint32") return Scalar::kUint32;
  if (n == "float" || n == "float32") return Scalar::kFloat32;
  if (n == "double" || n == "float64") return Scalar::kFloat64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUint8: return 1;
    case Scalar::kInt16:
    case Scalar::kUint16: return 2;
    case Scalar::kInt32:
    case Scalar::kUint32:
    case Scalar::kFloat32: return 4;
    case Scalar::kFloat64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUint8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(const std::string& msg) { throw DataError("PLY: " + msg); }

class BinaryReader {
 public:
  BinaryReader(std::string_view body, std::size_t base_offset, bool little)
      : body_(body), base_(base_offset), swap_(little != (std::endian::native == std::endian::little)) {}

  double read(Scalar s) {
    const std::size_t n = scalar_size(s);
    if (pos_ + n > body_.size()) {
      fail("unexpected end of binary data at byte offset " + std::to_string(base_ + pos_));
    }
    std::array<unsigned char, 8> buf{};
    std::memcpy(buf.data(), body_.data() + pos_, n);
    if (swap_) {
      for (std::size_t i = 0; i < n / 2; ++i) std::swap(buf[i], buf[n - 1 - i]);
    }
    pos_ += n;
    switch (s) {
      case Scalar::kInt8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case Scalar::kUint8: return static_cast<double>(buf[0]);
      case Scalar::kInt16: return static_cast<double>(load<std::int16_t>(buf));
      case Scalar::kUint16: return static_cast<double>(load<std::uint16_t>(buf));
      case Scalar::kInt32: return static_cast<double>(load<std::int32_t>(buf));
      case Scalar::kUint32: return static_cast<double>(load<std::uint32_t>(buf));
      case Scalar::kFloat32: return static_cast<double>(load<float>(buf));
      case Scalar::kFloat64: return load<double>(buf);
    }
    return 0.0;
  }

  std::size_t offset() const { return base_ + pos_; }

 private:
  template <typename T>
  static T load(const std::array<unsigned char, 8>& buf) {
    T v;
    std::memcpy(&v, buf.data(), sizeof(T));
    return v;
  }

  std::string_view body_;
  std::size_t base_;
  std::size_t pos_ = 0;
  bool swap_;
};

struct VertexLayout {
  std::array<int, 8> slot{};  // property index for x,y,z,red,green,blue,instance_id,semantic_id
};

constexpr std::array<std::string_view, 8> kVertexNames = {"x", "y", "z", "red", "green", "blue",
                                                          "instance_id", "semantic_id"};

PointRecord make_point(const std::array<double, 8>& v, std::size_t index, const std::string& where) {
  const auto as_id = [&](double d, std::string_view what) {
    if (!(d >= 0) || d > 4294967295.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      fail("vertex " + std::to_string(index) + " has invalid " + std::string(what) + " (" + where + ")");
    }
    return static_cast<std::uint32_t>(d);
  };
  const auto as_color = [](double d) { return static_cast<int>(d); };
  return PointRecord{v[0],          v[1],          v[2],
                     as_color(v[3]), as_color(v[4]), as_color(v[5]),
                     as_id(v[6], "instance_id"), as_id(v[7], "semantic_id")};
}

}  // namespace

Contents parse(std::string_view bytes) {
  Contents out;
  std::vector<Element> elements;
  std::optional<Format> format;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_done = false;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    std::string_view line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    const std::string where = "header line " + std::to_string(line_no);
    if (line_no == 1) {
      if (line != "ply") fail("missing 'ply' magic (" + where + ")");
      continue;
    }
    if (line.starts_with("comment")) {
      std::string_view text = line.substr(7);
      if (!text.empty() && text.front() == ' ') text.remove_prefix(1);
      out.comments.emplace_back(text);
      continue;
    }
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) fail("malformed format line (" + where + ")");
      if (tok[1] == "ascii") format = Format::kAscii;
      else if (tok[1] == "binary_little_endian") format = Format::kBinaryLittleEndian;
      else if (tok[1] == "binary_big_endian") format = Format::kBinaryBigEndian;
      else fail("unknown format '" + std::string(tok[1]) + "' (" + where + ")");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail("malformed element line (" + where + ")");
      std::size_t count = 0;
      const auto res = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (res.ec != std::errc()) fail("bad element count (" + where + ")");
      elements.push_back({std::string(tok[1]), count, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) fail("property before any element (" + where + ")");
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = scalar_from_name(tok[2]);
        const auto it = scalar_from_name(tok[3]);
        if (!ct || !it) fail("unknown list property type (" + where + ")");
        p = {std::string(tok[4]), *it, true, *ct};
      } else if (tok.size() == 3) {
        const auto t = scalar_from_name(tok[1]);
        if (!t) fail("unknown property type '" + std::string(tok[1]) + "' (" + where + ")");
        p = {std::string(tok[2]), *t, false, Scalar::kUint8};
      } else {
        fail("malformed property line (" + where + ")");
      }
      elements.back().properties.push_back(std::move(p));
    } else if (tok[0] == "end_header") {
      header_done = true;
      break;
    } else {
      fail("unexpected header keyword '" + std::string(tok[0]) + "' (" + where + ")");
    }
  }
  if (!header_done) fail("header has no end_header");
  if (!format) fail("header has no format line");

  const Element* vertex = nullptr;
  for (const auto& e : elements) {
    if (e.name == "vertex") vertex = &e;
  }
  if (!vertex) fail("no vertex element");
  VertexLayout layout;
  for (std::size_t k = 0; k < kVertexNames.size(); ++k) {
    int found = -1;
    for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
      if (vertex->properties[i].name == kVertexNames[k] && !vertex->properties[i].is_list) found = static_cast<int>(i);
    }
    if (found < 0) fail("vertex element lacks property '" + std::string(kVertexNames[k]) + "'");
    layout.slot[k] = found;
  }
  out.points.reserve(vertex->count);

  std::vector<double> values;
  if (*format == Format::kAscii) {
    for (const auto& e : elements) {
      for (std::size_t row = 0; row < e.count; ++row) {
        if (pos >= bytes.size()) fail("unexpected end of data in element '" + e.name + "'");
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string_view::npos) eol = bytes.size();
        const std::string_view line = bytes.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        const std::string where = "line " + std::to_string(line_no);
        const auto tok = split_ws(line);
        if (&e != vertex) continue;
        if (tok.size() < e.properties.size()) fail("too few values (" + where + ")");
        values.assign(tok.size(), 0.0);
        for (std::size_t i = 0; i < tok.size(); ++i) {
          const auto res = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), values[i]);
          if (res.ec != std::errc() || res.ptr != tok[i].data() + tok[i].size()) {
            fail("non-numeric value '" + std::string(tok[i]) + "' (" + where + ")");
          }
        }
        std::array<double, 8> v{};
        for (std::size_t k = 0; k < 8; ++k) v[k] = values[static_cast<std::size_t>(layout.slot[k])];
        out.points.push_back(make_point(v, out.points.size(), where));
      }
    }
  } else {
    BinaryReader reader(bytes.substr(std::min(pos, bytes.size())), pos, *format == Format::kBinaryLittleEndian);
    for (const auto& e : elements) {
      for (std::size_t row = 0; row < e.count; ++row) {
        const std::size_t row_offset = reader.offset();
        values.assign(e.properties.size(), 0.0);
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
          const Property& p = e.properties[i];
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
          } else {
            values[i] = reader.read(p.type);
          }
        }
        if (&e != vertex) continue;
        std::array<double, 8> v{};
        for (std::size_t k = 0; k < 8; ++k) v[k] = values[static_cast<std::size_t>(layout.slot[k])];
        out.points.push_back(make_point(v, out.points.size(), "byte offset " + std::to_string(row_offset)));
      }
    }
  }
  return out;
}

std::string serialize(const ScenePointCloud& scene, Format format) {
  std::ostringstream os;
  os << "ply\n";
  switch (format) {
    case Format::kAscii: os << "format ascii 1.0\n"; break;
    case Format::kBinaryLittleEndian: os << "format binary_little_endian 1.0\n"; break;
    case Format::kBinaryBigEndian: os << "format binary_big_endian 1.0\n"; break;
  }
  os << "comment scene_id " << scene.scene_id << "\n";
  os << "comment source_dataset " << scene.source_dataset << "\n";
  if (scene.room_type) os << "comment room_type " << *scene.room_type << "\n";
  for (const auto& [id, label] : scene.instances) os << "comment instance " << id << " " << label << "\n";
  os << "element vertex " << scene.points.size() << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "property uint instance_id\nproperty uint semantic_id\n";
  os << "end_header\n";
  if (format == Format::kAscii) {
    os.precision(17);
    for (const auto& p : scene.points) {
      os << p.x << ' ' << p.y << ' ' << p.z << ' ' << p.r << ' ' << p.g << ' ' << p.b << ' ' << p.instance_id
         << ' ' << p.semantic_id << "\n";
    }
    return os.str();
  }
  const bool swap = (format == Format::kBinaryLittleEndian) != (std::endian::native == std::endian::little);
  const auto put = [&](const void* src, std::size_t n) {
    std::array<char, 8> buf{};
    std::memcpy(buf.data(), src, n);
    if (swap) {
      for (std::size_t i = 0; i < n / 2; ++i) std::swap(buf[i], buf[n - 1 - i]);
    }
    os.write(buf.data(), static_cast<std::streamsize>(n));
  };
  for (const auto& p : scene.points) {
    put(&p.x, 8);
    put(&p.y, 8);
    put(&p.z, 8);
    for (int c : {p.r, p.g, p.b}) {
      const auto byte = static_cast<unsigned char>(c);
      put(&byte, 1);
    }
    put(&p.instance_id, 4);
    put(&p.semantic_id, 4);
  }
  return os.str();
}

}  // namespace sgf::ply
