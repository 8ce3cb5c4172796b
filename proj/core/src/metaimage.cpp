#include "airway/metaimage.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "airway/error.hpp"

namespace airway {

static_assert(std::endian::native == std::endian::little,
              "MetaImage payloads are read and written as host-order little-endian");

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct HeaderLine {
  std::size_t number;
  std::string text;
  std::string value;
};

[[noreturn]] void bad_line(const std::filesystem::path& path, const HeaderLine& line,
                           const std::string& why) {
  std::ostringstream msg;
  msg << path.string() << ": line " << line.number << " \"" << line.text << "\": " << why;
  throw ParseError(msg.str());
}

template <typename T>
std::vector<T> parse_numbers(const std::filesystem::path& path, const HeaderLine& line,
                             std::size_t expected) {
  std::vector<T> out;
  const std::string& s = line.value;
  const char* p = s.data();
  const char* end = s.data() + s.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    T v{};
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t')) {
      bad_line(path, line, "expected numeric values");
    }
    out.push_back(v);
    p = next;
  }
  if (out.size() != expected) {
    bad_line(path, line, "expected " + std::to_string(expected) + " values");
  }
  return out;
}

bool parse_bool(const std::filesystem::path& path, const HeaderLine& line) {
  const auto v = lower(line.value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_line(path, line, "expected True or False");
}

ElementKind kind_from_met(const std::filesystem::path& path, const std::string& met) {
  if (met == "MET_UCHAR") return ElementKind::UInt8;
  if (met == "MET_SHORT") return ElementKind::Int16;
  if (met == "MET_FLOAT") return ElementKind::Float32;
  if (met == "MET_DOUBLE") return ElementKind::Float64;
  throw UnsupportedTypeError(path.string() + ": unsupported ElementType " + met);
}

const char* met_from_kind(ElementKind kind) {
  switch (kind) {
    case ElementKind::UInt8: return "MET_UCHAR";
    case ElementKind::Int16: return "MET_SHORT";
    case ElementKind::Float32: return "MET_FLOAT";
    case ElementKind::Float64: return "MET_DOUBLE";
  }
  return "MET_DOUBLE";
}

std::vector<double> decode(const std::vector<char>& bytes, ElementKind kind, std::size_t count) {
  std::vector<double> out(count);
  const char* p = bytes.data();
  switch (kind) {
    case ElementKind::UInt8:
      for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<unsigned char>(p[i]);
      break;
    case ElementKind::Int16:
      for (std::size_t i = 0; i < count; ++i) {
        std::int16_t v;
        std::memcpy(&v, p + 2 * i, 2);
        out[i] = v;
      }
      break;
    case ElementKind::Float32:
      for (std::size_t i = 0; i < count; ++i) {
        float v;
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = v;
      }
      break;
    case ElementKind::Float64:
      std::memcpy(out.data(), p, 8 * count);
      break;
  }
  return out;
}

std::vector<char> encode(const Volume3& vol) {
  const auto values = vol.values();
  const auto esize = element_size(vol.kind());
  std::vector<char> out(values.size() * esize);
  char* p = out.data();
  switch (vol.kind()) {
    case ElementKind::UInt8:
      for (std::size_t i = 0; i < values.size(); ++i) {
        p[i] = static_cast<char>(static_cast<std::uint8_t>(values[i]));
      }
      break;
    case ElementKind::Int16:
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto v = static_cast<std::int16_t>(values[i]);
        std::memcpy(p + 2 * i, &v, 2);
      }
      break;
    case ElementKind::Float32:
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto v = static_cast<float>(values[i]);
        std::memcpy(p + 4 * i, &v, 4);
      }
      break;
    case ElementKind::Float64:
      std::memcpy(p, values.data(), out.size());
      break;
  }
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

Volume3 read_mha(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");

  std::map<std::string, HeaderLine> keys;
  std::string raw;
  std::size_t number = 0;
  bool have_data_file = false;
  while (std::getline(in, raw)) {
    ++number;
    const auto text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      bad_line(path, {number, text, {}}, "expected 'Key = Value'");
    }
    auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) bad_line(path, {number, text, {}}, "empty key");
    keys[key] = HeaderLine{number, text, value};
    if (key == "ElementDataFile") {
      have_data_file = true;
      break;
    }
  }
  if (!have_data_file) {
    throw ParseError(path.string() + ": header has no ElementDataFile line");
  }

  auto require = [&](const std::string& key) -> const HeaderLine& {
    auto it = keys.find(key);
    if (it == keys.end()) throw ParseError(path.string() + ": missing header key " + key);
    return it->second;
  };

  if (auto it = keys.find("ObjectType"); it != keys.end() && it->second.value != "Image") {
    bad_line(path, it->second, "ObjectType must be Image");
  }
  const auto& ndims = require("NDims");
  if (parse_numbers<int>(path, ndims, 1)[0] != 3) bad_line(path, ndims, "only NDims = 3 is supported");
  for (const char* k : {"ElementByteOrderMSB", "BinaryDataByteOrderMSB"}) {
    if (auto it = keys.find(k); it != keys.end() && parse_bool(path, it->second)) {
      throw UnsupportedTypeError(path.string() + ": big-endian payloads are not supported");
    }
  }
  if (auto it = keys.find("CompressedData"); it != keys.end() && parse_bool(path, it->second)) {
    throw UnsupportedTypeError(path.string() + ": compressed payloads are not supported");
  }

  Grid grid;
  const auto dims = parse_numbers<std::size_t>(path, require("DimSize"), 3);
  const auto spacing = parse_numbers<double>(path, require("ElementSpacing"), 3);
  std::vector<double> offset{0.0, 0.0, 0.0};
  if (auto it = keys.find("Offset"); it != keys.end()) {
    offset = parse_numbers<double>(path, it->second, 3);
  } else if (auto it2 = keys.find("Origin"); it2 != keys.end()) {
    offset = parse_numbers<double>(path, it2->second, 3);
  }
  for (int a = 0; a < 3; ++a) {
    grid.dims[a] = dims[a];
    grid.spacing[a] = spacing[a];
    grid.origin[a] = offset[a];
  }
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  const auto kind = kind_from_met(path, require("ElementType").value);
  const auto expected = grid.voxel_count() * element_size(kind);

  std::vector<char> payload;
  const auto& data_file = keys.at("ElementDataFile").value;
  if (data_file == "LOCAL") {
    payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    const auto raw_path = path.parent_path() / data_file;
    std::ifstream rin(raw_path, std::ios::binary);
    if (!rin) throw IoError(raw_path.string() + ": cannot open payload file");
    payload.assign(std::istreambuf_iterator<char>(rin), std::istreambuf_iterator<char>());
  }
  if (payload.size() != expected) {
    std::ostringstream msg;
    msg << path.string() << ": payload size mismatch, expected " << expected << " bytes, got "
        << payload.size();
    throw SizeError(msg.str());
  }
  return Volume3(grid, kind, decode(payload, kind, grid.voxel_count()));
}

void write_mha(const Volume3& vol, const std::filesystem::path& path) {
  const bool detached = path.extension() == ".mhd";
  auto raw_path = path;
  raw_path.replace_extension(".raw");

  const auto& g = vol.grid();
  std::ostringstream header;
  header << "ObjectType = Image\n"
         << "NDims = 3\n"
         << "BinaryData = True\n"
         << "BinaryDataByteOrderMSB = False\n"
         << "ElementByteOrderMSB = False\n"
         << "CompressedData = False\n"
         << "Offset = " << shortest(g.origin[0]) << ' ' << shortest(g.origin[1]) << ' '
         << shortest(g.origin[2]) << '\n'
         << "ElementSpacing = " << shortest(g.spacing[0]) << ' ' << shortest(g.spacing[1]) << ' '
         << shortest(g.spacing[2]) << '\n'
         << "DimSize = " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n'
         << "ElementType = " << met_from_kind(vol.kind()) << '\n'
         << "ElementDataFile = " << (detached ? raw_path.filename().string() : "LOCAL") << '\n';

  const auto payload = encode(vol);
  auto write_file = [](const std::filesystem::path& p, const std::string& head,
                       const std::vector<char>& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(p.string() + ": cannot open for writing");
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError(p.string() + ": write failed");
  };
  if (detached) {
    write_file(raw_path, {}, payload);
    write_file(path, header.str(), {});
  } else {
    write_file(path, header.str(), payload);
  }
}

}  // namespace airway
