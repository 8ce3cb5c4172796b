#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "airway/error.hpp"
#include "airway/unet3p.hpp"

namespace airway::nn {

namespace {

constexpr std::string_view kEndHeader = "end_header";

}  // namespace

void save_params(const NetParams& params, const std::filesystem::path& path) {
  const auto& spec = params.spec();
  std::ostringstream head;
  head << "format = " << kParamsFormatVersion << '\n'
       << "levels = " << spec.levels << '\n'
       << "base_channels = " << spec.base_channels << '\n'
       << "skip_channels = " << spec.skip_channels << '\n'
       << "in_channels = " << spec.in_channels << '\n'
       << "out_channels = " << spec.out_channels << '\n'
       << "seed = " << params.seed() << '\n';
  std::size_t offset = 0;
  for (const auto& t : params.tensors()) {
    const auto& s = t.value.shape();
    head << "tensor " << t.name << ' ' << s.n << ' ' << s.c << ' ' << s.d << ' ' << s.h << ' '
         << s.w << ' ' << offset << '\n';
    offset += s.size() * sizeof(float);
  }
  head << "blob_bytes = " << offset << '\n' << kEndHeader << '\n';

  std::vector<char> blob(offset);
  std::size_t pos = 0;
  for (const auto& t : params.tensors()) {
    for (double v : t.value.values()) {
      const auto f = static_cast<float>(v);
      std::memcpy(blob.data() + pos, &f, sizeof(float));
      pos += sizeof(float);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const auto h = head.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

NetParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");

  auto fail = [&](std::size_t line_no, const std::string& line, const std::string& why) {
    std::ostringstream msg;
    msg << path.string() << ": line " << line_no << " \"" << line << "\": " << why;
    throw ParseError(msg.str());
  };

  NetSpec spec;
  std::uint64_t seed = 0;
  std::size_t blob_bytes = 0;
  bool have_format = false, have_blob = false, ended = false;
  struct Entry {
    std::string name;
    Shape5 shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == kEndHeader) {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "tensor") {
      Entry e;
      if (!(ls >> e.name >> e.shape.n >> e.shape.c >> e.shape.d >> e.shape.h >> e.shape.w >>
            e.offset)) {
        fail(line_no, line, "expected: tensor <name> <n> <c> <d> <h> <w> <offset>");
      }
      entries.push_back(e);
      continue;
    }
    std::string eq, value;
    if (!(ls >> eq >> value) || eq != "=") fail(line_no, line, "expected 'key = value'");
    auto as_int = [&]() {
      long long v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size()) fail(line_no, line, "expected integer");
      return v;
    };
    if (key == "format") {
      if (value != kParamsFormatVersion) {
        fail(line_no, line, "unsupported format, expected " + std::string(kParamsFormatVersion));
      }
      have_format = true;
    } else if (key == "levels") {
      spec.levels = static_cast<int>(as_int());
    } else if (key == "base_channels") {
      spec.base_channels = static_cast<int>(as_int());
    } else if (key == "skip_channels") {
      spec.skip_channels = static_cast<int>(as_int());
    } else if (key == "in_channels") {
      spec.in_channels = static_cast<int>(as_int());
    } else if (key == "out_channels") {
      spec.out_channels = static_cast<int>(as_int());
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(as_int());
    } else if (key == "blob_bytes") {
      blob_bytes = static_cast<std::size_t>(as_int());
      have_blob = true;
    } else {
      fail(line_no, line, "unknown key");
    }
  }
  if (!have_format) throw ParseError(path.string() + ": missing format line");
  if (!ended || !have_blob) throw ParseError(path.string() + ": truncated manifest");

  std::vector<char> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() != blob_bytes) {
    throw SizeError(path.string() + ": blob size mismatch, expected " + std::to_string(blob_bytes) +
                    " bytes, got " + std::to_string(blob.size()));
  }

  std::vector<NamedTensor> tensors;
  for (const auto& e : entries) {
    const std::size_t bytes = e.shape.size() * sizeof(float);
    if (e.offset + bytes > blob.size()) {
      throw SizeError(path.string() + ": tensor " + e.name + " extends past the blob");
    }
    std::vector<double> v(e.shape.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      float f;
      std::memcpy(&f, blob.data() + e.offset + i * sizeof(float), sizeof(float));
      v[i] = f;
    }
    tensors.push_back({e.name, Tensor::from_values(e.shape, std::move(v), true)});
  }
  spec.validate();
  return NetParams(spec, seed, std::move(tensors));
}

}  // namespace airway::nn
