#include "airway/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "airway/error.hpp"

namespace airway {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::UInt8: return "uint8";
    case ElementKind::Int16: return "int16";
    case ElementKind::Float32: return "float32";
    case ElementKind::Float64: return "float64";
  }
  return "unknown";
}

std::size_t element_size(ElementKind kind) {
  switch (kind) {
    case ElementKind::UInt8: return 1;
    case ElementKind::Int16: return 2;
    case ElementKind::Float32: return 4;
    case ElementKind::Float64: return 8;
  }
  return 0;
}

void Grid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] == 0) throw ValidationError("grid: dims must be nonzero");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ValidationError("grid: spacing must be strictly positive and finite");
    }
  }
}

namespace {

double saturate_round(double v, double lo, double hi) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(std::round(v), lo, hi);
}

void round_to_kind(std::vector<double>& values, ElementKind kind) {
  switch (kind) {
    case ElementKind::UInt8:
      for (auto& v : values) v = saturate_round(v, 0.0, 255.0);
      break;
    case ElementKind::Int16:
      for (auto& v : values) v = saturate_round(v, -32768.0, 32767.0);
      break;
    case ElementKind::Float32:
      for (auto& v : values) v = static_cast<double>(static_cast<float>(v));
      break;
    case ElementKind::Float64:
      break;
  }
}

}  // namespace

Volume3::Volume3(Grid grid, ElementKind kind, std::vector<double> values)
    : grid_(grid), kind_(kind), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.voxel_count()) {
    std::ostringstream msg;
    msg << "volume: " << values_.size() << " values for " << grid_.dims[0] << "x"
        << grid_.dims[1] << "x" << grid_.dims[2] << " grid";
    throw ValidationError(msg.str());
  }
  round_to_kind(values_, kind_);
}

Volume3 Volume3::filled(Grid grid, ElementKind kind, double fill) {
  return Volume3(grid, kind, std::vector<double>(grid.voxel_count(), fill));
}

Volume3 Volume3::as_kind(ElementKind kind) const {
  return Volume3(grid_, kind, values_);
}

bool Volume3::is_binary() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

std::size_t Volume3::count_nonzero() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

bool operator==(const Volume3& a, const Volume3& b) {
  if (!(a.grid_ == b.grid_) || a.kind_ != b.kind_ || a.values_.size() != b.values_.size()) {
    return false;
  }
  return a.values_.empty() ||
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

void require_binary(const Volume3& v, std::string_view what) {
  if (!v.is_binary()) {
    throw ValidationError(std::string(what) + ": expected a binary mask (values 0/1)");
  }
}

void require_same_dims(const Volume3& a, const Volume3& b, std::string_view what) {
  if (a.dims() != b.dims()) {
    std::ostringstream msg;
    msg << what << ": dims differ (" << a.dims()[0] << "x" << a.dims()[1] << "x" << a.dims()[2]
        << " vs " << b.dims()[0] << "x" << b.dims()[1] << "x" << b.dims()[2] << ")";
    throw ValidationError(msg.str());
  }
}

Volume3 normalize_ct(const Volume3& vol, double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("normalize_ct: window requires lo < hi");
  const double width = hi - lo;
  std::vector<double> out(vol.size());
  const auto in = vol.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (std::clamp(in[i], lo, hi) - lo) / width;
  }
  return Volume3(vol.grid(), ElementKind::Float32, std::move(out));
}

}  // namespace airway
