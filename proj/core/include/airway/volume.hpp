#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace airway {

enum class ElementKind : std::uint8_t { UInt8, Int16, Float32, Float64 };

std::string_view to_string(ElementKind kind);
std::size_t element_size(ElementKind kind);

using Dims3 = std::array<std::size_t, 3>;
using Vec3 = std::array<double, 3>;

struct Index3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Sampling lattice shared by every volume: voxel counts, spacing and origin
/// in mm. Linear index is x + nx * (y + ny * z).
struct Grid {
  Dims3 dims{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

  std::size_t linear(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }

  Index3 unravel(std::size_t i) const {
    const auto x = i % dims[0];
    const auto yz = i / dims[0];
    return {static_cast<std::int64_t>(x), static_cast<std::int64_t>(yz % dims[1]),
            static_cast<std::int64_t>(yz / dims[1])};
  }

  bool contains(const Index3& p) const {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && static_cast<std::size_t>(p.x) < dims[0] &&
           static_cast<std::size_t>(p.y) < dims[1] && static_cast<std::size_t>(p.z) < dims[2];
  }

  /// Physical position (mm) of a voxel center.
  Vec3 position(std::size_t x, std::size_t y, std::size_t z) const {
    return {origin[0] + static_cast<double>(x) * spacing[0],
            origin[1] + static_cast<double>(y) * spacing[1],
            origin[2] + static_cast<double>(z) * spacing[2]};
  }

  /// Throws ValidationError unless all dims are nonzero and spacing is
  /// strictly positive and finite.
  void validate() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Dense immutable scalar volume.
///
/// Values are held as double regardless of the element kind, but on
/// construction every value is rounded to what the kind can represent
/// (float32 rounding, or round-half-away-and-saturate for integer kinds), so
/// writing to disk in the declared kind is lossless.
class Volume3 {
 public:
  Volume3() = default;
  Volume3(Grid grid, ElementKind kind, std::vector<double> values);

  /// Volume of the given kind filled with `fill`.
  static Volume3 filled(Grid grid, ElementKind kind, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  const Dims3& dims() const { return grid_.dims; }
  const Vec3& spacing() const { return grid_.spacing; }
  const Vec3& origin() const { return grid_.origin; }
  ElementKind kind() const { return kind_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t x, std::size_t y, std::size_t z) const {
    return values_[grid_.linear(x, y, z)];
  }

  /// Same grid, new kind, values re-rounded.
  Volume3 as_kind(ElementKind kind) const;

  /// True when every value is 0 or 1.
  bool is_binary() const;

  /// Number of nonzero values.
  std::size_t count_nonzero() const;

  /// Bitwise equality of grid, kind and values.
  friend bool operator==(const Volume3& a, const Volume3& b);

 private:
  Grid grid_;
  ElementKind kind_ = ElementKind::Float64;
  std::vector<double> values_;
};

/// Binary uint8 mask on `grid` built from a predicate over linear indices.
template <typename Pred>
Volume3 make_mask(const Grid& grid, Pred&& pred) {
  std::vector<double> v(grid.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pred(i) ? 1.0 : 0.0;
  return Volume3(grid, ElementKind::UInt8, std::move(v));
}

/// Throws ValidationError unless `v` is a binary mask.
void require_binary(const Volume3& v, std::string_view what);

/// Throws ValidationError unless both volumes share dims.
void require_same_dims(const Volume3& a, const Volume3& b, std::string_view what);

/// Default CT window, HU.
inline constexpr double kDefaultWindowLo = -1000.0;
inline constexpr double kDefaultWindowHi = 600.0;

/// Clip to [lo, hi] then map affinely onto [0, 1]. Output is float32.
Volume3 normalize_ct(const Volume3& vol, double lo = kDefaultWindowLo,
                     double hi = kDefaultWindowHi);

}  // namespace airway
