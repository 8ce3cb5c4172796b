#include "airway/postproc.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "airway/error.hpp"

namespace airway {

namespace {

/// Breadth-first flood over 26-neighbors; marks `label` in `labels` and
/// returns the component size.
std::size_t flood(const Volume3& mask, std::size_t start, std::int32_t label,
                  std::vector<std::int32_t>& labels, std::vector<std::size_t>& queue) {
  const auto& g = mask.grid();
  const auto nx = static_cast<std::int64_t>(g.dims[0]);
  const auto ny = static_cast<std::int64_t>(g.dims[1]);
  const auto nz = static_cast<std::int64_t>(g.dims[2]);
  queue.clear();
  queue.push_back(start);
  labels[start] = label;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index3 p = g.unravel(queue[head]);
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      const std::int64_t z = p.z + dz;
      if (z < 0 || z >= nz) continue;
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::int64_t y = p.y + dy;
        if (y < 0 || y >= ny) continue;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t x = p.x + dx;
          if (x < 0 || x >= nx) continue;
          const auto j = static_cast<std::size_t>(x + nx * (y + ny * z));
          if (labels[j] == 0 && mask[j] != 0.0) {
            labels[j] = label;
            queue.push_back(j);
          }
        }
      }
    }
  }
  return queue.size();
}

}  // namespace

Seed find_seed(const Volume3& mask) {
  require_binary(mask, "find_seed");
  const auto& g = mask.grid();
  for (std::size_t z = 0; z < g.dims[2]; ++z) {
    double sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y < g.dims[1]; ++y) {
      for (std::size_t x = 0; x < g.dims[0]; ++x) {
        if (mask.at(x, y, z) != 0.0) {
          sx += static_cast<double>(x);
          sy += static_cast<double>(y);
          ++count;
        }
      }
    }
    if (count == 0) continue;

    Seed seed;
    seed.slice = z;
    seed.voxel = {static_cast<std::int64_t>(std::round(sx / static_cast<double>(count))),
                  static_cast<std::int64_t>(std::round(sy / static_cast<double>(count))),
                  static_cast<std::int64_t>(z)};
    if (mask.at(static_cast<std::size_t>(seed.voxel.x), static_cast<std::size_t>(seed.voxel.y),
                z) != 0.0) {
      return seed;
    }
    // Row-major scan visits candidates in increasing linear index, so a
    // strict improvement test keeps the smallest index among ties.
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    Index3 pick{};
    for (std::size_t y = 0; y < g.dims[1]; ++y) {
      for (std::size_t x = 0; x < g.dims[0]; ++x) {
        if (mask.at(x, y, z) == 0.0) continue;
        const std::int64_t dx = static_cast<std::int64_t>(x) - seed.voxel.x;
        const std::int64_t dy = static_cast<std::int64_t>(y) - seed.voxel.y;
        const std::int64_t d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          pick = {static_cast<std::int64_t>(x), static_cast<std::int64_t>(y),
                  static_cast<std::int64_t>(z)};
        }
      }
    }
    seed.voxel = pick;
    seed.snap_distance = std::sqrt(static_cast<double>(best));
    return seed;
  }
  throw EmptyMaskError("find_seed: mask has no foreground voxels");
}

Volume3 region_grow(const Volume3& mask, const Index3& seed) {
  require_binary(mask, "region_grow");
  const auto& g = mask.grid();
  if (!g.contains(seed)) throw ValidationError("region_grow: seed outside the volume");
  const auto start = g.linear(static_cast<std::size_t>(seed.x), static_cast<std::size_t>(seed.y),
                              static_cast<std::size_t>(seed.z));
  if (mask[start] == 0.0) throw ValidationError("region_grow: seed is not foreground");
  std::vector<std::int32_t> labels(mask.size(), 0);
  std::vector<std::size_t> queue;
  flood(mask, start, 1, labels, queue);
  return make_mask(g, [&](std::size_t i) { return labels[i] == 1; });
}

Volume3 largest_cc(const Volume3& mask) {
  require_binary(mask, "largest_cc");
  std::vector<std::int32_t> labels(mask.size(), 0);
  std::vector<std::size_t> queue;
  std::int32_t next = 0, best_label = 0;
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0 || labels[i] != 0) continue;
    const auto size = flood(mask, i, ++next, labels, queue);
    // Components are discovered in order of their smallest linear index.
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
  }
  return make_mask(mask.grid(),
                   [&](std::size_t i) { return best_label != 0 && labels[i] == best_label; });
}

Volume3 postprocess(const Volume3& mask) {
  require_binary(mask, "postprocess");
  if (mask.count_nonzero() == 0) return mask.as_kind(ElementKind::UInt8);
  return postprocess(mask, find_seed(mask).voxel);
}

Volume3 postprocess(const Volume3& mask, const Index3& seed) {
  return largest_cc(region_grow(mask, seed));
}

}  // namespace airway
