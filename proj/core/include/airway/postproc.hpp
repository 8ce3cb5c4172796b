#pragma once

#include "airway/volume.hpp"

namespace airway {

struct Seed {
  Index3 voxel;
  std::size_t slice = 0;
  /// Euclidean distance (voxels) the rounded centroid was moved to land on
  /// foreground; 0 when the centroid itself was foreground.
  double snap_distance = 0.0;
};

/// Centroid of the lowest-z slice that has foreground, rounded half away
/// from zero per axis. A background centroid snaps to the nearest in-slice
/// foreground voxel (ties to the smallest linear index). Throws
/// EmptyMaskError on an empty mask.
Seed find_seed(const Volume3& mask);

/// Foreground voxels 26-connected to `seed`.
Volume3 region_grow(const Volume3& mask, const Index3& seed);

/// Largest 26-connected component; ties go to the component containing the
/// smallest linear index. Empty in, empty out.
Volume3 largest_cc(const Volume3& mask);

/// find_seed -> region_grow -> largest_cc. Empty masks pass through.
Volume3 postprocess(const Volume3& mask);

/// Same, with an explicit seed (must be foreground).
Volume3 postprocess(const Volume3& mask, const Index3& seed);

}  // namespace airway
