#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

enum class PhantomKind { StraightTube, BentTube, Bifurcation, Blob, Plate };
enum class Profile { Hard, Gaussian };
enum class PhantomPolarity { BrightOnDark, DarkOnBright };

PhantomKind parse_phantom_kind(std::string_view s);
Profile parse_profile(std::string_view s);
PhantomPolarity parse_phantom_polarity(std::string_view s);

/// Synthetic structure description.
///
/// Geometry is laid out in physical coordinates relative to the grid:
///  - straight tube: along z through the in-plane center;
///  - bent tube: quarter torus of bend radius 0.6 * min(x, z extent) centered
///    on the x = z = origin edge, lying in the y-center plane;
///  - bifurcation: trunk along z from z = 0 to the center, then two daughters
///    to (center_x -/+ extent_x / 4, center_y, far z face);
///  - blob: ball at the center;
///  - plate: slab normal to z through the center, `radius` is the half thickness.
///
/// The image is `background + sign * contrast * f(d)` with d the distance to the
/// structure's medial set, f = [d <= radius] (hard) or exp(-d^2 / (2 radius^2))
/// (gaussian), sign = -1 for dark-on-bright. The mask is [d <= radius].
struct PhantomSpec {
  PhantomKind kind = PhantomKind::StraightTube;
  double radius = 2.0;
  Profile profile = Profile::Gaussian;
  PhantomPolarity polarity = PhantomPolarity::BrightOnDark;
  double noise_sigma = 0.0;
  double contrast = 1.0;
  double background = 0.0;
  Grid grid{{32, 32, 32}, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};

  /// Throws ValidationError on radius outside (0, min extent / 4) or bad grid.
  void validate() const;
};

struct Phantom {
  Volume3 image;  // float32
  Volume3 mask;   // uint8 binary
};

/// Deterministic in (spec, seed); the seed only drives additive gaussian noise.
Phantom make_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Distance (mm) from a physical point to the structure's medial set.
double phantom_distance(const PhantomSpec& spec, const Vec3& p);

struct CenterlinePoint {
  Index3 voxel;
  int branch = 1;
};

/// Voxelized analytic centerline for tube-like phantoms (straight, bent,
/// bifurcation), ordered along each branch. Throws ValidationError for blob
/// and plate.
std::vector<CenterlinePoint> phantom_centerline(const PhantomSpec& spec);

}  // namespace airway
