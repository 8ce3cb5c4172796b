#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "airway/eigen_sym3.hpp"
#include "airway/volume.hpp"

namespace airway {

enum class Polarity { Bright, Dark };

Polarity parse_polarity(std::string_view s);
std::string_view to_string(Polarity p);

struct VesselnessParams {
  std::vector<double> scales{0.5, 1.0, 2.0, 3.0, 4.0};  // sigma, mm
  double alpha = 0.5;
  double beta = 0.5;
  /// Fixed structureness constant; empty means half the maximum Hessian
  /// Frobenius norm over the volume, per scale.
  std::optional<double> c;
  Polarity polarity = Polarity::Dark;
  /// Second derivatives are multiplied by sigma^(2 gamma).
  double gamma = 1.0;

  /// Throws ValidationError on empty/non-increasing/non-positive scales,
  /// alpha/beta <= 0, or a fixed c <= 0.
  void validate() const;
};

/// Separable sampled-Gaussian smoothing. Per axis the kernel width is
/// sigma / spacing voxels, its radius ceil(4 sigma / spacing), weights sum to
/// one, and out-of-range samples are clamped to the nearest edge voxel.
Volume3 gaussian_smooth(const Volume3& vol, double sigma_mm);

/// The six distinct second-derivative volumes (float64) at one scale.
struct HessianField {
  Grid grid;
  std::vector<double> xx, yy, zz, xy, xz, yz;

  Sym3 at(std::size_t i) const { return {xx[i], yy[i], zz[i], xy[i], xz[i], yz[i]}; }
};

/// Central differences (physical spacing, clamped neighbors) of the
/// sigma-smoothed image, scaled by sigma^(2 gamma). Requires every dim >= 5.
HessianField hessian_at_scale(const Volume3& vol, double sigma_mm, double gamma = 1.0);

/// Vesselness of one eigen triple in [0, 1]. For dark polarity the signs of
/// the eigenvalues are flipped before the bright-structure rule is applied.
double vesselness_response(const EigenTriple& e, const VesselnessParams& p, double c_effective);

/// Eigenvalues of every voxel of a Hessian field, with the polarity
/// adjustment applied (dark polarity negates the Hessian before solving).
std::vector<EigenTriple> polarity_adjusted_eigenvalues(const HessianField& h, Polarity polarity);

/// The structureness constant frangi would use for this field.
double effective_c(const HessianField& h, const VesselnessParams& p);

/// Per-scale response map (float64) for one scale.
Volume3 vesselness_at_scale(const Volume3& vol, double sigma_mm, const VesselnessParams& p);

/// Multiscale vesselness: voxelwise maximum over `p.scales` of the per-scale
/// response. Output is float32 in [0, 1].
Volume3 frangi(const Volume3& vol, const VesselnessParams& p);

}  // namespace airway
