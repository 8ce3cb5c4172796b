#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

struct CenterlineVoxel {
  Index3 voxel;
  int branch = 1;
};

/// Reference centerline. Voxels of one branch are ordered along the branch
/// in the order they were listed.
class CenterlineRef {
 public:
  CenterlineRef() = default;
  /// Throws ValidationError on out-of-bounds or duplicate voxels, or a
  /// branch id <= 0.
  CenterlineRef(Grid grid, std::vector<CenterlineVoxel> voxels);

  const Grid& grid() const { return grid_; }
  const std::vector<CenterlineVoxel>& voxels() const { return voxels_; }
  bool empty() const { return voxels_.empty(); }

  /// Branch id -> voxel positions in listing order.
  std::map<int, std::vector<Index3>> branches() const;

 private:
  Grid grid_;
  std::vector<CenterlineVoxel> voxels_;
};

/// Lines `ix iy iz branch_id`; `#` starts a comment. Bounds are checked
/// against `grid` (the truth volume's grid).
CenterlineRef read_centerline(const std::filesystem::path& path, const Grid& grid);
void write_centerline(const CenterlineRef& ref, const std::filesystem::path& path);

/// 2|P & T| / (|P| + |T|); 1.0 when both are empty.
double dice(const Volume3& pred, const Volume3& truth);

/// Fraction of centerline length inside `pred`. Each branch is a polyline
/// through its voxels (mm); a segment counts when both of its end voxels are
/// foreground in `pred`.
double tree_detected_rate(const Volume3& pred, const CenterlineRef& ref);

/// Fraction of branches with at least `frac` of their voxels in `pred`.
double branch_detected_rate(const Volume3& pred, const CenterlineRef& ref, double frac = 0.8);

struct BranchDetail {
  int branch = 0;
  std::size_t voxels = 0;
  std::size_t covered = 0;
  double length_mm = 0.0;
  double covered_length_mm = 0.0;
  bool detected = false;
};

struct EvalReport {
  double dice = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::optional<double> tree_detected_rate;
  std::optional<double> branch_detected_rate;
  double branch_frac = 0.8;
  std::vector<BranchDetail> branches;

  /// Deterministic `key = value` lines.
  std::string to_text() const;
};

EvalReport evaluate(const Volume3& pred, const Volume3& truth,
                    const std::optional<CenterlineRef>& ref = std::nullopt, double frac = 0.8);

}  // namespace airway
