#include "airway/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "airway/error.hpp"

namespace airway {

CenterlineRef::CenterlineRef(Grid grid, std::vector<CenterlineVoxel> voxels)
    : grid_(grid), voxels_(std::move(voxels)) {
  std::set<std::size_t> seen;
  for (const auto& v : voxels_) {
    if (v.branch <= 0) throw ValidationError("centerline: branch ids must be positive");
    if (!grid_.contains(v.voxel)) {
      throw ValidationError("centerline: voxel (" + std::to_string(v.voxel.x) + ", " +
                            std::to_string(v.voxel.y) + ", " + std::to_string(v.voxel.z) +
                            ") is out of bounds");
    }
    const auto lin = grid_.linear(static_cast<std::size_t>(v.voxel.x),
                                  static_cast<std::size_t>(v.voxel.y),
                                  static_cast<std::size_t>(v.voxel.z));
    if (!seen.insert(lin).second) {
      throw ValidationError("centerline: duplicate voxel (" + std::to_string(v.voxel.x) + ", " +
                            std::to_string(v.voxel.y) + ", " + std::to_string(v.voxel.z) + ")");
    }
  }
}

std::map<int, std::vector<Index3>> CenterlineRef::branches() const {
  std::map<int, std::vector<Index3>> out;
  for (const auto& v : voxels_) out[v.branch].push_back(v.voxel);
  return out;
}

CenterlineRef read_centerline(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<CenterlineVoxel> voxels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    CenterlineVoxel v;
    if (!(ls >> v.voxel.x)) continue;
    std::string rest;
    if (!(ls >> v.voxel.y >> v.voxel.z >> v.branch) || (ls >> rest)) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected 'ix iy iz branch_id'");
    }
    voxels.push_back(v);
  }
  return CenterlineRef(grid, std::move(voxels));
}

void write_centerline(const CenterlineRef& ref, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "# ix iy iz branch_id\n";
  for (const auto& v : ref.voxels()) {
    out << v.voxel.x << ' ' << v.voxel.y << ' ' << v.voxel.z << ' ' << v.branch << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

namespace {

bool inside(const Volume3& pred, const Index3& p) {
  return pred.at(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y),
                 static_cast<std::size_t>(p.z)) != 0.0;
}

double segment_mm(const Grid& g, const Index3& a, const Index3& b) {
  const double dx = static_cast<double>(b.x - a.x) * g.spacing[0];
  const double dy = static_cast<double>(b.y - a.y) * g.spacing[1];
  const double dz = static_cast<double>(b.z - a.z) * g.spacing[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void check_reference(const Volume3& pred, const CenterlineRef& ref, const char* what) {
  require_binary(pred, what);
  if (ref.empty()) throw ValidationError(std::string(what) + ": centerline is empty");
  if (ref.grid().dims != pred.dims()) {
    throw ValidationError(std::string(what) + ": centerline dims differ from prediction dims");
  }
}

std::vector<BranchDetail> branch_details(const Volume3& pred, const CenterlineRef& ref,
                                         double frac) {
  std::vector<BranchDetail> out;
  for (const auto& [id, pts] : ref.branches()) {
    BranchDetail b;
    b.branch = id;
    b.voxels = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const bool in_a = inside(pred, pts[i]);
      b.covered += in_a;
      if (i + 1 < pts.size()) {
        const double len = segment_mm(ref.grid(), pts[i], pts[i + 1]);
        b.length_mm += len;
        if (in_a && inside(pred, pts[i + 1])) b.covered_length_mm += len;
      }
    }
    // Tolerance absorbs frac * n rounding at exact thresholds (8 of 10 at 0.8).
    b.detected = static_cast<double>(b.covered) >= frac * static_cast<double>(b.voxels) - 1e-9;
    out.push_back(b);
  }
  return out;
}

void check_frac(double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw ValidationError("branch_detected_rate: frac must be in (0, 1]");
  }
}

double td_from(const std::vector<BranchDetail>& details) {
  double total = 0.0, hit = 0.0;
  for (const auto& b : details) {
    total += b.length_mm;
    hit += b.covered_length_mm;
  }
  if (!(total > 0.0)) throw ValidationError("tree_detected_rate: centerline has zero length");
  return hit / total;
}

double bd_from(const std::vector<BranchDetail>& details) {
  std::size_t hit = 0;
  for (const auto& b : details) hit += b.detected;
  return static_cast<double>(hit) / static_cast<double>(details.size());
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

double dice(const Volume3& pred, const Volume3& truth) {
  require_same_dims(pred, truth, "dice");
  require_binary(pred, "dice prediction");
  require_binary(truth, "dice truth");
  std::size_t inter = 0, np = 0, nt = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] != 0.0, b = truth[i] != 0.0;
    np += a;
    nt += b;
    inter += a && b;
  }
  if (np + nt == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

double tree_detected_rate(const Volume3& pred, const CenterlineRef& ref) {
  check_reference(pred, ref, "tree_detected_rate");
  return td_from(branch_details(pred, ref, 1.0));
}

double branch_detected_rate(const Volume3& pred, const CenterlineRef& ref, double frac) {
  check_frac(frac);
  check_reference(pred, ref, "branch_detected_rate");
  return bd_from(branch_details(pred, ref, frac));
}

EvalReport evaluate(const Volume3& pred, const Volume3& truth,
                    const std::optional<CenterlineRef>& ref, double frac) {
  EvalReport r;
  r.dice = dice(pred, truth);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] != 0.0, b = truth[i] != 0.0;
    r.true_positive += a && b;
    r.false_positive += a && !b;
    r.false_negative += !a && b;
  }
  r.branch_frac = frac;
  if (ref) {
    check_frac(frac);
    check_reference(pred, *ref, "evaluate");
    r.branches = branch_details(pred, *ref, frac);
    r.tree_detected_rate = td_from(r.branches);
    r.branch_detected_rate = bd_from(r.branches);
  }
  return r;
}

std::string EvalReport::to_text() const {
  std::ostringstream s;
  s << "dice = " << fmt(dice) << '\n'
    << "true_positive = " << true_positive << '\n'
    << "false_positive = " << false_positive << '\n'
    << "false_negative = " << false_negative << '\n';
  if (tree_detected_rate && branch_detected_rate) {
    s << "tree_detected_rate = " << fmt(*tree_detected_rate) << '\n'
      << "branch_detected_rate = " << fmt(*branch_detected_rate) << '\n'
      << "branch_frac = " << fmt(branch_frac) << '\n'
      << "branch_count = " << branches.size() << '\n';
    for (const auto& b : branches) {
      const std::string key = "branch." + std::to_string(b.branch);
      s << key << ".voxels = " << b.voxels << '\n'
        << key << ".covered = " << b.covered << '\n'
        << key << ".length_mm = " << fmt(b.length_mm) << '\n'
        << key << ".covered_length_mm = " << fmt(b.covered_length_mm) << '\n'
        << key << ".detected = " << (b.detected ? "true" : "false") << '\n';
    }
  } else {
    s << "tree_detected_rate = absent\n"
      << "branch_detected_rate = absent\n";
  }
  return s.str();
}

}  // namespace airway
