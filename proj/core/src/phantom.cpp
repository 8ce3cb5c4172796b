#include "airway/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "airway/error.hpp"

namespace airway {

PhantomKind parse_phantom_kind(std::string_view s) {
  if (s == "straight-tube" || s == "tube") return PhantomKind::StraightTube;
  if (s == "bent-tube") return PhantomKind::BentTube;
  if (s == "bifurcation") return PhantomKind::Bifurcation;
  if (s == "blob") return PhantomKind::Blob;
  if (s == "plate") return PhantomKind::Plate;
  throw ValidationError("unknown phantom kind '" + std::string(s) + "'");
}

Profile parse_profile(std::string_view s) {
  if (s == "hard") return Profile::Hard;
  if (s == "gaussian" || s == "gaussian-cross-section") return Profile::Gaussian;
  throw ValidationError("unknown intensity profile '" + std::string(s) + "'");
}

PhantomPolarity parse_phantom_polarity(std::string_view s) {
  if (s == "bright" || s == "bright-on-dark") return PhantomPolarity::BrightOnDark;
  if (s == "dark" || s == "dark-on-bright") return PhantomPolarity::DarkOnBright;
  throw ValidationError("unknown phantom polarity '" + std::string(s) + "'");
}

namespace {

Vec3 extent(const Grid& g) {
  return {static_cast<double>(g.dims[0]) * g.spacing[0],
          static_cast<double>(g.dims[1]) * g.spacing[1],
          static_cast<double>(g.dims[2]) * g.spacing[2]};
}

/// Physical center of the voxel lattice.
Vec3 center(const Grid& g) {
  Vec3 c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = g.origin[a] + 0.5 * static_cast<double>(g.dims[a] - 1) * g.spacing[a];
  }
  return c;
}

Vec3 lattice_max(const Grid& g) {
  Vec3 m{};
  for (int a = 0; a < 3; ++a) {
    m[a] = g.origin[a] + static_cast<double>(g.dims[a] - 1) * g.spacing[a];
  }
  return m;
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = sub(b, a);
  const Vec3 ap = sub(p, a);
  const double len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
  double t = len2 > 0.0 ? (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm({ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]});
}

struct BifurcationNodes {
  Vec3 root, split, left, right;
};

BifurcationNodes bifurcation_nodes(const Grid& g) {
  const Vec3 c = center(g);
  const Vec3 hi = lattice_max(g);
  const double quarter = 0.25 * extent(g)[0];
  return {{c[0], c[1], g.origin[2]},
          c,
          {c[0] - quarter, c[1], hi[2]},
          {c[0] + quarter, c[1], hi[2]}};
}

double bend_radius(const Grid& g) {
  const Vec3 e = extent(g);
  return 0.6 * std::min(e[0], e[2]);
}

}  // namespace

void PhantomSpec::validate() const {
  grid.validate();
  const Vec3 e = extent(grid);
  const double min_extent = std::min({e[0], e[1], e[2]});
  if (!(radius > 0.0) || !(radius < min_extent / 4.0)) {
    throw ValidationError("phantom: radius must satisfy 0 < radius < min extent / 4 (" +
                          std::to_string(min_extent / 4.0) + " mm)");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("phantom: noise sigma must be >= 0");
  if (!std::isfinite(contrast) || !std::isfinite(background)) {
    throw ValidationError("phantom: contrast and background must be finite");
  }
}

double phantom_distance(const PhantomSpec& spec, const Vec3& p) {
  const Grid& g = spec.grid;
  const Vec3 c = center(g);
  switch (spec.kind) {
    case PhantomKind::StraightTube:
      return std::hypot(p[0] - c[0], p[1] - c[1]);
    case PhantomKind::BentTube: {
      const double radial = std::hypot(p[0] - g.origin[0], p[2] - g.origin[2]);
      return std::hypot(radial - bend_radius(g), p[1] - c[1]);
    }
    case PhantomKind::Bifurcation: {
      const auto n = bifurcation_nodes(g);
      return std::min({segment_distance(p, n.root, n.split), segment_distance(p, n.split, n.left),
                       segment_distance(p, n.split, n.right)});
    }
    case PhantomKind::Blob:
      return norm(sub(p, c));
    case PhantomKind::Plate:
      return std::abs(p[2] - c[2]);
  }
  return 0.0;
}

Phantom make_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Grid& g = spec.grid;
  std::vector<double> image(g.voxel_count());
  std::vector<double> mask(g.voxel_count());
  const double sign = spec.polarity == PhantomPolarity::BrightOnDark ? 1.0 : -1.0;
  const double two_r2 = 2.0 * spec.radius * spec.radius;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::size_t i = 0;
  for (std::size_t z = 0; z < g.dims[2]; ++z) {
    for (std::size_t y = 0; y < g.dims[1]; ++y) {
      for (std::size_t x = 0; x < g.dims[0]; ++x, ++i) {
        const double d = phantom_distance(spec, g.position(x, y, z));
        const bool inside = d <= spec.radius;
        const double f = spec.profile == Profile::Hard ? (inside ? 1.0 : 0.0)
                                                       : std::exp(-d * d / two_r2);
        double v = spec.background + sign * spec.contrast * f;
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
        image[i] = v;
        mask[i] = inside ? 1.0 : 0.0;
      }
    }
  }
  return {Volume3(g, ElementKind::Float32, std::move(image)),
          Volume3(g, ElementKind::UInt8, std::move(mask))};
}

std::vector<CenterlinePoint> phantom_centerline(const PhantomSpec& spec) {
  spec.validate();
  const Grid& g = spec.grid;

  std::vector<CenterlinePoint> out;
  std::set<std::size_t> seen;
  auto emit = [&](const Vec3& p, int branch) {
    Index3 v{};
    v.x = std::llround((p[0] - g.origin[0]) / g.spacing[0]);
    v.y = std::llround((p[1] - g.origin[1]) / g.spacing[1]);
    v.z = std::llround((p[2] - g.origin[2]) / g.spacing[2]);
    if (!g.contains(v)) return;
    const auto lin = g.linear(static_cast<std::size_t>(v.x), static_cast<std::size_t>(v.y),
                              static_cast<std::size_t>(v.z));
    if (!seen.insert(lin).second) return;
    out.push_back({v, branch});
  };
  const double step = 0.25 * std::min({g.spacing[0], g.spacing[1], g.spacing[2]});
  auto trace = [&](const Vec3& a, const Vec3& b, int branch) {
    const double len = norm(sub(b, a));
    const auto n = static_cast<std::size_t>(std::ceil(len / step));
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
      emit({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])}, branch);
    }
  };

  switch (spec.kind) {
    case PhantomKind::StraightTube: {
      const Vec3 c = center(g);
      trace({c[0], c[1], g.origin[2]}, {c[0], c[1], lattice_max(g)[2]}, 1);
      break;
    }
    case PhantomKind::BentTube: {
      const double rb = bend_radius(g);
      const double yc = center(g)[1];
      const auto n = static_cast<std::size_t>(std::ceil(0.5 * std::numbers::pi * rb / step));
      for (std::size_t k = 0; k <= n; ++k) {
        const double t = 0.5 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        emit({g.origin[0] + rb * std::cos(t), yc, g.origin[2] + rb * std::sin(t)}, 1);
      }
      break;
    }
    case PhantomKind::Bifurcation: {
      const auto n = bifurcation_nodes(g);
      trace(n.root, n.split, 1);
      trace(n.split, n.left, 2);
      trace(n.split, n.right, 3);
      break;
    }
    case PhantomKind::Blob:
    case PhantomKind::Plate:
      throw ValidationError("phantom: blob and plate phantoms have no centerline");
  }
  return out;
}

}  // namespace airway
