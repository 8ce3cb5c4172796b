#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "airway/eigen_sym3.hpp"
#include "airway/tensor.hpp"
#include "airway/volume.hpp"

namespace airway::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("airway_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Grid cube(std::size_t n, double spacing = 1.0) {
  return Grid{{n, n, n}, {spacing, spacing, spacing}, {0.0, 0.0, 0.0}};
}

inline Volume3 random_volume(std::mt19937_64& rng, const Grid& grid, ElementKind kind) {
  std::vector<double> v(grid.voxel_count());
  switch (kind) {
    case ElementKind::UInt8: {
      std::uniform_int_distribution<int> d(0, 255);
      for (auto& x : v) x = d(rng);
      break;
    }
    case ElementKind::Int16: {
      std::uniform_int_distribution<int> d(-32768, 32767);
      for (auto& x : v) x = d(rng);
      break;
    }
    default: {
      std::normal_distribution<double> d(0.0, 1000.0);
      for (auto& x : v) x = d(rng);
      break;
    }
  }
  return Volume3(grid, kind, std::move(v));
}

inline Volume3 random_mask(std::mt19937_64& rng, const Grid& grid, double density) {
  std::bernoulli_distribution b(density);
  return make_mask(grid, [&](std::size_t) { return b(rng); });
}

inline std::vector<Index3> neighbors26(const Grid& g, const Index3& p) {
  std::vector<Index3> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy && !dz) continue;
        const Index3 q{p.x + dx, p.y + dy, p.z + dz};
        if (g.contains(q)) out.push_back(q);
      }
  return out;
}

inline std::size_t linear(const Grid& g, const Index3& p) {
  return g.linear(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y),
                  static_cast<std::size_t>(p.z));
}

/// Breadth-first flood fill over 26-neighbors.
inline std::vector<bool> bfs_component(const Volume3& mask, const Index3& seed) {
  const auto& g = mask.grid();
  std::vector<bool> seen(g.voxel_count(), false);
  if (mask[linear(g, seed)] == 0.0) return seen;
  std::deque<Index3> q{seed};
  seen[linear(g, seed)] = true;
  while (!q.empty()) {
    const auto p = q.front();
    q.pop_front();
    for (const auto& n : neighbors26(g, p)) {
      const auto i = linear(g, n);
      if (!seen[i] && mask[i] != 0.0) {
        seen[i] = true;
        q.push_back(n);
      }
    }
  }
  return seen;
}

/// Union-find labeling of every 26-connected component. Labels are the
/// component root's smallest linear index; background is -1.
struct Labeling {
  std::vector<std::int64_t> label;
  std::vector<std::size_t> size_of;  // indexed by label
};

inline Labeling label_components(const Volume3& mask) {
  const auto& g = mask.grid();
  const auto n = g.voxel_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0) continue;
    for (const auto& q : neighbors26(g, g.unravel(i))) {
      const auto j = linear(g, q);
      if (mask[j] == 0.0) continue;
      auto a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  Labeling out{std::vector<std::int64_t>(n, -1), std::vector<std::size_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0) continue;
    const auto r = find(i);
    out.label[i] = static_cast<std::int64_t>(r);
    ++out.size_of[r];
  }
  return out;
}

/// Largest component by brute-force labeling; ties to the smallest label.
inline std::vector<bool> largest_component_oracle(const Volume3& mask) {
  const auto lab = label_components(mask);
  std::int64_t best = -1;
  std::size_t best_size = 0;
  for (std::size_t r = 0; r < lab.size_of.size(); ++r) {
    if (lab.size_of[r] > best_size) {
      best_size = lab.size_of[r];
      best = static_cast<std::int64_t>(r);
    }
  }
  std::vector<bool> out(lab.label.size(), false);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = best >= 0 && lab.label[i] == best;
  return out;
}

inline std::vector<bool> as_bits(const Volume3& v) {
  std::vector<bool> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0;
  return out;
}

/// Roots of det(A - t I) by bisection in long double, ascending. The two
/// critical points of the cubic separate its three real roots.
inline std::array<double, 3> bisection_eigenvalues(const Sym3& a) {
  using LD = long double;
  const LD xx = a.xx, yy = a.yy, zz = a.zz, xy = a.xy, xz = a.xz, yz = a.yz;
  const LD c2 = xx + yy + zz;
  const LD c1 = xx * yy + xx * zz + yy * zz - xy * xy - xz * xz - yz * yz;
  const LD c0 = xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz);
  // p(t) = -t^3 + c2 t^2 - c1 t + c0, decreasing at both ends.
  auto p = [&](LD t) { return ((-t + c2) * t - c1) * t + c0; };
  LD bound = 0;
  for (LD r : {std::fabs(xx) + std::fabs(xy) + std::fabs(xz),
               std::fabs(xy) + std::fabs(yy) + std::fabs(yz),
               std::fabs(xz) + std::fabs(yz) + std::fabs(zz)}) {
    bound = std::max(bound, r);
  }
  bound = bound * 1.01L + 1e-300L;
  // p'(t) = -3t^2 + 2 c2 t - c1
  LD disc = c2 * c2 - 3 * c1;
  if (disc < 0) disc = 0;
  const LD r1 = (c2 - std::sqrt(disc)) / 3, r2 = (c2 + std::sqrt(disc)) / 3;
  auto solve = [&](LD lo, LD hi) {
    LD plo = p(lo);
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const LD mid = (lo + hi) / 2;
      if (mid == lo || mid == hi) break;
      const LD pm = p(mid);
      if ((pm > 0) == (plo > 0) && pm != 0) {
        lo = mid;
        plo = pm;
      } else {
        hi = mid;
      }
    }
    return static_cast<double>((lo + hi) / 2);
  };
  return {solve(-bound, r1), solve(r1, r2), solve(r2, bound)};
}

inline Sym3 random_sym3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

/// Central finite differences of `f` against reverse-mode gradients for up to
/// `samples` random coordinates of each leaf. Relative error uses
/// max(|analytic|, |numeric|, floor) as the denominator.
inline GradCheck check_gradients(const std::function<nn::Tensor()>& f,
                                 std::vector<nn::Tensor> leaves, std::size_t samples,
                                 std::uint64_t seed, double step = 1e-5, double floor = 1e-6) {
  for (auto& l : leaves) l.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& l : leaves) {
    const auto g = l.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(l.size(), 0.0);
  }
  std::mt19937_64 rng(seed);
  GradCheck out;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    auto& leaf = leaves[k];
    std::vector<std::size_t> idx(leaf.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(samples, idx.size()));
    for (const auto i : idx) {
      auto v = leaf.mutable_values();
      const double orig = v[i];
      v[i] = orig + step;
      const double fp = f().item();
      v[i] = orig - step;
      const double fm = f().item();
      v[i] = orig;
      const double numeric = (fp - fm) / (2 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, std::fabs(a - numeric) / denom);
      ++out.coordinates;
    }
  }
  return out;
}

/// Values bounded away from zero and pairwise separated, so ReLU kinks and
/// max-pool ties stay outside a finite-difference step.
inline std::vector<double> separated_values(std::mt19937_64& rng, std::size_t n,
                                            double spacing = 1e-3) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = spacing * static_cast<double>(i + 1);
    v[i] = (i % 2 ? -mag : mag);
  }
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo,
                                          double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace airway::testing
