#include "airway/eigen_sym3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "airway/error.hpp"

namespace airway {

double Sym3::frobenius() const {
  return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
}

namespace {

using V3 = std::array<double, 3>;

V3 cross(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
V3 scale(const V3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
V3 normalize(const V3& a) { return scale(a, 1.0 / std::sqrt(dot(a, a))); }

/// Unit vectors u, v completing w to a right-handed orthonormal basis.
void complement_basis(const V3& w, V3& u, V3& v) {
  if (std::abs(w[0]) > std::abs(w[1])) {
    u = scale({-w[2], 0.0, w[0]}, 1.0 / std::sqrt(w[0] * w[0] + w[2] * w[2]));
  } else {
    u = scale({0.0, w[2], -w[1]}, 1.0 / std::sqrt(w[1] * w[1] + w[2] * w[2]));
  }
  v = cross(w, u);
}

V3 mul(const Sym3& a, const V3& x) {
  return {a.xx * x[0] + a.xy * x[1] + a.xz * x[2], a.xy * x[0] + a.yy * x[1] + a.yz * x[2],
          a.xz * x[0] + a.yz * x[1] + a.zz * x[2]};
}

/// Ascending eigenvalues of a matrix already scaled to max |entry| = 1.
std::array<double, 3> ascending_eigenvalues(const Sym3& a) {
  const double off = a.xy * a.xy + a.xz * a.xz + a.yz * a.yz;
  std::array<double, 3> ev{};
  if (off == 0.0) {
    ev = {a.xx, a.yy, a.zz};
    std::sort(ev.begin(), ev.end());
    return ev;
  }
  const double q = (a.xx + a.yy + a.zz) / 3.0;
  const double bxx = a.xx - q, byy = a.yy - q, bzz = a.zz - q;
  const double p = std::sqrt((bxx * bxx + byy * byy + bzz * bzz + 2.0 * off) / 6.0);
  const double inv_p = 1.0 / p;
  const double cxx = bxx * inv_p, cyy = byy * inv_p, czz = bzz * inv_p;
  const double cxy = a.xy * inv_p, cxz = a.xz * inv_p, cyz = a.yz * inv_p;
  const double det = cxx * (cyy * czz - cyz * cyz) - cxy * (cxy * czz - cyz * cxz) +
                     cxz * (cxy * cyz - cyy * cxz);
  const double half_det = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(half_det) / 3.0;
  const double big = q + 2.0 * p * std::cos(phi);
  const double small = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double mid = 3.0 * q - big - small;
  ev = {small, mid, big};
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Eigenvector for eigenvalue `lambda` from the largest cross product of the
/// rows of A - lambda I. Valid when lambda has multiplicity one.
V3 eigenvector_simple(const Sym3& a, double lambda) {
  const V3 r0{a.xx - lambda, a.xy, a.xz};
  const V3 r1{a.xy, a.yy - lambda, a.yz};
  const V3 r2{a.xz, a.yz, a.zz - lambda};
  const V3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
  const double d01 = dot(c01, c01), d02 = dot(c02, c02), d12 = dot(c12, c12);
  if (d01 >= d02 && d01 >= d12 && d01 > 0.0) return scale(c01, 1.0 / std::sqrt(d01));
  if (d02 >= d12 && d02 > 0.0) return scale(c02, 1.0 / std::sqrt(d02));
  if (d12 > 0.0) return scale(c12, 1.0 / std::sqrt(d12));
  return {1.0, 0.0, 0.0};
}

/// Eigenvector for `lambda` inside span{u, v}, the complement of a known
/// eigenvector. Solves the 2x2 projected problem robustly.
V3 eigenvector_in_plane(const Sym3& a, const V3& u, const V3& v, double lambda) {
  const V3 au = mul(a, u), av = mul(a, v);
  const double m00 = dot(u, au) - lambda;
  const double m01 = dot(u, av);
  const double m11 = dot(v, av) - lambda;
  const double a00 = std::abs(m00), a01 = std::abs(m01), a11 = std::abs(m11);
  if (a00 >= a11) {
    const double mx = std::max(a00, a01);
    if (mx > 0.0) {
      if (a00 >= a01) {
        const double t = m01 / m00;
        const double s = 1.0 / std::sqrt(1.0 + t * t);
        return normalize({s * (-t * u[0] + v[0]), s * (-t * u[1] + v[1]), s * (-t * u[2] + v[2])});
      }
      const double t = m00 / m01;
      const double s = 1.0 / std::sqrt(1.0 + t * t);
      return normalize({s * (u[0] - t * v[0]), s * (u[1] - t * v[1]), s * (u[2] - t * v[2])});
    }
    return u;
  }
  const double mx = std::max(a11, a01);
  if (mx > 0.0) {
    if (a11 >= a01) {
      const double t = m01 / m11;
      const double s = 1.0 / std::sqrt(1.0 + t * t);
      return normalize({s * (u[0] - t * v[0]), s * (u[1] - t * v[1]), s * (u[2] - t * v[2])});
    }
    const double t = m11 / m01;
    const double s = 1.0 / std::sqrt(1.0 + t * t);
    return normalize({s * (-t * u[0] + v[0]), s * (-t * u[1] + v[1]), s * (-t * u[2] + v[2])});
  }
  return u;
}

double max_abs_entry(const Sym3& a) {
  return std::max({std::abs(a.xx), std::abs(a.yy), std::abs(a.zz), std::abs(a.xy),
                   std::abs(a.xz), std::abs(a.yz)});
}

Sym3 scaled(const Sym3& a, double k) {
  return {a.xx * k, a.yy * k, a.zz * k, a.xy * k, a.xz * k, a.yz * k};
}

EigenTriple order_by_magnitude(std::array<double, 3> ev, double unscale,
                               std::array<int, 3>* order = nullptr) {
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return std::abs(ev[i]) < std::abs(ev[j]); });
  if (order) *order = idx;
  EigenTriple t;
  t.l1 = ev[idx[0]] * unscale;
  t.l2 = ev[idx[1]] * unscale;
  t.l3 = ev[idx[2]] * unscale;
  t.s = std::sqrt(t.l1 * t.l1 + t.l2 * t.l2 + t.l3 * t.l3);
  return t;
}

}  // namespace

EigenTriple eigenvalues_sym3(const Sym3& a) {
  const double m = max_abs_entry(a);
  if (m == 0.0 || !std::isfinite(m)) {
    if (!std::isfinite(m)) throw NumericError("eig_sym3: non-finite matrix entry");
    return {};
  }
  return order_by_magnitude(ascending_eigenvalues(scaled(a, 1.0 / m)), m);
}

EigenSystem eig_sym3(const Sym3& a) {
  EigenSystem sys;
  const double m = max_abs_entry(a);
  if (!std::isfinite(m)) throw NumericError("eig_sym3: non-finite matrix entry");
  if (m == 0.0) {
    sys.vectors = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    return sys;
  }
  const Sym3 b = scaled(a, 1.0 / m);
  const auto ev = ascending_eigenvalues(b);

  // The extreme eigenvalue farther from the middle one is simple unless all
  // three coincide; solve for it first.
  std::array<V3, 3> vec{};
  const bool low_first = (ev[1] - ev[0]) > (ev[2] - ev[1]);
  const int first = low_first ? 0 : 2;
  const int second = 1;
  const int third = low_first ? 2 : 0;
  if (ev[2] - ev[0] == 0.0) {
    vec = {V3{1.0, 0.0, 0.0}, V3{0.0, 1.0, 0.0}, V3{0.0, 0.0, 1.0}};
  } else {
    vec[first] = eigenvector_simple(b, ev[first]);
    V3 u, v;
    complement_basis(vec[first], u, v);
    vec[second] = eigenvector_in_plane(b, u, v, ev[second]);
    vec[third] = low_first ? cross(vec[first], vec[second]) : cross(vec[second], vec[first]);
  }

  std::array<int, 3> order{};
  sys.values = order_by_magnitude(ev, m, &order);
  for (int k = 0; k < 3; ++k) sys.vectors[k] = vec[order[k]];
  return sys;
}

EigenSystem eig_sym3(const Mat3& a) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (!(std::abs(a[i][j] - a[j][i]) <= 1e-12)) {
        throw ValidationError("eig_sym3: matrix is not symmetric");
      }
    }
  }
  return eig_sym3(Sym3{a[0][0], a[1][1], a[2][2], a[0][1], a[0][2], a[1][2]});
}

}  // namespace airway
