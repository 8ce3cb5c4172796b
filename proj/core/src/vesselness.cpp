#include "airway/vesselness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airway/error.hpp"

namespace airway {

Polarity parse_polarity(std::string_view s) {
  if (s == "bright") return Polarity::Bright;
  if (s == "dark") return Polarity::Dark;
  throw ValidationError("polarity must be 'bright' or 'dark', got '" + std::string(s) + "'");
}

std::string_view to_string(Polarity p) { return p == Polarity::Bright ? "bright" : "dark"; }

void VesselnessParams::validate() const {
  if (scales.empty()) throw ValidationError("vesselness: at least one scale is required");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) {
      throw ValidationError("vesselness: scales must be positive");
    }
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw ValidationError("vesselness: scales must be strictly increasing");
    }
  }
  if (!(alpha > 0.0)) throw ValidationError("vesselness: alpha must be > 0");
  if (!(beta > 0.0)) throw ValidationError("vesselness: beta must be > 0");
  if (c && !(*c > 0.0)) throw ValidationError("vesselness: fixed c must be > 0");
  if (!std::isfinite(gamma)) throw ValidationError("vesselness: gamma must be finite");
}

namespace {

std::vector<double> gaussian_kernel(double sigma_vox) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_vox));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double x = static_cast<double>(i) / sigma_vox;
    const double w = std::exp(-0.5 * x * x);
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

/// Convolves every line along `axis` in place.
void convolve_axis(std::vector<double>& data, const Dims3& dims, int axis,
                   const std::vector<double>& kernel) {
  const auto n = static_cast<std::ptrdiff_t>(dims[axis]);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? dims[0] : dims[0] * dims[1]);
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  const std::size_t s1 = a1 == 0 ? 1 : dims[0];
  const std::size_t s2 = a2 == 1 ? dims[0] : dims[0] * dims[1];

  std::vector<double> line(static_cast<std::size_t>(n + 2 * radius));
  for (std::size_t j = 0; j < dims[a2]; ++j) {
    for (std::size_t i = 0; i < dims[a1]; ++i) {
      const std::size_t base = i * s1 + j * s2;
      for (std::ptrdiff_t t = -radius; t < n + radius; ++t) {
        const auto src = std::clamp<std::ptrdiff_t>(t, 0, n - 1);
        line[static_cast<std::size_t>(t + radius)] = data[base + static_cast<std::size_t>(src) * stride];
      }
      for (std::ptrdiff_t t = 0; t < n; ++t) {
        double acc = 0.0;
        const double* w = kernel.data();
        const double* l = line.data() + t;
        for (std::size_t k = 0; k < kernel.size(); ++k) acc += w[k] * l[k];
        data[base + static_cast<std::size_t>(t) * stride] = acc;
      }
    }
  }
}

std::vector<double> smooth_values(const Volume3& vol, double sigma_mm) {
  if (!(sigma_mm > 0.0) || !std::isfinite(sigma_mm)) {
    throw ValidationError("gaussian_smooth: sigma must be > 0");
  }
  std::vector<double> data(vol.values().begin(), vol.values().end());
  for (int axis = 0; axis < 3; ++axis) {
    convolve_axis(data, vol.dims(), axis, gaussian_kernel(sigma_mm / vol.spacing()[axis]));
  }
  return data;
}

}  // namespace

Volume3 gaussian_smooth(const Volume3& vol, double sigma_mm) {
  return Volume3(vol.grid(), ElementKind::Float64, smooth_values(vol, sigma_mm));
}

HessianField hessian_at_scale(const Volume3& vol, double sigma_mm, double gamma) {
  const auto& d = vol.dims();
  if (d[0] < 5 || d[1] < 5 || d[2] < 5) {
    throw ValidationError("hessian_at_scale: volume too small, every dim must be >= 5");
  }
  const auto f = smooth_values(vol, sigma_mm);
  const auto& sp = vol.spacing();
  const double norm = std::pow(sigma_mm, 2.0 * gamma);

  HessianField h;
  h.grid = vol.grid();
  const std::size_t n = vol.size();
  for (auto* c : {&h.xx, &h.yy, &h.zz, &h.xy, &h.xz, &h.yz}) c->resize(n);

  const double kxx = norm / (sp[0] * sp[0]);
  const double kyy = norm / (sp[1] * sp[1]);
  const double kzz = norm / (sp[2] * sp[2]);
  const double kxy = norm / (4.0 * sp[0] * sp[1]);
  const double kxz = norm / (4.0 * sp[0] * sp[2]);
  const double kyz = norm / (4.0 * sp[1] * sp[2]);

  const std::size_t sx = 1, sy = d[0], sz = d[0] * d[1];
  for (std::size_t z = 0; z < d[2]; ++z) {
    const std::size_t zm = (z > 0 ? z - 1 : z) * sz, z0 = z * sz;
    const std::size_t zp = (z + 1 < d[2] ? z + 1 : z) * sz;
    for (std::size_t y = 0; y < d[1]; ++y) {
      const std::size_t ym = (y > 0 ? y - 1 : y) * sy, y0 = y * sy;
      const std::size_t yp = (y + 1 < d[1] ? y + 1 : y) * sy;
      for (std::size_t x = 0; x < d[0]; ++x) {
        const std::size_t xm = (x > 0 ? x - 1 : x) * sx, x0 = x * sx;
        const std::size_t xp = (x + 1 < d[0] ? x + 1 : x) * sx;
        const std::size_t i = x0 + y0 + z0;
        const double c = f[i];
        h.xx[i] = (f[xp + y0 + z0] - 2.0 * c + f[xm + y0 + z0]) * kxx;
        h.yy[i] = (f[x0 + yp + z0] - 2.0 * c + f[x0 + ym + z0]) * kyy;
        h.zz[i] = (f[x0 + y0 + zp] - 2.0 * c + f[x0 + y0 + zm]) * kzz;
        h.xy[i] = (f[xp + yp + z0] - f[xp + ym + z0] - f[xm + yp + z0] + f[xm + ym + z0]) * kxy;
        h.xz[i] = (f[xp + y0 + zp] - f[xp + y0 + zm] - f[xm + y0 + zp] + f[xm + y0 + zm]) * kxz;
        h.yz[i] = (f[x0 + yp + zp] - f[x0 + yp + zm] - f[x0 + ym + zp] + f[x0 + ym + zm]) * kyz;
      }
    }
  }
  return h;
}

double vesselness_response(const EigenTriple& e, const VesselnessParams& p, double c_effective) {
  if (!(c_effective > 0.0)) throw ValidationError("vesselness_response: c must be > 0");
  const double sign = p.polarity == Polarity::Bright ? 1.0 : -1.0;
  const double l1 = sign * e.l1, l2 = sign * e.l2, l3 = sign * e.l3;
  if (l3 == 0.0) return 0.0;
  if (l2 > 0.0 || l3 > 0.0) return 0.0;
  if (l2 == 0.0) return 0.0;
  const double ra = std::abs(l2) / std::abs(l3);
  const double rb = std::abs(l1) / std::sqrt(std::abs(l2 * l3));
  const double s2 = l1 * l1 + l2 * l2 + l3 * l3;
  return (1.0 - std::exp(-ra * ra / (2.0 * p.alpha * p.alpha))) *
         std::exp(-rb * rb / (2.0 * p.beta * p.beta)) *
         (1.0 - std::exp(-s2 / (2.0 * c_effective * c_effective)));
}

std::vector<EigenTriple> polarity_adjusted_eigenvalues(const HessianField& h, Polarity polarity) {
  std::vector<EigenTriple> out(h.xx.size());
  const double sign = polarity == Polarity::Bright ? 1.0 : -1.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Sym3 m = h.at(i);
    out[i] = eigenvalues_sym3({sign * m.xx, sign * m.yy, sign * m.zz, sign * m.xy, sign * m.xz,
                               sign * m.yz});
  }
  return out;
}

namespace {

double auto_c(const std::vector<EigenTriple>& eig) {
  double smax = 0.0;
  for (const auto& e : eig) smax = std::max(smax, e.s);
  return 0.5 * smax;
}

/// Per-scale response into `out`. An identically zero structureness field
/// under auto-c yields an all-zero response.
void response_at_scale(const Volume3& vol, double sigma, const VesselnessParams& p,
                       std::vector<double>& out) {
  const auto h = hessian_at_scale(vol, sigma, p.gamma);
  const auto eig = polarity_adjusted_eigenvalues(h, p.polarity);
  const double c = p.c ? *p.c : auto_c(eig);
  out.assign(eig.size(), 0.0);
  if (!(c > 0.0)) return;
  VesselnessParams bright = p;
  bright.polarity = Polarity::Bright;
  for (std::size_t i = 0; i < eig.size(); ++i) out[i] = vesselness_response(eig[i], bright, c);
}

}  // namespace

double effective_c(const HessianField& h, const VesselnessParams& p) {
  if (p.c) return *p.c;
  return auto_c(polarity_adjusted_eigenvalues(h, p.polarity));
}

Volume3 vesselness_at_scale(const Volume3& vol, double sigma_mm, const VesselnessParams& p) {
  p.validate();
  std::vector<double> out;
  response_at_scale(vol, sigma_mm, p, out);
  return Volume3(vol.grid(), ElementKind::Float64, std::move(out));
}

Volume3 frangi(const Volume3& vol, const VesselnessParams& p) {
  p.validate();
  std::vector<double> best(vol.size(), 0.0);
  std::vector<double> cur;
  for (const double sigma : p.scales) {
    response_at_scale(vol, sigma, p, cur);
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], cur[i]);
  }
  return Volume3(vol.grid(), ElementKind::Float32, std::move(best));
}

}  // namespace airway
