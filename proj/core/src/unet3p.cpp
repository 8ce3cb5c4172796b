#include "airway/unet3p.hpp"

#include <cmath>
#include <cstring>

#include "airway/error.hpp"

namespace airway::nn {

void NetSpec::validate() const {
  if (levels < 1 || levels > 8) throw ValidationError("net: levels must be in [1, 8]");
  if (base_channels < 1) throw ValidationError("net: base_channels must be >= 1");
  if (skip_channels < 1) throw ValidationError("net: skip_channels must be >= 1");
  if (in_channels != 2) throw ValidationError("net: dual-channel input required (in_channels = 2)");
  if (out_channels != 1) throw ValidationError("net: out_channels must be 1");
}

namespace {

Shape5 kernel(int cout, int cin, int k) {
  return {static_cast<std::size_t>(cout), static_cast<std::size_t>(cin),
          static_cast<std::size_t>(k), static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
}

Shape5 bias(int cout) { return {1, static_cast<std::size_t>(cout), 1, 1, 1}; }

std::string prefix_dec(int d) { return "dec" + std::to_string(d); }
std::string prefix_enc(int s) { return "enc" + std::to_string(s); }

/// Channels of the feature map decoder scale `d` draws from source scale `s`.
int source_channels(const NetSpec& spec, int d, int s) {
  if (s <= d || s == spec.levels) return spec.encoder_channels(s);
  return spec.fused_channels();
}

/// Uniform doubles in [0, 1) from the top 53 bits of a splitmix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace

std::vector<LayerShape> unet3p_inventory(const NetSpec& spec) {
  spec.validate();
  std::vector<LayerShape> out;
  auto conv = [&](const std::string& name, int cout, int cin, int k) {
    out.push_back({name + ".weight", kernel(cout, cin, k)});
    out.push_back({name + ".bias", bias(cout)});
  };
  const int L = spec.levels;
  for (int s = 0; s <= L; ++s) {
    const int cin = s == 0 ? spec.in_channels : spec.encoder_channels(s - 1);
    conv(prefix_enc(s) + ".conv0", spec.encoder_channels(s), cin, 3);
    conv(prefix_enc(s) + ".conv1", spec.encoder_channels(s), spec.encoder_channels(s), 3);
  }
  for (int d = L - 1; d >= 0; --d) {
    for (int s = 0; s <= L; ++s) {
      conv(prefix_dec(d) + ".src" + std::to_string(s), spec.skip_channels,
           source_channels(spec, d, s), 3);
    }
    conv(prefix_dec(d) + ".fuse", spec.fused_channels(), spec.fused_channels(), 3);
  }
  conv("head", spec.out_channels, spec.fused_channels(), 1);
  return out;
}

NetParams::NetParams(NetSpec spec, std::uint64_t seed, std::vector<NamedTensor> tensors)
    : spec_(spec), seed_(seed), tensors_(std::move(tensors)) {
  const auto inv = unet3p_inventory(spec_);
  if (inv.size() != tensors_.size()) {
    throw ValidationError("net params: expected " + std::to_string(inv.size()) + " tensors, got " +
                          std::to_string(tensors_.size()));
  }
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (inv[i].name != tensors_[i].name || !(inv[i].shape == tensors_[i].value.shape())) {
      throw ShapeError("net params: layer " + tensors_[i].name + " " +
                       tensors_[i].value.shape().str() + " does not match expected " + inv[i].name +
                       " " + inv[i].shape.str());
    }
  }
}

const Tensor& NetParams::get(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw ValidationError("net params: no layer named " + std::string(name));
}

std::size_t NetParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

NetParams NetParams::clone() const {
  std::vector<NamedTensor> copy;
  copy.reserve(tensors_.size());
  for (const auto& t : tensors_) copy.push_back({t.name, t.value.detach(true)});
  return NetParams(spec_, seed_, std::move(copy));
}

bool operator==(const NetParams& a, const NetParams& b) {
  if (!(a.spec_ == b.spec_) || a.tensors_.size() != b.tensors_.size()) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    const auto va = a.tensors_[i].value.values();
    const auto vb = b.tensors_[i].value.values();
    if (a.tensors_[i].name != b.tensors_[i].name || va.size() != vb.size() ||
        std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

InitScheme parse_init_scheme(std::string_view s) {
  if (s == "fan_in") return InitScheme::FanIn;
  if (s == "he") return InitScheme::He;
  throw ValidationError("unknown init scheme '" + std::string(s) + "' (expected fan_in or he)");
}

std::string_view to_string(InitScheme s) { return s == InitScheme::FanIn ? "fan_in" : "he"; }

NetParams build_unet3p(const NetSpec& spec, std::uint64_t seed, InitScheme init) {
  const double gain = init == InitScheme::He ? 6.0 : 1.0;
  SplitMix64 rng(seed);
  std::vector<NamedTensor> tensors;
  for (const auto& layer : unet3p_inventory(spec)) {
    std::vector<double> v(layer.shape.size(), 0.0);
    if (layer.name.ends_with(".weight")) {
      const double fan_in = static_cast<double>(layer.shape.c * layer.shape.spatial());
      const double bound = std::sqrt(gain / fan_in);
      for (auto& w : v) w = (2.0 * rng.uniform() - 1.0) * bound;
    }
    tensors.push_back({layer.name, Tensor::from_values(layer.shape, std::move(v), true)});
  }
  return NetParams(spec, seed, std::move(tensors));
}

namespace {

Tensor conv_layer(const NetParams& p, const std::string& name, const Tensor& x) {
  return conv3d(x, p.get(name + ".weight"), p.get(name + ".bias"));
}

Tensor conv_relu(const NetParams& p, const std::string& name, const Tensor& x) {
  return relu(conv_layer(p, name, x));
}

}  // namespace

Tensor forward(const NetParams& params, const Tensor& x) {
  const auto& spec = params.spec();
  const auto& s = x.shape();
  if (s.c != static_cast<std::size_t>(spec.in_channels)) {
    throw ShapeError("forward: dual-channel input required, got " + s.str());
  }
  const auto div = spec.divisor();
  if (s.d % div || s.h % div || s.w % div) {
    throw ShapeError("forward: spatial dims of " + s.str() + " must be divisible by " +
                     std::to_string(div));
  }
  const int L = spec.levels;

  std::vector<Tensor> enc(static_cast<std::size_t>(L + 1));
  Tensor h = x;
  for (int sc = 0; sc <= L; ++sc) {
    if (sc > 0) h = maxpool3d(enc[static_cast<std::size_t>(sc - 1)], 2);
    h = conv_relu(params, prefix_enc(sc) + ".conv0", h);
    h = conv_relu(params, prefix_enc(sc) + ".conv1", h);
    enc[static_cast<std::size_t>(sc)] = h;
  }

  std::vector<Tensor> dec(static_cast<std::size_t>(L + 1));
  dec[static_cast<std::size_t>(L)] = enc[static_cast<std::size_t>(L)];
  for (int d = L - 1; d >= 0; --d) {
    std::vector<Tensor> parts;
    parts.reserve(static_cast<std::size_t>(L + 1));
    for (int sc = 0; sc <= L; ++sc) {
      Tensor src;
      if (sc <= d) {
        src = maxpool3d(enc[static_cast<std::size_t>(sc)], std::size_t{1} << (d - sc));
      } else {
        src = upsample_nn(dec[static_cast<std::size_t>(sc)], std::size_t{1} << (sc - d));
      }
      parts.push_back(conv_relu(params, prefix_dec(d) + ".src" + std::to_string(sc), src));
    }
    dec[static_cast<std::size_t>(d)] =
        conv_relu(params, prefix_dec(d) + ".fuse", concat_channels(parts));
  }
  return sigmoid(conv_layer(params, "head", dec[0]));
}

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

}  // namespace

Tensor stack_channels(const Volume3& ct, const Volume3& vessel, std::size_t divisor,
                      double window_lo, double window_hi) {
  if (ct.grid().dims != vessel.grid().dims || ct.grid().spacing != vessel.grid().spacing) {
    throw ValidationError("infer: ct and vesselness volumes must share dims and spacing");
  }
  const auto norm = normalize_ct(ct, window_lo, window_hi);
  const auto& dims = ct.dims();
  const Shape5 shape{1, 2, round_up(dims[2], divisor), round_up(dims[1], divisor),
                     round_up(dims[0], divisor)};
  std::vector<double> v(shape.size(), 0.0);
  const std::size_t S = shape.spatial();
  for (std::size_t z = 0; z < dims[2]; ++z) {
    for (std::size_t y = 0; y < dims[1]; ++y) {
      for (std::size_t x = 0; x < dims[0]; ++x) {
        const std::size_t src = ct.grid().linear(x, y, z);
        const std::size_t dst = (z * shape.h + y) * shape.w + x;
        v[dst] = norm[src];
        v[S + dst] = vessel[src];
      }
    }
  }
  return Tensor::from_values(shape, std::move(v));
}

namespace {

std::vector<double> probabilities(const NetParams& params, const Volume3& ct,
                                  const Volume3& vessel, double window_lo, double window_hi) {
  const auto x = stack_channels(ct, vessel, params.spec().divisor(), window_lo, window_hi);
  const auto y = forward(params, x);
  const auto& shape = y.shape();
  const auto& dims = ct.dims();
  std::vector<double> out(ct.size());
  const auto pv = y.values();
  for (std::size_t z = 0; z < dims[2]; ++z) {
    for (std::size_t yy = 0; yy < dims[1]; ++yy) {
      for (std::size_t xx = 0; xx < dims[0]; ++xx) {
        out[ct.grid().linear(xx, yy, z)] = pv[(z * shape.h + yy) * shape.w + xx];
      }
    }
  }
  return out;
}

}  // namespace

Volume3 predict_probabilities(const NetParams& params, const Volume3& ct, const Volume3& vessel,
                              double window_lo, double window_hi) {
  return Volume3(ct.grid(), ElementKind::Float32,
                 probabilities(params, ct, vessel, window_lo, window_hi));
}

Volume3 infer(const NetParams& params, const Volume3& ct, const Volume3& vessel, double threshold,
              double window_lo, double window_hi) {
  const auto prob = probabilities(params, ct, vessel, window_lo, window_hi);
  return make_mask(ct.grid(), [&](std::size_t i) { return prob[i] > threshold; });
}

}  // namespace airway::nn
