#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "airway/tensor.hpp"
#include "airway/volume.hpp"

namespace airway::nn {

inline constexpr std::string_view kParamsFormatVersion = "unet3p-v1";

/// Dual-channel UNet 3+ configuration. Encoder scale i (0..levels-1) has
/// base_channels * 2^i channels, the bottleneck (scale `levels`)
/// base_channels * 2^levels. Each decoder scale aggregates levels + 1
/// sources, each resized and projected to skip_channels.
struct NetSpec {
  int levels = 4;
  int base_channels = 4;
  int skip_channels = 4;
  int in_channels = 2;
  int out_channels = 1;

  void validate() const;
  int encoder_channels(int scale) const { return base_channels << scale; }
  int fused_channels() const { return (levels + 1) * skip_channels; }
  /// Spatial dims must be multiples of this.
  std::size_t divisor() const { return std::size_t{1} << levels; }

  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct LayerShape {
  std::string name;
  Shape5 shape;
};

/// Every learnable tensor in construction order. Names:
///   enc{s}.conv{0,1}.{weight,bias}   s = 0..levels (levels is the bottleneck)
///   dec{d}.src{s}.{weight,bias}      d = 0..levels-1, s = 0..levels
///   dec{d}.fuse.{weight,bias}
///   head.{weight,bias}               1x1x1 projection to out_channels
std::vector<LayerShape> unet3p_inventory(const NetSpec& spec);

struct NamedTensor {
  std::string name;
  Tensor value;
};

class NetParams {
 public:
  NetParams() = default;
  NetParams(NetSpec spec, std::uint64_t seed, std::vector<NamedTensor> tensors);

  const NetSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  const Tensor& get(std::string_view name) const;
  std::size_t parameter_count() const;

  /// Independent copy of all values (fresh leaves requiring gradients).
  NetParams clone() const;

  /// Bitwise equality of spec and values.
  friend bool operator==(const NetParams& a, const NetParams& b);

 private:
  NetSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<NamedTensor> tensors_;
};

/// Weight bound: FanIn is sqrt(1 / fan_in), He is sqrt(6 / fan_in), with
/// fan_in = cin * k^3.
enum class InitScheme { FanIn, He };

InitScheme parse_init_scheme(std::string_view s);
std::string_view to_string(InitScheme s);

/// Weights uniform in +-bound from a SplitMix64 stream seeded by `seed`, biases zero.
NetParams build_unet3p(const NetSpec& spec, std::uint64_t seed,
                       InitScheme init = InitScheme::He);

/// Probabilities (n, out_channels, d, h, w). Throws ShapeError unless the
/// input has in_channels channels and dims divisible by spec.divisor().
Tensor forward(const NetParams& params, const Tensor& x);

/// Stacks [normalize_ct(ct, window), vessel] into a (1, 2, d, h, w) tensor,
/// zero-padding spatial dims up to multiples of `divisor`.
Tensor stack_channels(const Volume3& ct, const Volume3& vessel, std::size_t divisor,
                      double window_lo = kDefaultWindowLo, double window_hi = kDefaultWindowHi);

/// Binary uint8 mask of voxels with probability > threshold.
Volume3 infer(const NetParams& params, const Volume3& ct, const Volume3& vessel,
              double threshold = 0.5, double window_lo = kDefaultWindowLo,
              double window_hi = kDefaultWindowHi);

/// Probability map (float32) cropped back to the input grid.
Volume3 predict_probabilities(const NetParams& params, const Volume3& ct, const Volume3& vessel,
                              double window_lo = kDefaultWindowLo,
                              double window_hi = kDefaultWindowHi);

/// Text manifest (format, spec, one `tensor` line per layer with shape and
/// byte offset) terminated by `end_header`, followed by the little-endian
/// float32 blob.
void save_params(const NetParams& params, const std::filesystem::path& path);
NetParams load_params(const std::filesystem::path& path);

}  // namespace airway::nn
