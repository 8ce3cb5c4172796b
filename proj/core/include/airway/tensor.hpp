#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace airway::nn {

/// Shape of an N x C x D x H x W tensor; W is the fastest axis.
struct Shape5 {
  std::size_t n = 1, c = 1, d = 1, h = 1, w = 1;

  std::size_t size() const { return n * c * d * h * w; }
  std::size_t spatial() const { return d * h * w; }
  std::string str() const;

  friend bool operator==(const Shape5&, const Shape5&) = default;
};

namespace detail {

struct Node {
  Shape5 shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Handle to a node of a reverse-mode autodiff graph. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape5& shape, bool requires_grad = false);
  static Tensor from_values(const Shape5& shape, std::vector<double> values,
                            bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape5& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  /// Direct write access; intended for leaves (parameters, inputs).
  std::span<double> mutable_values() { return node_->value; }
  /// Empty until backward() has reached this tensor.
  std::span<const double> grad() const { return node_->grad; }
  double item() const;

  /// Reverse sweep from this scalar tensor; gradients accumulate into every
  /// reachable tensor that requires them.
  void backward() const;
  void zero_grad() const { node_->grad.clear(); }

  /// Leaf copy of the values with no graph history.
  Tensor detach(bool requires_grad = false) const;

  /// Internal: build an op result. `backward` is dropped when no parent
  /// requires gradients.
  static Tensor make_result(const Shape5& shape, std::vector<double> values,
                            std::vector<Tensor> parents, std::function<void(detail::Node&)> backward);
  detail::Node& node() const { return *node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Same-padded stride-1 3-D cross-correlation. `weight` is
/// (cout, cin, k, k, k) with odd k; `bias` is (1, cout, 1, 1, 1).
Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Per-window max over factor^3 blocks; ties go to the first voxel of the
/// window in linear order. Spatial dims must be divisible by `factor`.
Tensor maxpool3d(const Tensor& x, std::size_t factor);

/// Nearest-neighbor upsampling by an integer factor along d, h, w.
Tensor upsample_nn(const Tensor& x, std::size_t factor);

/// Concatenation along the channel axis; all other dims must agree.
Tensor concat_channels(const std::vector<Tensor>& xs);

Tensor sum(const Tensor& x);

/// sum_i weights[i] * x[i]; a random projection for gradient checks.
Tensor weighted_sum(const Tensor& x, std::span<const double> weights);

/// Soft-Dice term 1 - (2 sum(p g) + eps) / (sum p + sum g + eps).
Tensor soft_dice_loss(const Tensor& pred, const Tensor& truth, double eps = 1e-5);

/// Binary cross-entropy averaged over voxels; probabilities are clamped to
/// [1e-12, 1 - 1e-12] inside the logarithms.
Tensor bce_loss(const Tensor& pred, const Tensor& truth);

/// Segmentation loss: soft Dice + BCE. `truth` must be binary.
Tensor segmentation_loss(const Tensor& pred, const Tensor& truth);

Tensor add(const Tensor& a, const Tensor& b);

}  // namespace airway::nn
