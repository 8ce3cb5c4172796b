#include "airway/train.hpp"

#include <cmath>

#include "airway/error.hpp"

namespace airway::nn {

TrainResult train_toy(const NetParams& params, const std::vector<TrainingPair>& pairs,
                      const TrainOptions& options) {
  if (pairs.empty()) throw ValidationError("train: at least one training pair is required");
  const auto div = params.spec().divisor();
  for (const auto& p : pairs) {
    const auto& s = p.image.shape();
    if (s.d % div || s.h % div || s.w % div) {
      throw ShapeError("train: spatial dims of " + s.str() + " must be divisible by " +
                       std::to_string(div));
    }
  }
  if (!(options.learning_rate > 0.0)) throw ValidationError("train: learning rate must be > 0");
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw ValidationError("train: momentum must be in [0, 1)");
  }

  TrainResult result{params.clone(), {}};
  auto& tensors = result.params.tensors();
  std::vector<std::vector<double>> velocity;
  for (const auto& t : tensors) velocity.emplace_back(t.value.size(), 0.0);

  const double inv_pairs = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t step = 0; step < options.steps; ++step) {
    for (const auto& t : tensors) t.value.zero_grad();
    double total = 0.0;
    for (const auto& pair : pairs) {
      const auto loss = segmentation_loss(forward(result.params, pair.image), pair.mask);
      total += loss.item();
      loss.backward();
    }
    total *= inv_pairs;
    if (!std::isfinite(total)) {
      throw NumericError("train: loss became non-finite at step " + std::to_string(step));
    }
    result.loss_history.push_back(total);

    for (std::size_t k = 0; k < tensors.size(); ++k) {
      Tensor param = tensors[k].value;
      const auto g = param.grad();
      if (g.empty()) continue;
      auto w = param.mutable_values();
      auto& v = velocity[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = options.momentum * v[i] + g[i] * inv_pairs;
        w[i] -= options.learning_rate * v[i];
      }
    }
    if (options.on_step) options.on_step(step, total);
  }
  for (const auto& t : tensors) t.value.zero_grad();
  return result;
}

TrainingPair make_training_pair(const Volume3& ct, const Volume3& vessel, const Volume3& mask,
                                std::size_t divisor, double window_lo, double window_hi) {
  require_same_dims(ct, mask, "training pair");
  require_binary(mask, "training pair mask");
  const auto& d = ct.dims();
  if (d[0] % divisor || d[1] % divisor || d[2] % divisor) {
    throw ShapeError("training pair: dims must be divisible by " + std::to_string(divisor));
  }
  auto image = stack_channels(ct, vessel, divisor, window_lo, window_hi);
  auto truth = Tensor::from_values({1, 1, d[2], d[1], d[0]},
                                   std::vector<double>(mask.values().begin(), mask.values().end()));
  return {std::move(image), std::move(truth)};
}

double thresholded_dice(const Tensor& prob, const Tensor& truth, double threshold) {
  if (!(prob.shape() == truth.shape())) {
    throw ShapeError("dice: shape mismatch " + prob.shape().str() + " vs " + truth.shape().str());
  }
  std::size_t inter = 0, np = 0, nt = 0;
  const auto p = prob.values();
  const auto t = truth.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] > threshold;
    const bool b = t[i] != 0.0;
    np += a;
    nt += b;
    inter += a && b;
  }
  if (np + nt == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

}  // namespace airway::nn
