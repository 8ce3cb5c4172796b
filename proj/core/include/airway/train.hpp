#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "airway/unet3p.hpp"

namespace airway::nn {

/// One training example: (1, 2, d, h, w) input and (1, 1, d, h, w) binary mask.
struct TrainingPair {
  Tensor image;
  Tensor mask;
};

struct TrainOptions {
  std::size_t steps = 500;
  double learning_rate = 0.05;
  /// Heavy-ball momentum; 0 gives plain gradient descent.
  double momentum = 0.9;
  /// Called after every step with (step index, loss).
  std::function<void(std::size_t, double)> on_step;
};

struct TrainResult {
  NetParams params;
  std::vector<double> loss_history;
};

/// Full-batch gradient descent on segmentation_loss averaged over `pairs`.
/// The input params are not modified. Throws NumericError naming the step if
/// the loss becomes non-finite.
TrainResult train_toy(const NetParams& params, const std::vector<TrainingPair>& pairs,
                      const TrainOptions& options);

/// Builds a training pair from volumes: [normalized ct, vesselness] and mask.
/// Dims must already be multiples of `divisor`.
TrainingPair make_training_pair(const Volume3& ct, const Volume3& vessel, const Volume3& mask,
                                std::size_t divisor, double window_lo = kDefaultWindowLo,
                                double window_hi = kDefaultWindowHi);

/// Hard Dice of (prob > threshold) against a binary tensor.
double thresholded_dice(const Tensor& prob, const Tensor& truth, double threshold = 0.5);

}  // namespace airway::nn
