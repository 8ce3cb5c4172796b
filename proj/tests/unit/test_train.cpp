#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "airway/error.hpp"
#include "airway/phantom.hpp"
#include "airway/train.hpp"
#include "test_support.hpp"

using namespace airway;
using namespace airway::nn;

namespace {

NetSpec tiny_spec() {
  NetSpec s;
  s.levels = 1;
  s.base_channels = 2;
  s.skip_channels = 2;
  return s;
}

TrainingPair tube_pair() {
  PhantomSpec s;
  s.kind = PhantomKind::StraightTube;
  s.profile = Profile::Hard;
  s.radius = 1.6;
  s.contrast = 1000;
  s.polarity = PhantomPolarity::DarkOnBright;
  s.grid = airway::testing::cube(8);
  const auto ph = make_phantom(s, 0);
  const auto vessel = Volume3::filled(ph.image.grid(), ElementKind::Float32, 0.0);
  return make_training_pair(ph.image, vessel, ph.mask, 2);
}

}  // namespace

TEST(Train, ZeroStepsLeavesParamsUnchanged) {
  const auto p = build_unet3p(tiny_spec(), 1);
  TrainOptions o;
  o.steps = 0;
  const auto r = train_toy(p, {tube_pair()}, o);
  EXPECT_TRUE(r.params == p);
  EXPECT_TRUE(r.loss_history.empty());
}

TEST(Train, InputParamsAreNotModified) {
  const auto p = build_unet3p(tiny_spec(), 1);
  const auto copy = p.clone();
  TrainOptions o;
  o.steps = 3;
  const auto r = train_toy(p, {tube_pair()}, o);
  EXPECT_TRUE(p == copy);
  EXPECT_FALSE(r.params == p);
  EXPECT_EQ(r.loss_history.size(), 3u);
}

TEST(Train, LossDecreasesOnTinyProblem) {
  const auto pair = tube_pair();
  TrainOptions o;
  o.steps = 120;
  std::size_t calls = 0;
  o.on_step = [&](std::size_t step, double) { EXPECT_EQ(step, calls++); };
  const auto r = train_toy(build_unet3p(tiny_spec(), 3), {pair}, o);
  EXPECT_EQ(calls, 120u);
  EXPECT_LT(r.loss_history.back(), 0.5 * r.loss_history.front());
  EXPECT_GT(thresholded_dice(forward(r.params, pair.image), pair.mask), 0.9);
}

TEST(Train, DeterministicAndSeedDependent) {
  const auto pair = tube_pair();
  TrainOptions o;
  o.steps = 5;
  const auto a = train_toy(build_unet3p(tiny_spec(), 1), {pair}, o);
  const auto b = train_toy(build_unet3p(tiny_spec(), 1), {pair}, o);
  const auto c = train_toy(build_unet3p(tiny_spec(), 2), {pair}, o);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_FALSE(a.params == c.params);
}

TEST(Train, NonFiniteLossNamesStep) {
  auto pair = tube_pair();
  pair.image.mutable_values()[5] = std::numeric_limits<double>::quiet_NaN();
  TrainOptions o;
  o.steps = 4;
  try {
    train_toy(build_unet3p(tiny_spec(), 1), {pair}, o);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos) << e.what();
  }
}

TEST(Train, ValidatesArguments) {
  const auto p = build_unet3p(tiny_spec(), 1);
  TrainOptions o;
  o.steps = 1;
  EXPECT_THROW(train_toy(p, {}, o), ValidationError);
  o.learning_rate = 0;
  EXPECT_THROW(train_toy(p, {tube_pair()}, o), ValidationError);
  o.learning_rate = 0.1;
  o.momentum = 1.0;
  EXPECT_THROW(train_toy(p, {tube_pair()}, o), ValidationError);
  o.momentum = 0.0;
  TrainingPair odd{Tensor::zeros({1, 2, 3, 4, 4}), Tensor::zeros({1, 1, 3, 4, 4})};
  EXPECT_THROW(train_toy(p, {odd}, o), ShapeError);
}

TEST(Train, ThresholdedDice) {
  const Shape5 s{1, 1, 1, 1, 4};
  const auto prob = Tensor::from_values(s, {0.9, 0.6, 0.5, 0.1});
  const auto truth = Tensor::from_values(s, {1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(thresholded_dice(prob, truth), 0.5);
  EXPECT_THROW(thresholded_dice(prob, Tensor::zeros({1, 1, 1, 1, 3})), ShapeError);
}

TEST(Train, MakeTrainingPairChecks) {
  const auto g = airway::testing::cube(8);
  const auto ct = Volume3::filled(g, ElementKind::Float32);
  auto nonbinary = Volume3::filled(g, ElementKind::UInt8, 2.0);
  EXPECT_THROW(make_training_pair(ct, ct, nonbinary, 2), ValidationError);
  const auto mask = Volume3::filled(g, ElementKind::UInt8, 1.0);
  EXPECT_THROW(make_training_pair(ct, ct, mask, 16), ShapeError);
  const auto pair = make_training_pair(ct, ct, mask, 4);
  EXPECT_EQ(pair.image.shape(), (Shape5{1, 2, 8, 8, 8}));
  EXPECT_EQ(pair.mask.shape(), (Shape5{1, 1, 8, 8, 8}));
}
