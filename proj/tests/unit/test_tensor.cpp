#include <gtest/gtest.h>

#include <cmath>

#include "airway/error.hpp"
#include "airway/tensor.hpp"
#include "test_support.hpp"

using namespace airway;
using namespace airway::nn;
using airway::testing::check_gradients;
using airway::testing::separated_values;
using airway::testing::uniform_values;

namespace {

constexpr double kTol = 1e-4;

Tensor random_tensor(std::mt19937_64& rng, const Shape5& s, double lo = -1, double hi = 1) {
  return Tensor::from_values(s, uniform_values(rng, s.size(), lo, hi), true);
}

Tensor binary_tensor(std::mt19937_64& rng, const Shape5& s) {
  std::bernoulli_distribution b(0.3);
  std::vector<double> v(s.size());
  for (auto& x : v) x = b(rng) ? 1.0 : 0.0;
  return Tensor::from_values(s, std::move(v));
}

/// Random projection so every output coordinate carries a distinct weight.
std::function<Tensor()> projected(std::mt19937_64& rng, std::function<Tensor()> op) {
  const auto n = op().size();
  auto w = std::make_shared<std::vector<double>>(uniform_values(rng, n, -1, 1));
  return [op, w] { return weighted_sum(op(), *w); };
}

}  // namespace

TEST(Tensor, ShapeAndValueCount) {
  EXPECT_THROW(Tensor::from_values({1, 1, 2, 2, 2}, std::vector<double>(7)), ShapeError);
  const auto t = Tensor::zeros({2, 3, 4, 5, 6});
  EXPECT_EQ(t.size(), 720u);
  EXPECT_EQ(t.shape().spatial(), 120u);
  EXPECT_THROW(t.item(), ShapeError);
}

TEST(Conv3d, IdentityKernel) {
  std::mt19937_64 rng(1);
  const auto x = random_tensor(rng, {2, 3, 4, 5, 6});
  std::vector<double> w(9, 0.0);
  for (int c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;
  const auto y = conv3d(x, Tensor::from_values({3, 3, 1, 1, 1}, w), Tensor::zeros({1, 3, 1, 1, 1}));
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) ASSERT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv3d, OnesKernelOnOneHotIsNeighborhoodIndicator) {
  const Shape5 s{1, 1, 5, 6, 7};
  std::vector<double> v(s.size(), 0.0);
  v[(2 * 6 + 3) * 7 + 4] = 1.0;  // (d, h, w) = (2, 3, 4)
  const auto y = conv3d(Tensor::from_values(s, v), Tensor::from_values({1, 1, 3, 3, 3}, std::vector<double>(27, 1.0)),
                        Tensor::zeros({1, 1, 1, 1, 1}));
  for (std::size_t d = 0; d < 5; ++d)
    for (std::size_t h = 0; h < 6; ++h)
      for (std::size_t w = 0; w < 7; ++w) {
        const bool near = std::abs(static_cast<int>(d) - 2) <= 1 &&
                          std::abs(static_cast<int>(h) - 3) <= 1 &&
                          std::abs(static_cast<int>(w) - 4) <= 1;
        ASSERT_EQ(y.values()[(d * 6 + h) * 7 + w], near ? 1.0 : 0.0);
      }
}

TEST(Conv3d, MatchesDirectSummation) {
  std::mt19937_64 rng(2);
  const Shape5 xs{2, 3, 4, 5, 6};
  const auto x = random_tensor(rng, xs);
  const auto w = random_tensor(rng, {2, 3, 3, 3, 3});
  const auto b = random_tensor(rng, {1, 2, 1, 1, 1});
  const auto y = conv3d(x, w, b);
  auto X = [&](std::size_t n, std::size_t c, long d, long h, long ww) {
    if (d < 0 || h < 0 || ww < 0 || d >= 4 || h >= 5 || ww >= 6) return 0.0;
    return x.values()[(((n * 3 + c) * 4 + d) * 5 + h) * 6 + ww];
  };
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t co = 0; co < 2; ++co)
      for (long d = 0; d < 4; ++d)
        for (long h = 0; h < 5; ++h)
          for (long ww = 0; ww < 6; ++ww) {
            double acc = b.values()[co];
            for (std::size_t ci = 0; ci < 3; ++ci)
              for (long kd = 0; kd < 3; ++kd)
                for (long kh = 0; kh < 3; ++kh)
                  for (long kw = 0; kw < 3; ++kw)
                    acc += w.values()[(((co * 3 + ci) * 3 + kd) * 3 + kh) * 3 + kw] *
                           X(n, ci, d + kd - 1, h + kh - 1, ww + kw - 1);
            const auto i = (((n * 2 + co) * 4 + d) * 5 + h) * 6 + ww;
            ASSERT_NEAR(y.values()[i], acc, 1e-12);
          }
}

TEST(Conv3d, ShapeMismatchNamesBothShapes) {
  const auto x = Tensor::zeros({1, 3, 4, 4, 4});
  const auto w = Tensor::zeros({2, 2, 3, 3, 3});
  try {
    conv3d(x, w, Tensor::zeros({1, 2, 1, 1, 1}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find(x.shape().str()), std::string::npos) << m;
    EXPECT_NE(m.find(w.shape().str()), std::string::npos) << m;
  }
  EXPECT_THROW(conv3d(Tensor::zeros({1, 2, 4, 4, 4}), w, Tensor::zeros({1, 3, 1, 1, 1})),
               ShapeError);
}

TEST(GradCheck, Conv3dKernelSizes) {
  std::mt19937_64 rng(3);
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto x = random_tensor(rng, {2, 3, 4, 5, 6});
    const auto w = random_tensor(rng, {2, 3, k, k, k});
    const auto b = random_tensor(rng, {1, 2, 1, 1, 1});
    const auto r = check_gradients(projected(rng, [=] { return conv3d(x, w, b); }), {x, w, b}, 150, k);
    EXPECT_LT(r.max_rel_error, kTol) << "k=" << k;
    EXPECT_GE(r.coordinates, 100u);
  }
}

TEST(GradCheck, SumOfConvOutputWrtEveryWeight) {
  std::mt19937_64 rng(4);
  const auto x = random_tensor(rng, {1, 2, 4, 4, 4});
  const auto w = random_tensor(rng, {3, 2, 3, 3, 3});
  const auto b = random_tensor(rng, {1, 3, 1, 1, 1});
  const auto r = check_gradients([=] { return sum(conv3d(x, w, b)); }, {w}, w.size(), 0);
  EXPECT_EQ(r.coordinates, 162u);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(GradCheck, Relu) {
  std::mt19937_64 rng(5);
  const Shape5 s{1, 2, 4, 4, 4};
  const auto x = Tensor::from_values(s, separated_values(rng, s.size(), 1e-2), true);
  const auto r = check_gradients(projected(rng, [=] { return relu(x); }), {x}, 128, 5);
  EXPECT_LT(r.max_rel_error, kTol);
  EXPECT_GE(r.coordinates, 100u);
}

TEST(GradCheck, Sigmoid) {
  std::mt19937_64 rng(6);
  const auto x = random_tensor(rng, {1, 2, 4, 4, 4}, -4, 4);
  const auto r = check_gradients(projected(rng, [=] { return sigmoid(x); }), {x}, 128, 6);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(GradCheck, MaxPool) {
  std::mt19937_64 rng(7);
  const Shape5 s{2, 2, 4, 4, 6};
  const auto x = Tensor::from_values(s, separated_values(rng, s.size(), 1e-2), true);
  const auto r = check_gradients(projected(rng, [=] { return maxpool3d(x, 2); }), {x}, 192, 7);
  EXPECT_LT(r.max_rel_error, kTol);
  EXPECT_GE(r.coordinates, 100u);
}

TEST(GradCheck, Upsample) {
  std::mt19937_64 rng(8);
  const auto x = random_tensor(rng, {1, 2, 4, 4, 4});
  const auto r = check_gradients(projected(rng, [=] { return upsample_nn(x, 3); }), {x}, 128, 8);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(GradCheck, ConcatAddSum) {
  std::mt19937_64 rng(9);
  const auto a = random_tensor(rng, {1, 2, 4, 4, 4});
  const auto b = random_tensor(rng, {1, 3, 4, 4, 4});
  const auto c = random_tensor(rng, {1, 5, 4, 4, 4});
  const auto r = check_gradients(
      projected(rng, [=] { return add(concat_channels({a, b}), c); }), {a, b, c}, 128, 9);
  EXPECT_LT(r.max_rel_error, kTol);
  const auto r2 = check_gradients([=] { return sum(a); }, {a}, 128, 10);
  EXPECT_LT(r2.max_rel_error, kTol);
}

TEST(GradCheck, Losses) {
  std::mt19937_64 rng(10);
  const Shape5 s{1, 1, 6, 6, 6};
  const auto p = random_tensor(rng, s, 0.05, 0.95);
  const auto g = binary_tensor(rng, s);
  for (const auto& f : std::vector<std::function<Tensor()>>{
           [=] { return soft_dice_loss(p, g); }, [=] { return bce_loss(p, g); },
           [=] { return segmentation_loss(p, g); }}) {
    const auto r = check_gradients(f, {p}, 200, 11);
    EXPECT_LT(r.max_rel_error, kTol);
    EXPECT_GE(r.coordinates, 100u);
  }
}

TEST(GradCheck, LossThroughSigmoidOfConv) {
  std::mt19937_64 rng(11);
  const auto x = random_tensor(rng, {1, 2, 4, 4, 4});
  const auto w = random_tensor(rng, {1, 2, 3, 3, 3}, -0.3, 0.3);
  const auto b = random_tensor(rng, {1, 1, 1, 1, 1});
  const auto g = binary_tensor(rng, {1, 1, 4, 4, 4});
  const auto r = check_gradients([=] { return segmentation_loss(sigmoid(conv3d(x, w, b)), g); },
                                 {x, w, b}, 100, 12);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Pooling, ConstantInOutAndUpsampleInverse) {
  const auto c = Tensor::from_values({1, 2, 4, 4, 4}, std::vector<double>(128, 2.5));
  const auto pooled = maxpool3d(c, 2), up = upsample_nn(c, 2);
  for (double v : pooled.values()) EXPECT_EQ(v, 2.5);
  for (double v : up.values()) EXPECT_EQ(v, 2.5);
  std::mt19937_64 rng(12);
  const auto x = random_tensor(rng, {2, 3, 3, 2, 4});
  for (std::size_t f : {1u, 2u, 3u}) {
    const auto y = maxpool3d(upsample_nn(x, f), f);
    ASSERT_EQ(y.shape(), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(y.values()[i], x.values()[i]);
  }
}

TEST(Pooling, GradientRoutesToOneVoxelPerWindow) {
  std::mt19937_64 rng(13);
  for (bool ties : {false, true}) {
    const Shape5 s{1, 2, 4, 4, 4};
    std::vector<double> v = ties ? std::vector<double>(s.size(), 1.0) : uniform_values(rng, s.size(), 0, 1);
    const auto x = Tensor::from_values(s, v, true);
    sum(maxpool3d(x, 2)).backward();
    const auto g = x.grad();
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t d = 0; d < 4; d += 2)
        for (std::size_t h = 0; h < 4; h += 2)
          for (std::size_t w = 0; w < 4; w += 2) {
            int ones = 0;
            std::size_t hit = 0, first = 0;
            double best = -1;
            for (std::size_t a = 0; a < 2; ++a)
              for (std::size_t b = 0; b < 2; ++b)
                for (std::size_t e = 0; e < 2; ++e) {
                  const auto i = ((c * 4 + d + a) * 4 + h + b) * 4 + w + e;
                  if (g[i] == 1.0) ++ones, hit = i;
                  else ASSERT_EQ(g[i], 0.0);
                  if (v[i] > best) best = v[i], first = i;
                }
            ASSERT_EQ(ones, 1);
            ASSERT_EQ(hit, first);
          }
  }
}

TEST(Pooling, NonDivisibleDims) {
  EXPECT_THROW(maxpool3d(Tensor::zeros({1, 1, 4, 5, 4}), 2), ShapeError);
}

TEST(Losses, Examples) {
  const Shape5 s{1, 1, 3, 3, 3};
  const auto ones = Tensor::from_values(s, std::vector<double>(27, 1.0));
  EXPECT_LT(soft_dice_loss(ones, ones).item(), 1e-5);
  std::mt19937_64 rng(14);
  const auto half = Tensor::from_values(s, std::vector<double>(27, 0.5));
  EXPECT_NEAR(bce_loss(half, binary_tensor(rng, s)).item(), std::log(2.0), 1e-15);
  EXPECT_THROW(segmentation_loss(half, Tensor::zeros({1, 1, 3, 3, 2})), ShapeError);
  EXPECT_THROW(segmentation_loss(half, half), ValidationError);
}

TEST(Autodiff, SharedSubgraphAccumulates) {
  const auto x = Tensor::from_values({1, 1, 1, 1, 2}, {1.0, -2.0}, true);
  const auto y = add(x, x);
  sum(add(y, y)).backward();
  EXPECT_EQ(x.grad()[0], 4.0);
  EXPECT_EQ(x.grad()[1], 4.0);
}
