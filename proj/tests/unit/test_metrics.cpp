#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "airway/error.hpp"
#include "airway/metrics.hpp"
#include "test_support.hpp"

using namespace airway;
using airway::testing::cube;
using airway::testing::TempDir;

namespace {

CenterlineRef straight_line(const Grid& g, std::size_t n, int branch = 1, std::int64_t y = 0) {
  std::vector<CenterlineVoxel> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({{static_cast<std::int64_t>(i), y, 0}, branch});
  return CenterlineRef(g, v);
}

/// Per-branch enumeration oracle for the branch detected rate.
double branch_rate_oracle(const Volume3& pred, const std::vector<CenterlineVoxel>& vox, double frac) {
  std::map<int, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& v : vox) {
    auto& c = counts[v.branch];
    ++c.first;
    if (pred[airway::testing::linear(pred.grid(), v.voxel)] != 0.0) ++c.second;
  }
  std::size_t detected = 0;
  for (const auto& [id, c] : counts) {
    if (static_cast<double>(c.second) >= frac * static_cast<double>(c.first) - 1e-9) ++detected;
  }
  return static_cast<double>(detected) / static_cast<double>(counts.size());
}

}  // namespace

TEST(Dice, Examples) {
  const Grid g{{4, 1, 1}, {1, 1, 1}, {}};
  const Volume3 a(g, ElementKind::UInt8, {1, 1, 0, 0});
  const Volume3 b(g, ElementKind::UInt8, {0, 1, 1, 0});
  const Volume3 c(g, ElementKind::UInt8, {0, 0, 1, 1});
  const auto empty = Volume3::filled(g, ElementKind::UInt8);
  EXPECT_EQ(dice(a, a), 1.0);
  EXPECT_EQ(dice(a, c), 0.0);
  EXPECT_EQ(dice(a, b), 0.5);
  EXPECT_EQ(dice(empty, empty), 1.0);
  EXPECT_EQ(dice(a, empty), 0.0);
  EXPECT_THROW(dice(a, Volume3::filled(cube(2), ElementKind::UInt8)), ValidationError);
  EXPECT_THROW(dice(Volume3(g, ElementKind::UInt8, {2, 0, 0, 0}), a), ValidationError);
}

TEST(Dice, SymmetricAndMatchesCounts) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    const auto a = airway::testing::random_mask(rng, cube(10), 0.3);
    const auto b = airway::testing::random_mask(rng, cube(10), 0.3);
    ASSERT_EQ(dice(a, b), dice(b, a));
    const auto r = evaluate(a, b);
    ASSERT_EQ(r.dice, 2.0 * r.true_positive /
                          (2.0 * r.true_positive + r.false_positive + r.false_negative));
  }
}

TEST(TreeDetectedRate, StraightBranchHalfCovered) {
  const Grid g{{11, 1, 1}, {1, 1, 1}, {}};
  const auto ref = straight_line(g, 11);
  const auto pred = make_mask(g, [](std::size_t i) { return i < 6; });
  EXPECT_EQ(tree_detected_rate(pred, ref), 0.5);
  EXPECT_EQ(tree_detected_rate(Volume3::filled(g, ElementKind::UInt8, 1.0), ref), 1.0);
  EXPECT_EQ(tree_detected_rate(Volume3::filled(g, ElementKind::UInt8), ref), 0.0);
}

TEST(TreeDetectedRate, LengthsAreInMillimetres) {
  const Grid g{{3, 3, 1}, {2.0, 1.0, 1.0}, {}};
  // Branch 1 along x (2 mm steps), branch 2 along y (1 mm steps).
  const CenterlineRef ref(g, {{{0, 0, 0}, 1}, {{1, 0, 0}, 1}, {{2, 0, 0}, 1},
                              {{0, 1, 0}, 2}, {{0, 2, 0}, 2}});
  const auto pred = make_mask(g, [&](std::size_t i) { return g.unravel(i).y == 0; });
  EXPECT_DOUBLE_EQ(tree_detected_rate(pred, ref), 4.0 / 5.0);
}

TEST(TreeDetectedRate, Errors) {
  const auto g = cube(4);
  EXPECT_THROW(tree_detected_rate(Volume3::filled(g, ElementKind::UInt8), CenterlineRef(g, {})),
               ValidationError);
  EXPECT_THROW(tree_detected_rate(Volume3::filled(cube(5), ElementKind::UInt8), straight_line(g, 3)),
               ValidationError);
}

TEST(BranchDetectedRate, Examples) {
  const Grid g{{10, 2, 1}, {1, 1, 1}, {}};
  std::vector<CenterlineVoxel> v;
  for (std::int64_t x = 0; x < 10; ++x) v.push_back({{x, 0, 0}, 1});
  for (std::int64_t x = 0; x < 10; ++x) v.push_back({{x, 1, 0}, 2});
  const CenterlineRef ref(g, v);
  const auto eight = make_mask(g, [&](std::size_t i) { return g.unravel(i).x < 8; });
  EXPECT_EQ(branch_detected_rate(eight, ref, 0.8), 1.0);
  EXPECT_EQ(branch_detected_rate(eight, ref, 0.9), 0.0);
  const auto one = make_mask(g, [&](std::size_t i) { return g.unravel(i).y == 0; });
  EXPECT_EQ(branch_detected_rate(one, ref), 0.5);
  EXPECT_THROW(branch_detected_rate(one, ref, 0.0), ValidationError);
  EXPECT_THROW(branch_detected_rate(one, ref, 1.5), ValidationError);
}

TEST(BranchDetectedRate, MatchesPerBranchOracle) {
  std::mt19937_64 rng(42);
  const auto g = cube(12);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::size_t> idx(g.voxel_count());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_int_distribution<int> nb(1, 9);
    std::vector<CenterlineVoxel> vox;
    const int branches = nb(rng);
    std::size_t k = 0;
    for (int b = 1; b <= branches; ++b)
      for (int n = nb(rng); n > 0; --n) vox.push_back({g.unravel(idx[k++]), b});
    const CenterlineRef ref(g, vox);
    const auto pred = airway::testing::random_mask(rng, g, 0.7);
    for (double frac : {0.5, 0.8, 1.0}) {
      ASSERT_EQ(branch_detected_rate(pred, ref, frac), branch_rate_oracle(pred, vox, frac));
    }
  }
}

TEST(Metrics, MonotoneWhenAddingTruePositives) {
  std::mt19937_64 rng(43);
  const auto g = cube(10);
  std::vector<CenterlineVoxel> vox;
  for (std::int64_t x = 0; x < 10; ++x) vox.push_back({{x, 5, 5}, 1 + static_cast<int>(x / 4)});
  for (std::int64_t y = 0; y < 5; ++y) vox.push_back({{5, y, 5}, 4});
  const CenterlineRef ref(g, vox);
  const auto truth = make_mask(g, [&](std::size_t i) {
    const auto p = g.unravel(i);
    return (p.y == 5 && p.z == 5) || (p.x == 5 && p.y < 5 && p.z == 5);
  });
  for (int t = 0; t < 20; ++t) {
    const auto start = airway::testing::random_mask(rng, g, 0.5);
    std::vector<double> pv(start.values().begin(), start.values().end());
    const Volume3 pred(g, ElementKind::UInt8, pv);
    auto before = evaluate(pred, truth, ref);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (truth[i] != 0.0 && pv[i] == 0.0) {
        pv[i] = 1.0;
        const Volume3 next(g, ElementKind::UInt8, pv);
        const auto after = evaluate(next, truth, ref);
        ASSERT_GE(after.dice, before.dice);
        ASSERT_GE(*after.tree_detected_rate, *before.tree_detected_rate);
        ASSERT_GE(*after.branch_detected_rate, *before.branch_detected_rate);
        before = after;
      }
    }
  }
}

TEST(CenterlineRef, Validation) {
  const auto g = cube(4);
  EXPECT_THROW(CenterlineRef(g, {{{0, 0, 0}, 0}}), ValidationError);
  EXPECT_THROW(CenterlineRef(g, {{{4, 0, 0}, 1}}), ValidationError);
  EXPECT_THROW(CenterlineRef(g, {{{1, 0, 0}, 1}, {{1, 0, 0}, 2}}), ValidationError);
}

TEST(CenterlineRef, FileRoundTripAndErrors) {
  TempDir dir;
  const auto g = cube(6);
  const CenterlineRef ref(g, {{{0, 1, 2}, 3}, {{1, 1, 2}, 3}, {{5, 5, 5}, 1}});
  write_centerline(ref, dir / "c.txt");
  const auto back = read_centerline(dir / "c.txt", g);
  ASSERT_EQ(back.voxels().size(), 3u);
  EXPECT_EQ(back.voxels()[2].voxel, (Index3{5, 5, 5}));
  EXPECT_EQ(back.voxels()[0].branch, 3);
  {
    std::ofstream out(dir / "d.txt");
    out << "# header\n0 0 0 1  # trailing\n\n1 0 0 1\n";
  }
  EXPECT_EQ(read_centerline(dir / "d.txt", g).voxels().size(), 2u);
  {
    std::ofstream out(dir / "bad.txt");
    out << "0 0 x 1\n";
  }
  EXPECT_THROW(read_centerline(dir / "bad.txt", g), ParseError);
  {
    std::ofstream out(dir / "oob.txt");
    out << "0 0 9 1\n";
  }
  EXPECT_THROW(read_centerline(dir / "oob.txt", g), ValidationError);
  EXPECT_THROW(read_centerline(dir / "none.txt", g), IoError);
}

TEST(Evaluate, IdenticalWithFullCoverage) {
  const Grid g{{11, 1, 1}, {1, 1, 1}, {}};
  const auto m = Volume3::filled(g, ElementKind::UInt8, 1.0);
  const auto r = evaluate(m, m, straight_line(g, 11));
  EXPECT_EQ(r.dice, 1.0);
  EXPECT_EQ(*r.tree_detected_rate, 1.0);
  EXPECT_EQ(*r.branch_detected_rate, 1.0);
  ASSERT_EQ(r.branches.size(), 1u);
  EXPECT_TRUE(r.branches[0].detected);
  const auto text = r.to_text();
  EXPECT_NE(text.find("dice = 1\n"), std::string::npos) << text;
}

TEST(Evaluate, WithoutReferenceMarksAbsent) {
  const auto m = Volume3::filled(cube(3), ElementKind::UInt8, 1.0);
  const auto r = evaluate(m, m);
  EXPECT_FALSE(r.tree_detected_rate.has_value());
  EXPECT_FALSE(r.branch_detected_rate.has_value());
  const auto text = r.to_text();
  EXPECT_NE(text.find("tree_detected_rate = absent"), std::string::npos) << text;
  EXPECT_EQ(text, evaluate(m, m).to_text());
}
