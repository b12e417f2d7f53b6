#include "fjd/embedders.hpp"
#include "fjd/error.hpp"
#include "fjd/joint.hpp"
#include "fjd/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace fjd {
namespace {

// Image and conditioning columns drawn jointly from a random Gaussian.
PairedEmbeddings random_pairs(Eigen::Index n, Eigen::Index di, Eigen::Index dc, std::uint64_t seed,
                              double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index d = di + dc;
  Matrix mix(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) mix(i, j) = normal(rng);
  RowMatrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = normal(rng);
  RowMatrix x = z * mix.transpose();
  x.array() += shift;
  return {EmbeddingSet(x.leftCols(di)), EmbeddingSet(x.rightCols(dc))};
}

TEST(CalibrateAlpha, ConstantNorms) {
  RowMatrix img(3, 2), cond(3, 1);
  img << 4, 0, 0, 4, 0, -4;
  cond << 2, -2, 2;
  EXPECT_DOUBLE_EQ(calibrate_alpha({EmbeddingSet(img), EmbeddingSet(cond)}), 2.0);
}

TEST(CalibrateAlpha, OneHotConditioning) {
  RowMatrix img(2, 2), cond(2, 3);
  img << 3, 0, 3, 4;
  cond << 1, 0, 0, 0, 0, 1;
  EXPECT_DOUBLE_EQ(calibrate_alpha({EmbeddingSet(img), EmbeddingSet(cond)}), 4.0);
}

TEST(CalibrateAlpha, ZeroConditioningIsDegenerate) {
  RowMatrix img = RowMatrix::Ones(4, 2), cond = RowMatrix::Zero(4, 3);
  try {
    calibrate_alpha({EmbeddingSet(img), EmbeddingSet(cond)});
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate conditioning embedding"), std::string::npos);
  }
}

TEST(MergeEmbedding, ScaledConcatenation) {
  const double f[] = {1, 2}, h[] = {3};
  EXPECT_EQ(merge_embedding(f, h, 2.0), Eigen::Vector3d(1, 2, 6));
  EXPECT_EQ(merge_embedding(f, h, 0.0), Eigen::Vector3d(1, 2, 0));
  const std::vector<double> big_f(2048, 1.0), big_h(128, 1.0);
  EXPECT_EQ(merge_embedding(big_f, big_h, 1.0).size(), 2176);
}

TEST(MergeEmbedding, RowsMatchSingleMerge) {
  const auto p = random_pairs(20, 3, 2, 1);
  const RowMatrix merged = merge_embeddings(p, 0.7);
  for (Eigen::Index r = 0; r < 20; ++r) {
    const Vector fr = p.image.data.row(r).transpose(), hr = p.cond.data.row(r).transpose();
    EXPECT_EQ(merged.row(r).transpose(), merge_embedding({fr.data(), 3}, {hr.data(), 2}, 0.7));
  }
}

TEST(JointGaussian, BlockwiseEstimateMatchesMaterialisedMerge) {
  const auto p = random_pairs(2000, 5, 3, 2);
  const auto blockwise = estimate_joint_gaussian(p, 1.7);
  const auto direct = estimate_gaussian(merge_embeddings(p, 1.7));
  EXPECT_EQ(blockwise.mean, direct.mean);
  EXPECT_EQ(blockwise.cov, direct.cov);
}

TEST(ComputeFid, SelfDistanceIsZero) {
  const auto p = random_pairs(500, 6, 1, 3);
  EXPECT_LE(compute_fid(p.image, p.image).value, 1e-9);
}

TEST(ComputeFid, DisjointSamplesOfOneDistribution) {
  Matrix sigma(2, 2);
  sigma << 4, 2, 2, 2;
  const auto a = sample_gaussian(Vector::Zero(2), sigma, 10000, 1);
  const auto b = sample_gaussian(Vector::Zero(2), sigma, 10000, 2);
  EXPECT_LT(compute_fid(a, b).value, 0.02);
}

TEST(ComputeFid, MeanShiftOfThree) {
  Matrix sigma(2, 2);
  sigma << 4, 2, 2, 2;
  const auto a = sample_gaussian(Vector::Zero(2), sigma, 10000, 1);
  const auto b = sample_gaussian(Eigen::Vector2d(3, 0), sigma, 10000, 2);
  EXPECT_NEAR(compute_fid(a, b).value, 9.0, 0.1);
}

TEST(ComputeFjd, IdenticalSetsGiveZero) {
  const auto p = random_pairs(800, 4, 2, 4);
  EXPECT_LE(compute_fjd(p, p, {}).result.value, 1e-9);
}

TEST(ComputeFjd, ZeroAlphaEqualsFid) {
  const auto ref = random_pairs(1500, 6, 3, 5);
  const auto gen = random_pairs(1500, 6, 3, 6, 0.2);
  JointConfig cfg;
  cfg.alpha_mode = AlphaMode::fixed;
  cfg.alpha = 0.0;
  const double fid = compute_fid(ref.image, gen.image).value;
  const double fjd = compute_fjd(ref, gen, cfg).result.value;
  EXPECT_LE(std::abs(fjd - fid) / std::max(fid, 1e-12), 1e-9);
}

TEST(ComputeFjd, RecordsReportingMetadata) {
  const auto ref = random_pairs(300, 3, 2, 7);
  JointConfig cfg{1.0, AlphaMode::automatic, "img-x", "cond-y", "split-z"};
  const auto score = compute_fjd(ref, random_pairs(300, 3, 2, 8), cfg);
  EXPECT_DOUBLE_EQ(score.metadata.alpha, calibrate_alpha(ref));
  EXPECT_EQ(score.metadata.alpha_mode, AlphaMode::automatic);
  EXPECT_EQ(score.metadata.image_embedder_id, "img-x");
  EXPECT_EQ(score.metadata.cond_embedder_id, "cond-y");
  EXPECT_EQ(score.metadata.reference_id, "split-z");
  EXPECT_EQ(format_alpha(17.4650291), "17.465029");
}

TEST(ComputeFjd, AutoAlphaIgnoresGeneratedSet) {
  const auto ref = random_pairs(300, 3, 2, 9);
  const auto a = compute_fjd(ref, random_pairs(300, 3, 2, 10), {});
  const auto b = compute_fjd(ref, random_pairs(300, 3, 2, 11, 5.0), {});
  EXPECT_EQ(a.metadata.alpha, b.metadata.alpha);
}

TEST(ComputeFjd, MismatchedInputsAreRejected) {
  auto ref = random_pairs(100, 3, 2, 12);
  auto bad_rows = ref;
  bad_rows.cond.data.conservativeResize(99, Eigen::NoChange);
  EXPECT_THROW(compute_fjd(ref, bad_rows, {}), DataError);
  EXPECT_THROW(compute_fjd(ref, random_pairs(100, 4, 2, 13), {}), DataError);
  JointConfig negative;
  negative.alpha_mode = AlphaMode::fixed;
  negative.alpha = -1.0;
  EXPECT_THROW(compute_fjd(ref, ref, negative), UsageError);
}

TEST(ComputeFjd, RowPermutationInvariance) {
  const auto ref = random_pairs(1000, 4, 2, 14);
  const auto gen = random_pairs(1000, 4, 2, 15, 0.3);
  std::vector<Eigen::Index> perm(1000);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  PairedEmbeddings shuffled = gen;
  for (Eigen::Index i = 0; i < 1000; ++i) {
    shuffled.image.data.row(i) = gen.image.data.row(perm[i]);
    shuffled.cond.data.row(i) = gen.cond.data.row(perm[i]);
  }
  const double a = compute_fjd(ref, gen, {}).result.value;
  const double b = compute_fjd(ref, shuffled, {}).result.value;
  EXPECT_LE(std::abs(a - b), 1e-9 * a);
}

TEST(ComputeFjd, ConditioningScaleCompensatedByAlpha) {
  const auto ref = random_pairs(1000, 4, 3, 16);
  const auto gen = random_pairs(1000, 4, 3, 17, 0.1);
  const double c = 3.5;
  auto ref_c = ref, gen_c = gen;
  ref_c.cond.data *= c;
  gen_c.cond.data *= c;
  JointConfig a{2.0, AlphaMode::fixed}, b{2.0 / c, AlphaMode::fixed};
  const double base = compute_fjd(ref, gen, a).result.value;
  EXPECT_LE(std::abs(compute_fjd(ref_c, gen_c, b).result.value - base), 1e-9 * base);
}

TEST(SweepAlpha, SingleZeroEqualsFid) {
  const auto ref = random_pairs(800, 3, 2, 18);
  const auto gen = random_pairs(800, 3, 2, 19, 0.4);
  const double alphas[] = {0.0};
  const auto out = sweep_alpha(ref, gen, alphas);
  ASSERT_EQ(out.size(), 1u);
  const double fid = compute_fid(ref.image, gen.image).value;
  EXPECT_LE(std::abs(out[0].result.value - fid), 1e-9 * fid);
}

TEST(SweepAlpha, MatchesDirectComputationInInputOrder) {
  const auto ref = random_pairs(600, 3, 2, 20);
  const auto gen = random_pairs(600, 3, 2, 21, 0.4);
  const double alphas[] = {2.0, 0.5, 1.0};
  const auto out = sweep_alpha(ref, gen, alphas);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out[i].alpha, alphas[i]);
    const double direct = compute_fjd(ref, gen, {alphas[i], AlphaMode::fixed}).result.value;
    EXPECT_LE(std::abs(out[i].result.value - direct), 1e-9 * direct);
  }
}

TEST(SweepAlpha, MonotoneAndDominatesFid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ref = random_pairs(400, 1 + seed % 5, 1 + seed % 3, 100 + seed);
    const auto gen = random_pairs(400, 1 + seed % 5, 1 + seed % 3, 200 + seed, 0.1);
    const double alphas[] = {0, 0.5, 1, 2, 4, 8};
    const auto out = sweep_alpha(ref, gen, alphas);
    const double fid = compute_fid(ref.image, gen.image).value;
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_GE(out[i].result.value, fid - 1e-9 * std::max(1.0, fid));
      if (i > 0) {
        EXPECT_GE(out[i].result.value, out[i - 1].result.value - 1e-9 * std::max(1.0, out[i - 1].result.value));
      }
    }
  }
}

TEST(SweepAlpha, CounterexampleAtZeroAndOne) {
  GaussianStats a{Vector::Zero(2), Matrix(2, 2), 2}, b{Vector::Zero(2), Matrix(2, 2), 2};
  // image coordinate first
  a.cov << 2, 2, 2, 4;
  b.cov << 2, 2, 2, 2.1;
  EXPECT_EQ(frechet_distance(scale_conditioning(a, 1, 0.0), scale_conditioning(b, 1, 0.0)).value, 0.0);
  EXPECT_NEAR(frechet_distance(scale_conditioning(a, 1, 1.0), scale_conditioning(b, 1, 1.0)).value, 0.6789, 1e-3);
}

TEST(SweepAlpha, RejectsEmptyOrNegativeAlphas) {
  const auto p = random_pairs(50, 2, 1, 22);
  EXPECT_THROW(sweep_alpha(p, p, std::span<const double>{}), UsageError);
  const double bad[] = {1.0, -0.5};
  EXPECT_THROW(sweep_alpha(p, p, bad), UsageError);
}

}  // namespace
}  // namespace fjd
