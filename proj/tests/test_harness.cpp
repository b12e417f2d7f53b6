#include "fjd/error.hpp"
#include "fjd/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace fjd {
namespace {

// Squared distance between the two zero-mean 2-D demo Gaussians at conditioning
// scale alpha, from the 2x2 identity Tr sqrt(M) = sqrt(Tr M + 2 sqrt(det M)).
double demo_oracle(double alpha) {
  const double a11 = 2, a12 = 2 * alpha, a22 = 4 * alpha * alpha;
  const double b11 = 2, b12 = 2 * alpha, b22 = 2.1 * alpha * alpha;
  const double tr_ab = a11 * b11 + 2 * a12 * b12 + a22 * b22;
  const double det_ab = (a11 * a22 - a12 * a12) * (b11 * b22 - b12 * b12);
  return a11 + a22 + b11 + b22 - 2 * std::sqrt(tr_ab + 2 * std::sqrt(det_ab));
}

ExperimentConfig small(ExperimentKind kind, CondType cond, std::size_t n = 600) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.cond_type = cond;
  cfg.n_samples = n;
  cfg.seed = 7;
  cfg.image_latent_dim = 16;
  cfg.bbox_latent_dim = 8;
  cfg.mask_latent_dim = 16;
  return cfg;
}

TEST(GaussianDemo, ExactMatchesClosedForm) {
  auto cfg = small(ExperimentKind::gaussian_demo, CondType::class_label);
  cfg.exact = true;
  cfg.sweep = {0.0, 0.5, 1.0, 2.0};
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.rows.size(), 4u);
  for (const auto& row : table.rows) {
    EXPECT_EQ(row.fid, 0.0);
    EXPECT_NEAR(row.fjd, demo_oracle(row.sweep_value), 1e-12);
    EXPECT_EQ(row.alpha, row.sweep_value);
  }
  EXPECT_NEAR(table.rows[2].fjd, 0.6789906, 1e-6);
  EXPECT_EQ(table.rows[0].fjd, 0.0);
}

TEST(GaussianDemo, SampledNearExact) {
  auto cfg = small(ExperimentKind::gaussian_demo, CondType::class_label, 10000);
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_NEAR(table.rows[0].fjd, demo_oracle(1.0), 0.05);
  EXPECT_LE(table.rows[0].fid, control_floor(cfg).fid);
}

TEST(GaussianDemo, DistributionsShareImageMarginal) {
  EXPECT_EQ(demo_gaussian(1).cov(0, 0), demo_gaussian(2).cov(0, 0));
  EXPECT_EQ(demo_gaussian(1).cov(0, 1), demo_gaussian(2).cov(0, 1));
  EXPECT_THROW(demo_gaussian(3), UsageError);
}

TEST(ControlFloor, ExactDemoIsZero) {
  auto cfg = small(ExperimentKind::gaussian_demo, CondType::class_label);
  cfg.exact = true;
  const auto floor = control_floor(cfg);
  EXPECT_EQ(floor.fid, 0.0);
  EXPECT_EQ(floor.fjd, 0.0);
}

TEST(ControlFloor, EqualSeedsRejected) {
  const auto cfg = small(ExperimentKind::noise, CondType::class_label);
  try {
    control_floor(cfg, 3, 3);
    FAIL() << "expected an error";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("samples must be disjoint"), std::string::npos);
  }
}

TEST(ControlFloor, ShrinksWithSampleSize) {
  const auto few = control_floor(small(ExperimentKind::noise, CondType::class_label, 500));
  const auto many = control_floor(small(ExperimentKind::noise, CondType::class_label, 4000));
  EXPECT_GT(few.fid, 0.0);
  EXPECT_LT(many.fid, few.fid);
  EXPECT_LT(many.fjd, few.fjd);
}

TEST(RunExperiment, NoiseStartsAtZeroAndGrows) {
  const auto cfg = small(ExperimentKind::noise, CondType::class_label);
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.rows.size(), default_sweep(ExperimentKind::noise).size());
  EXPECT_LE(table.rows[0].fid, 1e-9);
  EXPECT_LE(table.rows[0].fjd, 1e-9);
  EXPECT_LT(table.rows[0].fid, control_floor(cfg).fid);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    EXPECT_GT(table.rows[i].fid, table.rows[i - 1].fid);
  }
  EXPECT_EQ(table.metadata.alpha_mode, AlphaMode::automatic);
  EXPECT_GT(table.metadata.alpha, 0.0);
  EXPECT_EQ(table.metadata.seed, 7u);
}

TEST(RunExperiment, ClassConsistencyUnaffectedByPositionSwaps) {
  const auto table = run_experiment(small(ExperimentKind::consistency, CondType::class_label));
  for (const auto& row : table.rows) {
    EXPECT_LE(row.fid, 1e-9);
    EXPECT_LE(row.fjd, 1e-9);
  }
}

TEST(RunExperiment, MaskConsistencyGrowsWithOffset) {
  const auto table = run_experiment(small(ExperimentKind::consistency, CondType::mask, 1000));
  ASSERT_EQ(table.rows.size(), 4u);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    EXPECT_LE(table.rows[i].fid, 1e-9);
    if (i > 0) {
      EXPECT_GT(table.rows[i].fjd, table.rows[i - 1].fjd);
    }
  }
}

TEST(RunExperiment, SinkSeesRowsInOrder) {
  auto cfg = small(ExperimentKind::hamming, CondType::attributes);
  std::vector<ResultRow> seen;
  const auto table = run_experiment(cfg, [&](const ResultRow& r) { seen.push_back(r); });
  EXPECT_EQ(seen, table.rows);
  EXPECT_EQ(table.config.sweep, default_sweep(ExperimentKind::hamming));
}

TEST(RunExperiment, AlphaSweepStartsAtFid) {
  const auto table = run_experiment(small(ExperimentKind::alpha_sweep, CondType::bbox));
  ASSERT_EQ(table.rows.size(), 6u);
  EXPECT_LE(std::abs(table.rows[0].fjd - table.rows[0].fid), 1e-9 * table.rows[0].fid);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    EXPECT_EQ(table.rows[i].alpha, table.rows[i].sweep_value);
    EXPECT_GE(table.rows[i].fjd, table.rows[i - 1].fjd);
  }
}

TEST(RunExperiment, FixedAlphaIsReported) {
  auto cfg = small(ExperimentKind::noise, CondType::class_label);
  cfg.sweep = {0.1};
  cfg.joint = {2.5, AlphaMode::fixed};
  const auto table = run_experiment(cfg);
  EXPECT_EQ(table.rows[0].alpha, 2.5);
  EXPECT_EQ(table.metadata.alpha, 2.5);
  EXPECT_EQ(table.metadata.alpha_mode, AlphaMode::fixed);
}

TEST(Validate, RejectsBadConfigs) {
  auto cfg = small(ExperimentKind::noise, CondType::class_label);
  cfg.sweep = {0.1, 0.0, 0.2};
  EXPECT_THROW(validate(cfg), UsageError);
  cfg.sweep = {0.2, 0.1, 0.0};
  EXPECT_NO_THROW(validate(cfg));

  cfg = small(ExperimentKind::noise, CondType::class_label, 99);
  EXPECT_THROW(validate(cfg), UsageError);

  cfg = small(ExperimentKind::hamming, CondType::mask);
  EXPECT_THROW(validate(cfg), UsageError);

  cfg = small(ExperimentKind::consistency, CondType::bbox);
  cfg.attribute = Factor::texture;
  EXPECT_THROW(validate(cfg), UsageError);

  cfg = small(ExperimentKind::noise, CondType::class_label);
  cfg.joint = {-1.0, AlphaMode::fixed};
  EXPECT_THROW(validate(cfg), UsageError);
}

TEST(Validate, SwapOffsetMustBeOnLattice) {
  auto cfg = small(ExperimentKind::consistency, CondType::bbox);
  cfg.sweep = {1.5};
  EXPECT_THROW(run_experiment(cfg), UsageError);
}

TEST(ExperimentKind, NamesRoundTrip) {
  for (auto k : {ExperimentKind::noise, ExperimentKind::consistency, ExperimentKind::diversity,
                 ExperimentKind::alpha_sweep, ExperimentKind::gaussian_demo, ExperimentKind::hamming}) {
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_experiment_kind("bogus"), UsageError);
}

}  // namespace
}  // namespace fjd
