#pragma once

#include "fjd/joint.hpp"
#include "fjd/synth.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fjd {

enum class ExperimentKind { noise, consistency, diversity, alpha_sweep, gaussian_demo, hamming };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::noise;
  CondType cond_type = CondType::class_label;
  /// Noise sigmas, swap offsets, diversity scores, alphas or Hamming targets,
  /// depending on `kind`. Must be monotone (either direction).
  std::vector<double> sweep;
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
  JointConfig joint;

  /// Swap factor for consistency runs, stratification factor for diversity runs.
  Factor attribute = Factor::x_pos;
  std::vector<Shape> shapes = {Shape::square, Shape::ellipse, Shape::heart};
  double swap_fraction = 0.3;
  int texture_count = kNumTextures;
  /// gaussian_demo only: use the analytic parameters instead of samples.
  bool exact = false;

  int image_latent_dim = 64;
  int bbox_latent_dim = 32;
  int mask_latent_dim = 64;
  unsigned threads = 1;
};

/// Sweep used when a config leaves `sweep` empty.
std::vector<double> default_sweep(ExperimentKind kind, Factor attribute = Factor::x_pos);

/// Throws UsageError on an invalid config.
void validate(const ExperimentConfig& cfg);

struct ResultRow {
  double sweep_value = 0.0;
  double fid = 0.0;
  double fjd = 0.0;
  double alpha = 0.0;
  int clamped_count = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  ExperimentConfig config;
  ScoreMetadata metadata;
  std::vector<ResultRow> rows;
};

/// Called once per finished row, in sweep order.
using RowSink = std::function<void(const ResultRow&)>;

/// Builds the reference once, derives a generated set per sweep value and
/// scores both with embedders and alpha frozen on the reference.
ResultTable run_experiment(const ExperimentConfig& cfg, const RowSink& sink = {});

struct ControlFloor {
  double fid = 0.0;
  double fjd = 0.0;
};

/// FID and FJD between two independent same-distribution samples drawn with
/// `seed_a` and `seed_b`. Zero for the exact Gaussian demo.
ControlFloor control_floor(const ExperimentConfig& cfg, std::uint64_t seed_a, std::uint64_t seed_b);
/// Uses cfg.seed and a seed derived from it.
ControlFloor control_floor(const ExperimentConfig& cfg);

/// The two-dimensional joint Gaussians of the counterexample, image coordinate
/// first. Both share the image marginal.
GaussianStats demo_gaussian(int which);

}  // namespace fjd
