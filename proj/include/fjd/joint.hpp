#pragma once

#include "fjd/frechet.hpp"
#include "fjd/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fjd {

enum class AlphaMode { automatic, fixed };

/// Everything that must be reported alongside an FJD score.
struct JointConfig {
  double alpha = 1.0;  // used as-is in fixed mode; overwritten by calibration in automatic mode
  AlphaMode alpha_mode = AlphaMode::automatic;
  std::string image_embedder_id = "unspecified";
  std::string cond_embedder_id = "unspecified";
  std::string reference_id = "unspecified";
};

/// Row i of `image` is paired with row i of `cond`.
struct PairedEmbeddings {
  EmbeddingSet image;
  EmbeddingSet cond;

  std::size_t rows() const { return image.rows(); }
  /// Throws DataError when the two halves have different row counts.
  void validate() const;
};

/// Reporting block attached to every score.
struct ScoreMetadata {
  double alpha = 0.0;
  AlphaMode alpha_mode = AlphaMode::fixed;
  std::string image_embedder_id;
  std::string cond_embedder_id;
  std::string reference_id;
  std::optional<std::uint64_t> seed;
};

/// alpha printed with six decimals, the precision used in score reports.
std::string format_alpha(double alpha);

struct JointScore {
  FrechetResult result;
  ScoreMetadata metadata;
};

struct AlphaPoint {
  double alpha = 0.0;
  FrechetResult result;
};

/// Mean image-embedding L2 norm over mean conditioning-embedding L2 norm.
double calibrate_alpha(const PairedEmbeddings& reference);

/// Concatenation [f ; alpha * h].
Vector merge_embedding(std::span<const double> f_row, std::span<const double> h_row, double alpha);
RowMatrix merge_embeddings(const PairedEmbeddings& pairs, double alpha);

/// Gaussian of the merged rows, built block by block without materialising the
/// full joint matrix.
GaussianStats estimate_joint_gaussian(const PairedEmbeddings& pairs, double alpha,
                                      const EstimateOptions& options = {});

FrechetResult compute_fid(const EmbeddingSet& reference_images, const EmbeddingSet& generated_images,
                          const EstimateOptions& options = {});

/// Resolves alpha (calibrating on `reference` in automatic mode), then computes
/// the Frechet distance between the joint Gaussians.
JointScore compute_fjd(const PairedEmbeddings& reference, const PairedEmbeddings& generated,
                       const JointConfig& config, const EstimateOptions& options = {});

/// FJD for each alpha, in input order. Joint statistics are fitted once at
/// alpha = 1 and rescaled per alpha, which is exact because Gaussian fitting
/// commutes with the diagonal scaling.
std::vector<AlphaPoint> sweep_alpha(const PairedEmbeddings& reference, const PairedEmbeddings& generated,
                                    std::span<const double> alphas, const EstimateOptions& options = {});

/// Joint stats for `alpha` from stats fitted at alpha = 1 with `image_dim`
/// leading image coordinates.
GaussianStats scale_conditioning(const GaussianStats& unit_joint, std::size_t image_dim, double alpha);

}  // namespace fjd
