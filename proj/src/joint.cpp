#include "fjd/joint.hpp"

#include "fjd/error.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace fjd {

namespace {

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw UsageError("alpha must be a finite non-negative number");
  }
}

void check_compatible(const PairedEmbeddings& reference, const PairedEmbeddings& generated) {
  reference.validate();
  generated.validate();
  if (reference.image.cols() != generated.image.cols()) {
    throw DataError("dimension mismatch: image embeddings have " + std::to_string(reference.image.cols()) +
                    " vs " + std::to_string(generated.image.cols()) + " columns");
  }
  if (reference.cond.cols() != generated.cond.cols()) {
    throw DataError("dimension mismatch: conditioning embeddings have " +
                    std::to_string(reference.cond.cols()) + " vs " + std::to_string(generated.cond.cols()) +
                    " columns");
  }
}

}  // namespace

void PairedEmbeddings::validate() const {
  if (image.rows() != cond.rows()) {
    throw DataError("row count mismatch: " + std::to_string(image.rows()) + " image rows vs " +
                    std::to_string(cond.rows()) + " conditioning rows");
  }
}

std::string format_alpha(double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", alpha);
  return buf;
}

double calibrate_alpha(const PairedEmbeddings& reference) {
  reference.validate();
  const auto n = reference.rows();
  if (n == 0) {
    throw DataError("insufficient samples: alpha calibration needs at least 1 row");
  }
  const double image_norm = reference.image.data.rowwise().norm().mean();
  const double cond_norm = reference.cond.data.rowwise().norm().mean();
  if (!(cond_norm > 0.0) || !std::isfinite(cond_norm) || !std::isfinite(image_norm)) {
    throw DataError("degenerate conditioning embedding: mean conditioning norm is " + std::to_string(cond_norm));
  }
  return image_norm / cond_norm;
}

Vector merge_embedding(std::span<const double> f_row, std::span<const double> h_row, double alpha) {
  Vector out(static_cast<Eigen::Index>(f_row.size() + h_row.size()));
  for (std::size_t i = 0; i < f_row.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = f_row[i];
  }
  for (std::size_t j = 0; j < h_row.size(); ++j) {
    out[static_cast<Eigen::Index>(f_row.size() + j)] = alpha * h_row[j];
  }
  return out;
}

RowMatrix merge_embeddings(const PairedEmbeddings& pairs, double alpha) {
  pairs.validate();
  RowMatrix out(pairs.image.data.rows(), pairs.image.data.cols() + pairs.cond.data.cols());
  out << pairs.image.data, alpha * pairs.cond.data;
  return out;
}

GaussianStats estimate_joint_gaussian(const PairedEmbeddings& pairs, double alpha, const EstimateOptions& options) {
  pairs.validate();
  const auto& img = pairs.image.data;
  const auto& cond = pairs.cond.data;
  const auto dim = static_cast<std::size_t>(img.cols() + cond.cols());
  return estimate_gaussian_blocks(
      img.rows(), dim,
      [&](Eigen::Index begin, Eigen::Index count) {
        RowMatrix block(count, img.cols() + cond.cols());
        block << img.middleRows(begin, count), alpha * cond.middleRows(begin, count);
        return block;
      },
      options);
}

FrechetResult compute_fid(const EmbeddingSet& reference_images, const EmbeddingSet& generated_images,
                          const EstimateOptions& options) {
  if (reference_images.cols() != generated_images.cols()) {
    throw DataError("dimension mismatch: " + std::to_string(reference_images.cols()) + " vs " +
                    std::to_string(generated_images.cols()) + " columns");
  }
  return frechet_distance(estimate_gaussian(reference_images, options),
                          estimate_gaussian(generated_images, options));
}

JointScore compute_fjd(const PairedEmbeddings& reference, const PairedEmbeddings& generated,
                       const JointConfig& config, const EstimateOptions& options) {
  check_compatible(reference, generated);
  const double alpha =
      config.alpha_mode == AlphaMode::automatic ? calibrate_alpha(reference) : config.alpha;
  check_alpha(alpha);

  JointScore score;
  score.result = frechet_distance(estimate_joint_gaussian(reference, alpha, options),
                                  estimate_joint_gaussian(generated, alpha, options));
  score.metadata.alpha = alpha;
  score.metadata.alpha_mode = config.alpha_mode;
  score.metadata.image_embedder_id = config.image_embedder_id;
  score.metadata.cond_embedder_id = config.cond_embedder_id;
  score.metadata.reference_id = config.reference_id;
  return score;
}

GaussianStats scale_conditioning(const GaussianStats& unit_joint, std::size_t image_dim, double alpha) {
  check_alpha(alpha);
  const auto d = static_cast<Eigen::Index>(unit_joint.dim());
  const auto di = static_cast<Eigen::Index>(image_dim);
  if (di > d) {
    throw DataError("dimension mismatch: image block larger than joint dimension");
  }
  Vector scale = Vector::Ones(d);
  scale.tail(d - di).setConstant(alpha);
  GaussianStats out;
  out.count = unit_joint.count;
  out.mean = unit_joint.mean.cwiseProduct(scale);
  out.cov = scale.asDiagonal() * unit_joint.cov * scale.asDiagonal();
  return out;
}

std::vector<AlphaPoint> sweep_alpha(const PairedEmbeddings& reference, const PairedEmbeddings& generated,
                                    std::span<const double> alphas, const EstimateOptions& options) {
  if (alphas.empty()) {
    throw UsageError("alpha sweep needs at least one alpha value");
  }
  for (double a : alphas) {
    check_alpha(a);
  }
  check_compatible(reference, generated);
  const auto ref_unit = estimate_joint_gaussian(reference, 1.0, options);
  const auto gen_unit = estimate_joint_gaussian(generated, 1.0, options);
  const auto image_dim = reference.image.cols();

  std::vector<AlphaPoint> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    out.push_back({a, frechet_distance(scale_conditioning(ref_unit, image_dim, a),
                                       scale_conditioning(gen_unit, image_dim, a))});
  }
  return out;
}

}  // namespace fjd
