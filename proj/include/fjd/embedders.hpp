#pragma once

#include "fjd/image.hpp"
#include "fjd/types.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace fjd {

/// Axis-aligned box in normalised canvas coordinates.
struct BBox {
  double x_center = 0.0;
  double y_center = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool operator==(const BBox&) const = default;
};

Vector one_hot(int label, int num_classes);
/// Indicator vector of a label set; duplicate labels are harmless.
Vector n_hot(std::span<const int> labels, int num_classes);

/// Row-major flattening of an image with values in [0, 1].
Vector flatten_pixels(const Image& image);
Image reshape_pixels(std::span<const double> values, int height, int width, int channels = 1);

/// (x, y, w, h) followed by one_hot(shape_class, num_classes).
Vector bbox_geometric(const BBox& box, int shape_class, int num_classes);

/// Linear projection onto the leading principal directions of a training set.
struct PcaModel {
  Vector mean;            // D_in
  Matrix basis;           // M x D_in, orthonormal rows
  Vector variances;       // M leading eigenvalues of the sample covariance, descending
  int latent_dim = 0;
  double explained_variance_ratio = 0.0;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  Vector encode(const Eigen::Ref<const Vector>& x) const;
  RowMatrix encode_rows(const Eigen::Ref<const RowMatrix>& x) const;
  Vector decode(const Eigen::Ref<const Vector>& z) const;
};

struct PcaOptions {
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  int oversample = 16;
  int power_iterations = 4;
  /// Inputs up to this width use a dense covariance eigensolve; wider inputs
  /// use a seeded randomized range finder.
  std::size_t dense_limit = 1024;
};

/// Fits a PCA model. Each basis row is sign-normalised so that its
/// largest-magnitude entry (first one on ties) is positive.
PcaModel pca_fit(const EmbeddingSet& data, int latent_dim, const PcaOptions& options = {});
Vector pca_encode(const PcaModel& model, const Eigen::Ref<const Vector>& x);

enum class EmbedderKind { one_hot, n_hot, pixels, pca, bbox_geometric, precomputed };

const char* to_string(EmbedderKind kind);

/// A deterministic map from a numeric input record to a fixed-width vector.
///
/// Input records: one_hot takes {label}; n_hot takes the label list; pixels
/// takes the flattened raster; pca takes a D_in vector; bbox_geometric takes
/// {x, y, w, h, class}; precomputed passes a vector of output_dim through.
class Embedder {
 public:
  static Embedder make_one_hot(int num_classes);
  static Embedder make_n_hot(int num_classes);
  static Embedder make_pixels(int height, int width, int channels = 1);
  static Embedder make_pca(std::shared_ptr<const PcaModel> model, std::string id);
  static Embedder make_bbox_geometric(int num_classes);
  static Embedder make_precomputed(std::string id, std::size_t dim);

  const std::string& id() const { return id_; }
  EmbedderKind kind() const { return kind_; }
  std::size_t output_dim() const { return output_dim_; }
  const PcaModel* pca_model() const { return pca_.get(); }

  Vector encode(std::span<const double> input) const;
  /// Encodes every row of `inputs`.
  EmbeddingSet encode_rows(const RowMatrix& inputs) const;

 private:
  Embedder(EmbedderKind kind, std::string id, std::size_t output_dim)
      : kind_(kind), id_(std::move(id)), output_dim_(output_dim) {}

  EmbedderKind kind_;
  std::string id_;
  std::size_t output_dim_;
  int classes_ = 0;
  int height_ = 0, width_ = 0, channels_ = 0;
  std::shared_ptr<const PcaModel> pca_;
};

}  // namespace fjd
