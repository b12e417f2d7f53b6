#include "fjd/embedders.hpp"

#include "fjd/error.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fjd {

namespace {

int as_label(double value) {
  if (!std::isfinite(value) || value != std::floor(value)) {
    throw DataError("label must be an integer, got " + std::to_string(value));
  }
  return static_cast<int>(value);
}

void check_label(int label, int num_classes) {
  if (num_classes <= 0) {
    throw UsageError("number of classes must be positive");
  }
  if (label < 0 || label >= num_classes) {
    throw DataError("label " + std::to_string(label) + " out of range [0, " + std::to_string(num_classes) + ")");
  }
}

Matrix thin_q(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

void normalise_signs(Matrix& basis) {
  for (Eigen::Index r = 0; r < basis.rows(); ++r) {
    Eigen::Index idx = 0;
    basis.row(r).cwiseAbs().maxCoeff(&idx);
    if (basis(r, idx) < 0.0) {
      basis.row(r) *= -1.0;
    }
  }
}

}  // namespace

Vector one_hot(int label, int num_classes) {
  check_label(label, num_classes);
  Vector v = Vector::Zero(num_classes);
  v[label] = 1.0;
  return v;
}

Vector n_hot(std::span<const int> labels, int num_classes) {
  if (num_classes <= 0) {
    throw UsageError("number of classes must be positive");
  }
  Vector v = Vector::Zero(num_classes);
  for (int label : labels) {
    check_label(label, num_classes);
    v[label] = 1.0;
  }
  return v;
}

Vector flatten_pixels(const Image& image) {
  Vector v(static_cast<Eigen::Index>(image.size()));
  for (std::size_t i = 0; i < image.size(); ++i) {
    const float p = image.pixels[i];
    if (!(p >= 0.0f && p <= 1.0f)) {
      throw DataError("pixel value out of range [0, 1] at index " + std::to_string(i));
    }
    v[static_cast<Eigen::Index>(i)] = p;
  }
  return v;
}

Image reshape_pixels(std::span<const double> values, int height, int width, int channels) {
  Image img(height, width, channels);
  if (values.size() != img.size()) {
    throw DataError("dimension mismatch: expected " + std::to_string(img.size()) + " values, got " +
                    std::to_string(values.size()));
  }
  std::transform(values.begin(), values.end(), img.pixels.begin(),
                 [](double v) { return static_cast<float>(v); });
  return img;
}

Vector bbox_geometric(const BBox& box, int shape_class, int num_classes) {
  const double coords[] = {box.x_center, box.y_center, box.width, box.height};
  for (double c : coords) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw DataError("bounding box coordinate out of range [0, 1]");
    }
  }
  if (!(box.width > 0.0 && box.height > 0.0)) {
    throw DataError("bounding box must have positive width and height");
  }
  Vector v(4 + num_classes);
  v << box.x_center, box.y_center, box.width, box.height, one_hot(shape_class, num_classes);
  return v;
}

Vector PcaModel::encode(const Eigen::Ref<const Vector>& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw DataError("dimension mismatch: PCA expects " + std::to_string(input_dim()) + " inputs, got " +
                    std::to_string(x.size()));
  }
  return basis * (x - mean);
}

RowMatrix PcaModel::encode_rows(const Eigen::Ref<const RowMatrix>& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw DataError("dimension mismatch: PCA expects " + std::to_string(input_dim()) + " inputs, got " +
                    std::to_string(x.cols()));
  }
  return (x.rowwise() - mean.transpose()) * basis.transpose();
}

Vector PcaModel::decode(const Eigen::Ref<const Vector>& z) const {
  if (z.size() != latent_dim) {
    throw DataError("dimension mismatch: PCA latent has " + std::to_string(latent_dim) + " entries, got " +
                    std::to_string(z.size()));
  }
  return mean + basis.transpose() * z;
}

Vector pca_encode(const PcaModel& model, const Eigen::Ref<const Vector>& x) { return model.encode(x); }

PcaModel pca_fit(const EmbeddingSet& data, int latent_dim, const PcaOptions& options) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto d = static_cast<Eigen::Index>(data.cols());
  if (latent_dim < 1) {
    throw UsageError("latent dimension must be at least 1");
  }
  if (latent_dim > std::min<Eigen::Index>(n - 1, d)) {
    throw UsageError("latent dimension too large: " + std::to_string(latent_dim) + " > min(N-1, D) = " +
                     std::to_string(std::max<Eigen::Index>(0, std::min<Eigen::Index>(n - 1, d))));
  }
  if (!data.data.allFinite()) {
    throw DataError("invalid embedding: non-finite value in PCA training data");
  }

  PcaModel model;
  model.latent_dim = latent_dim;
  model.mean = data.data.colwise().mean().transpose();
  const RowMatrix centered = data.data.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  const double total_variance = centered.squaredNorm() / denom;

  Matrix directions;  // D x M
  Vector values;      // M, descending
  if (static_cast<std::size_t>(d) <= options.dense_limit) {
    Matrix cov = Matrix::Zero(d, d);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / denom);
    const auto eig = detail::symmetric_eigen(cov, true);
    directions = eig.vectors.rightCols(latent_dim).rowwise().reverse();
    values = eig.values.tail(latent_dim).reverse();
  } else {
    // Randomized range finder with power iterations, then an exact
    // Rayleigh-Ritz step on the captured subspace.
    const Eigen::Index k = std::min<Eigen::Index>(latent_dim + options.oversample, std::min(n, d));
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Matrix omega(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        omega(i, j) = normal(rng);
      }
    }
    Matrix q = thin_q(centered * omega);
    for (int it = 0; it < options.power_iterations; ++it) {
      const Matrix z = thin_q(centered.transpose() * q);
      q = thin_q(centered * z);
    }
    const Matrix bt = centered.transpose() * q;  // D x k
    Eigen::BDCSVD<Matrix> svd(bt, Eigen::ComputeThinU);
    directions = svd.matrixU().leftCols(latent_dim);
    values = svd.singularValues().head(latent_dim).array().square() / denom;
  }

  model.basis = thin_q(directions).transpose();
  normalise_signs(model.basis);
  model.variances = values;
  model.explained_variance_ratio =
      total_variance > 0.0 ? std::clamp(values.sum() / total_variance, 0.0, 1.0) : 1.0;
  return model;
}

const char* to_string(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::one_hot: return "one_hot";
    case EmbedderKind::n_hot: return "n_hot";
    case EmbedderKind::pixels: return "pixels";
    case EmbedderKind::pca: return "pca";
    case EmbedderKind::bbox_geometric: return "bbox_geometric";
    case EmbedderKind::precomputed: return "precomputed";
  }
  return "unknown";
}

Embedder Embedder::make_one_hot(int num_classes) {
  if (num_classes <= 0) {
    throw UsageError("number of classes must be positive");
  }
  Embedder e(EmbedderKind::one_hot, "one_hot:" + std::to_string(num_classes), static_cast<std::size_t>(num_classes));
  e.classes_ = num_classes;
  return e;
}

Embedder Embedder::make_n_hot(int num_classes) {
  if (num_classes <= 0) {
    throw UsageError("number of classes must be positive");
  }
  Embedder e(EmbedderKind::n_hot, "n_hot:" + std::to_string(num_classes), static_cast<std::size_t>(num_classes));
  e.classes_ = num_classes;
  return e;
}

Embedder Embedder::make_pixels(int height, int width, int channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw UsageError("image shape must be positive");
  }
  Embedder e(EmbedderKind::pixels,
             "pixels:" + std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels),
             static_cast<std::size_t>(height) * width * channels);
  e.height_ = height;
  e.width_ = width;
  e.channels_ = channels;
  return e;
}

Embedder Embedder::make_pca(std::shared_ptr<const PcaModel> model, std::string id) {
  if (!model) {
    throw UsageError("PCA embedder needs a fitted model");
  }
  Embedder e(EmbedderKind::pca, std::move(id), static_cast<std::size_t>(model->latent_dim));
  e.pca_ = std::move(model);
  return e;
}

Embedder Embedder::make_bbox_geometric(int num_classes) {
  if (num_classes <= 0) {
    throw UsageError("number of classes must be positive");
  }
  Embedder e(EmbedderKind::bbox_geometric, "bbox_geometric:" + std::to_string(num_classes),
             static_cast<std::size_t>(4 + num_classes));
  e.classes_ = num_classes;
  return e;
}

Embedder Embedder::make_precomputed(std::string id, std::size_t dim) {
  return Embedder(EmbedderKind::precomputed, std::move(id), dim);
}

Vector Embedder::encode(std::span<const double> input) const {
  switch (kind_) {
    case EmbedderKind::one_hot:
      if (input.size() != 1) {
        throw DataError("one-hot embedder expects a single label");
      }
      return one_hot(as_label(input[0]), classes_);
    case EmbedderKind::n_hot: {
      std::vector<int> labels;
      labels.reserve(input.size());
      for (double v : input) {
        labels.push_back(as_label(v));
      }
      return n_hot(labels, classes_);
    }
    case EmbedderKind::pixels:
      return flatten_pixels(reshape_pixels(input, height_, width_, channels_));
    case EmbedderKind::pca:
      return pca_->encode(Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size())));
    case EmbedderKind::bbox_geometric:
      if (input.size() != 5) {
        throw DataError("bbox embedder expects (x, y, w, h, class)");
      }
      return bbox_geometric({input[0], input[1], input[2], input[3]}, as_label(input[4]), classes_);
    case EmbedderKind::precomputed:
      if (input.size() != output_dim_) {
        throw DataError("dimension mismatch: expected " + std::to_string(output_dim_) + " values, got " +
                        std::to_string(input.size()));
      }
      return Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  }
  throw UsageError("unknown embedder kind");
}

EmbeddingSet Embedder::encode_rows(const RowMatrix& inputs) const {
  if (kind_ == EmbedderKind::pca) {
    return EmbeddingSet(pca_->encode_rows(inputs), id_);
  }
  RowMatrix out(inputs.rows(), static_cast<Eigen::Index>(output_dim_));
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    const auto row = inputs.row(r);
    out.row(r) = encode(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).transpose();
  }
  return EmbeddingSet(std::move(out), id_);
}

}  // namespace fjd
