#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace fjd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x D matrix of embedding rows plus a provenance tag.
struct EmbeddingSet {
  RowMatrix data;
  std::string id;

  EmbeddingSet() = default;
  explicit EmbeddingSet(RowMatrix rows, std::string source = {})
      : data(std::move(rows)), id(std::move(source)) {}

  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data.cols()); }
};

}  // namespace fjd
