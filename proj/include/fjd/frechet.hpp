#pragma once

#include "fjd/types.hpp"

#include <cstddef>
#include <functional>

namespace fjd {

/// Relative tolerance below which a negative eigenvalue is treated as round-off
/// and clamped to zero. Anything more negative is a hard error.
inline constexpr double kPsdTolerance = 1e-6;

/// Fitted Gaussian: mean, (symmetric) covariance with the N-1 denominator, and
/// the number of rows it was estimated from.
struct GaussianStats {
  Vector mean;
  Matrix cov;
  std::size_t count = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Streaming first and second moments. Accumulators built over disjoint row
/// sets can be merged in any order (pairwise update of Chan et al.).
///
/// Only the lower triangle of the internal co-moment is maintained; use
/// comoment() or finalize() for the full symmetric matrix.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t dim);

  void add(const Eigen::Ref<const Vector>& row);
  /// Adds a block of rows (one observation per row).
  void add_rows(const Eigen::Ref<const RowMatrix>& rows);
  void merge(const MomentAccumulator& other);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  Matrix comoment() const;

  /// Gaussian with the unbiased (N-1) covariance. Requires count() >= 2.
  GaussianStats finalize() const;

 private:
  std::size_t count_ = 0;
  Vector mean_;
  Matrix comoment_;  // lower triangle valid
};

MomentAccumulator merge_accumulators(const MomentAccumulator& a, const MomentAccumulator& b);

struct EstimateOptions {
  /// Worker threads for accumulation. Results do not depend on this value.
  unsigned threads = 1;
};

/// Mean and unbiased covariance of the rows of `embeddings`.
///
/// Rows are cut into fixed-size blocks that are dealt round-robin to a fixed
/// number of lanes, so the floating-point reduction order is the same for any
/// thread count.
GaussianStats estimate_gaussian(const EmbeddingSet& embeddings, const EstimateOptions& options = {});
GaussianStats estimate_gaussian(const Eigen::Ref<const RowMatrix>& rows, const EstimateOptions& options = {});

/// Produces rows [begin, begin + count) of a virtual row matrix.
using BlockSource = std::function<RowMatrix(Eigen::Index begin, Eigen::Index count)>;

/// Same reduction as estimate_gaussian over rows supplied block by block.
GaussianStats estimate_gaussian_blocks(Eigen::Index rows, std::size_t dim, const BlockSource& source,
                                       const EstimateOptions& options = {});

struct TraceSqrtResult {
  double value = 0.0;
  int clamped_eigenvalues = 0;
};

/// Tr((A B)^{1/2}) for symmetric PSD A and B, computed as the trace of the
/// square root of the symmetric matrix A^{1/2} B A^{1/2}.
TraceSqrtResult trace_sqrt_product_detail(const Matrix& cov_a, const Matrix& cov_b);
double trace_sqrt_product(const Matrix& cov_a, const Matrix& cov_b);

/// Squared Frechet distance d^2 and its decomposition.
struct FrechetResult {
  double value = 0.0;       // d^2 = mean_term + trace_a + trace_b - 2 trace_term (clamped at 0)
  double trace_term = 0.0;  // Tr((Sa Sb)^{1/2})
  double mean_term = 0.0;   // |mu_a - mu_b|^2
  double trace_a = 0.0;
  double trace_b = 0.0;
  int clamped_eigenvalues = 0;
};

FrechetResult frechet_distance(const GaussianStats& a, const GaussianStats& b);

}  // namespace fjd
