#include "fjd/frechet.hpp"

#include "fjd/error.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

namespace fjd {

namespace {

constexpr Eigen::Index kBlockRows = 256;
constexpr std::size_t kMaxLanes = 8;

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a << " vs " << b;
    throw DataError(msg.str());
  }
}

// Square roots of the eigenvalues, clamping round-off negatives to zero.
int clamp_spectrum(Vector& values) {
  if (values.size() == 0) {
    return 0;
  }
  const double scale = values.cwiseAbs().maxCoeff();
  const double noise_floor =
      static_cast<double>(values.size()) * std::numeric_limits<double>::epsilon() * scale;
  int clamped = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < -kPsdTolerance * scale) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "matrix not PSD within tolerance: eigenvalue " << values[i]
          << " (largest magnitude " << scale << ")";
      throw NumericalError(msg.str());
    }
    if (values[i] < 0.0) {
      values[i] = 0.0;
      ++clamped;
    } else if (values[i] < noise_floor) {
      // Below the eigensolver's resolution; its square root would be pure noise.
      values[i] = 0.0;
    }
  }
  return clamped;
}

}  // namespace

MomentAccumulator::MomentAccumulator(std::size_t dim)
    : mean_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      comoment_(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

void MomentAccumulator::add(const Eigen::Ref<const Vector>& row) {
  require_same_dim(dim(), static_cast<std::size_t>(row.size()));
  ++count_;
  const Vector delta = row - mean_;
  mean_ += delta / static_cast<double>(count_);
  const double weight = static_cast<double>(count_ - 1) / static_cast<double>(count_);
  comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta, weight);
}

void MomentAccumulator::add_rows(const Eigen::Ref<const RowMatrix>& rows) {
  require_same_dim(dim(), static_cast<std::size_t>(rows.cols()));
  const auto nb = static_cast<std::size_t>(rows.rows());
  if (nb == 0) {
    return;
  }
  const Vector block_mean = rows.colwise().mean().transpose();
  const RowMatrix centered = rows.rowwise() - block_mean.transpose();
  comoment_.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());

  const std::size_t na = count_;
  const std::size_t n = na + nb;
  const Vector delta = block_mean - mean_;
  const double weight = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(n);
  if (na > 0) {
    comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta, weight);
  }
  mean_ += delta * (static_cast<double>(nb) / static_cast<double>(n));
  count_ = n;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  // A default-constructed accumulator is the identity for any dimension.
  if (other.count_ == 0 && other.dim() == 0) {
    return;
  }
  if (count_ == 0 && dim() == 0) {
    *this = other;
    return;
  }
  require_same_dim(dim(), other.dim());
  if (other.count_ == 0) {
    return;
  }
  if (count_ == 0) {
    *this = other;
    return;
  }
  const std::size_t n = count_ + other.count_;
  const Vector delta = other.mean_ - mean_;
  const double weight =
      static_cast<double>(count_) * static_cast<double>(other.count_) / static_cast<double>(n);
  comoment_ += other.comoment_;
  comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta, weight);
  mean_ += delta * (static_cast<double>(other.count_) / static_cast<double>(n));
  count_ = n;
}

Matrix MomentAccumulator::comoment() const {
  return comoment_.selfadjointView<Eigen::Lower>();
}

GaussianStats MomentAccumulator::finalize() const {
  if (count_ < 2) {
    throw DataError("insufficient samples: need at least 2 rows, have " + std::to_string(count_));
  }
  GaussianStats stats;
  stats.mean = mean_;
  stats.cov = comoment_.selfadjointView<Eigen::Lower>();
  stats.cov /= static_cast<double>(count_ - 1);
  stats.count = count_;
  return stats;
}

MomentAccumulator merge_accumulators(const MomentAccumulator& a, const MomentAccumulator& b) {
  MomentAccumulator out = a;
  out.merge(b);
  return out;
}

GaussianStats estimate_gaussian(const EmbeddingSet& embeddings, const EstimateOptions& options) {
  return estimate_gaussian(embeddings.data, options);
}

GaussianStats estimate_gaussian(const Eigen::Ref<const RowMatrix>& rows, const EstimateOptions& options) {
  return estimate_gaussian_blocks(
      rows.rows(), static_cast<std::size_t>(rows.cols()),
      [&rows](Eigen::Index begin, Eigen::Index count) -> RowMatrix { return rows.middleRows(begin, count); },
      options);
}

GaussianStats estimate_gaussian_blocks(Eigen::Index n, std::size_t dim, const BlockSource& source,
                                       const EstimateOptions& options) {
  if (n < 2) {
    throw DataError("insufficient samples: need at least 2 rows, have " + std::to_string(n));
  }
  const auto blocks = static_cast<std::size_t>((n + kBlockRows - 1) / kBlockRows);
  const std::size_t lanes = std::min(kMaxLanes, blocks);
  std::vector<MomentAccumulator> lane_acc(lanes, MomentAccumulator(dim));

  auto run_lane = [&](std::size_t lane) {
    for (std::size_t b = lane; b < blocks; b += lanes) {
      const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlockRows;
      const Eigen::Index len = std::min(kBlockRows, n - begin);
      const RowMatrix block = source(begin, len);
      for (Eigen::Index i = 0; i < len; ++i) {
        if (!block.row(i).allFinite()) {
          throw DataError("invalid embedding: non-finite value in row " + std::to_string(begin + i));
        }
      }
      lane_acc[lane].add_rows(block);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, lanes);
  if (workers == 1) {
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      run_lane(lane);
    }
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t lane = w; lane < lanes; lane += workers) {
              run_lane(lane);
            }
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures) {
      if (failure) {
        std::rethrow_exception(failure);
      }
    }
  }

  MomentAccumulator total = std::move(lane_acc.front());
  for (std::size_t lane = 1; lane < lanes; ++lane) {
    total.merge(lane_acc[lane]);
  }
  return total.finalize();
}

TraceSqrtResult trace_sqrt_product_detail(const Matrix& cov_a, const Matrix& cov_b) {
  if (cov_a.rows() != cov_a.cols() || cov_b.rows() != cov_b.cols()) {
    throw DataError("dimension mismatch: covariance matrices must be square");
  }
  require_same_dim(static_cast<std::size_t>(cov_a.rows()), static_cast<std::size_t>(cov_b.rows()));

  TraceSqrtResult out;
  if (cov_a == cov_b) {
    // (A A)^{1/2} = A for PSD A, so only the PSD check is needed.
    auto eig = detail::symmetric_eigen(cov_a, false);
    out.clamped_eigenvalues = clamp_spectrum(eig.values);
    out.value = cov_a.trace();
    return out;
  }
  auto eig_a = detail::symmetric_eigen(cov_a, true);
  out.clamped_eigenvalues += clamp_spectrum(eig_a.values);

  // A^{1/2} B A^{1/2} = V (G^T B G) V^T with G = V diag(sqrt(lambda)); the inner
  // matrix is orthogonally similar, so it has the same spectrum.
  const Matrix g = eig_a.vectors * eig_a.values.cwiseSqrt().asDiagonal();
  const Matrix bg = cov_b.selfadjointView<Eigen::Lower>() * g;
  Matrix inner = g.transpose() * bg;
  inner = 0.5 * (inner + inner.transpose()).eval();

  auto eig_inner = detail::symmetric_eigen(inner, false);
  out.clamped_eigenvalues += clamp_spectrum(eig_inner.values);
  out.value = eig_inner.values.cwiseSqrt().sum();
  return out;
}

double trace_sqrt_product(const Matrix& cov_a, const Matrix& cov_b) {
  return trace_sqrt_product_detail(cov_a, cov_b).value;
}

FrechetResult frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  require_same_dim(a.dim(), b.dim());
  const auto ts = trace_sqrt_product_detail(a.cov, b.cov);
  FrechetResult r;
  r.mean_term = (a.mean - b.mean).squaredNorm();
  r.trace_a = a.cov.trace();
  r.trace_b = b.cov.trace();
  r.trace_term = ts.value;
  r.clamped_eigenvalues = ts.clamped_eigenvalues;
  r.value = std::max(0.0, r.mean_term + r.trace_a + r.trace_b - 2.0 * r.trace_term);
  return r;
}

}  // namespace fjd
