#pragma once

#include "fjd/types.hpp"

namespace fjd::detail {

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns; empty when only values were requested
};

/// Eigen-decomposition of a symmetric matrix (lower triangle is read).
/// Backed by LAPACK's divide-and-conquer driver.
SymmetricEigen symmetric_eigen(const Matrix& sym, bool want_vectors);

}  // namespace fjd::detail
