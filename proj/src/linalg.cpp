#include "linalg.hpp"

#include "fjd/error.hpp"

#include <lapacke.h>

#include <string>

namespace fjd::detail {

SymmetricEigen symmetric_eigen(const Matrix& sym, bool want_vectors) {
  const auto n = static_cast<lapack_int>(sym.rows());
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) {
    return out;
  }
  Matrix work = sym;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n,
                                         work.data(), n, out.values.data());
  if (info != 0) {
    throw NumericalError("symmetric eigensolver failed (dsyevd info=" + std::to_string(info) + ")");
  }
  if (want_vectors) {
    out.vectors = std::move(work);
  }
  return out;
}

}  // namespace fjd::detail
