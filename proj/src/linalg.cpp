#include "sdcancel/linalg.hpp"

#include <cmath>
#include <vector>

#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "sdcancel/errors.hpp"

namespace sdcancel::linalg {

Matrix expm(const Matrix& m) {
  if (!m.allFinite()) throw NumericError("expm: non-finite input");
  Matrix result = m.exp();
  if (!result.allFinite()) throw NumericError("expm: overflow");
  return result;
}

double sigma_max(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

TopSingular top_singular(const CMatrix& m) {
  TopSingular out;
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.sigma = svd.singularValues()(0);
  out.u = svd.matrixU().col(0);
  out.v = svd.matrixV().col(0);
  return out;
}

CVector eigenvalues(const Matrix& m) {
  if (m.rows() == 0) return CVector(0);
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue solver failed to converge");
  }
  return solver.eigenvalues();
}

namespace {

lapack_logical select_open_left_half(const double* re, const double* /*im*/) {
  return *re < 0.0 ? 1 : 0;
}

}  // namespace

std::optional<Matrix> stable_subspace(const Matrix& h, double axis_tol) {
  const Index n2 = h.rows();
  if (h.cols() != n2 || n2 % 2 != 0) {
    throw DimensionError("stable_subspace: need an even-sized square matrix");
  }
  if (n2 == 0) return Matrix(0, 0);
  Matrix t = h;  // column-major, overwritten by the Schur form
  Matrix vs(n2, n2);
  std::vector<double> wr(n2), wi(n2);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', 'S', select_open_left_half,
      static_cast<lapack_int>(n2), t.data(), static_cast<lapack_int>(n2),
      &sdim, wr.data(), wi.data(), vs.data(), static_cast<lapack_int>(n2));
  if (info != 0) {
    // info > n means reordering failed: treat like a boundary eigenvalue.
    if (info > n2) return std::nullopt;
    throw NumericError("real Schur decomposition failed");
  }
  for (Index i = 0; i < n2; ++i) {
    const double mag = std::max(1.0, std::hypot(wr[i], wi[i]));
    if (std::abs(wr[i]) <= axis_tol * mag) return std::nullopt;
  }
  if (sdim != n2 / 2) return std::nullopt;
  return Matrix(vs.leftCols(n2 / 2));
}

std::optional<Matrix> riccati_from_hamiltonian(const Matrix& h,
                                               double axis_tol) {
  auto basis = stable_subspace(h, axis_tol);
  if (!basis) return std::nullopt;
  const Index n = h.rows() / 2;
  if (n == 0) return Matrix(0, 0);
  const Matrix u11 = basis->topRows(n);
  const Matrix u21 = basis->bottomRows(n);
  Eigen::FullPivLU<Matrix> lu(u11);
  if (lu.rcond() < 1e-13) return std::nullopt;
  Matrix x = u21 * lu.inverse();
  x = 0.5 * (x + x.transpose()).eval();
  if (!x.allFinite()) return std::nullopt;
  return x;
}

Vector balancing_scales(const Matrix& m) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  Vector scale = Vector::Ones(n);
  if (n == 0) return scale;
  Matrix work = m;
  lapack_int ilo = 0, ihi = 0;
  const lapack_int info = LAPACKE_dgebal(LAPACK_COL_MAJOR, 'S', n, work.data(),
                                         n, &ilo, &ihi, scale.data());
  if (info != 0) throw NumericError("balancing failed");
  return scale;
}

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace sdcancel::linalg
