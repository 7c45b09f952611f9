#include "sdcancel/kernels.hpp"

#include <exception>

#include "sdcancel/errors.hpp"
#include "sdcancel/lti.hpp"

namespace sdcancel::kernels {

namespace {

CMatrix fir_response(const FirCoefficients& q, Complex z) {
  CMatrix out = CMatrix::Zero(q.front().rows(), q.front().cols());
  const Complex z_inv = 1.0 / z;
  Complex power = 1.0;
  for (const Matrix& tap : q) {
    out += power * tap.cast<Complex>();
    power *= z_inv;
  }
  return out;
}

CMatrix affine_value(const AffineGrid& grid, Index k,
                     const FirCoefficients& q) {
  return grid.t1[k] + grid.t2[k] * fir_response(q, grid.z[k]) * grid.t3[k];
}

// Runs body(i) for i in [0, n) in parallel and rethrows the first failure.
template <typename Body>
void parallel_for(Index n, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(sdcancel_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double affine_sigma(const AffineGrid& grid, Index k, const FirCoefficients& q) {
  return linalg::sigma_max(affine_value(grid, k, q));
}

Vector affine_subgradient(const AffineGrid& grid, Index k,
                          const FirCoefficients& q) {
  const linalg::TopSingular top = linalg::top_singular(affine_value(grid, k, q));
  // d sigma / d Q_l(r, c) = Re(conj(a_r) b_c z^-l), a = T2^H u, b = T3 v.
  const CVector a = grid.t2[k].adjoint() * top.u;
  const CVector b = grid.t3[k] * top.v;
  const Index rows = q.front().rows(), cols = q.front().cols();
  Vector g(static_cast<Index>(q.size()) * rows * cols);
  const Complex z_inv = 1.0 / grid.z[k];
  Complex power = 1.0;
  Index pos = 0;
  for (std::size_t l = 0; l < q.size(); ++l) {
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) {
        g(pos++) = (std::conj(a(r)) * b(c) * power).real();
      }
    }
    power *= z_inv;
  }
  return g;
}

Index argmax(const std::vector<double>& values) {
  Index best = 0;
  for (Index i = 1; i < static_cast<Index>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace serial {

std::vector<CMatrix> response_sweep(const StateSpace& sys,
                                    std::span<const double> omegas) {
  std::vector<CMatrix> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(frequency_response(sys, w));
  return out;
}

std::vector<double> sigma_max_sweep(const StateSpace& sys,
                                    std::span<const double> omegas) {
  std::vector<double> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    out.push_back(linalg::sigma_max(frequency_response(sys, w)));
  }
  return out;
}

std::vector<double> affine_sigma_sweep(const AffineGrid& grid,
                                       const FirCoefficients& q) {
  std::vector<double> out(grid.size());
  for (Index k = 0; k < grid.size(); ++k) out[k] = affine_sigma(grid, k, q);
  return out;
}

}  // namespace serial

namespace omp {

std::vector<CMatrix> response_sweep(const StateSpace& sys,
                                    std::span<const double> omegas) {
  std::vector<CMatrix> out(omegas.size());
  parallel_for(static_cast<Index>(omegas.size()),
               [&](Index i) { out[i] = frequency_response(sys, omegas[i]); });
  return out;
}

std::vector<double> sigma_max_sweep(const StateSpace& sys,
                                    std::span<const double> omegas) {
  std::vector<double> out(omegas.size());
  parallel_for(static_cast<Index>(omegas.size()), [&](Index i) {
    out[i] = linalg::sigma_max(frequency_response(sys, omegas[i]));
  });
  return out;
}

std::vector<double> affine_sigma_sweep(const AffineGrid& grid,
                                       const FirCoefficients& q) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](Index k) { out[k] = affine_sigma(grid, k, q); });
  return out;
}

}  // namespace omp

}  // namespace sdcancel::kernels
