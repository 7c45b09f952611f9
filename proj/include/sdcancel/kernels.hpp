#pragma once

// Data-parallel frequency-domain kernels. Every kernel has a straightforward
// serial reference in `serial::` and an OpenMP version in `omp::` that must
// produce identical results (each grid point is computed independently and
// reductions are done serially in index order).

#include <span>
#include <vector>

#include "sdcancel/linalg.hpp"
#include "sdcancel/state_space.hpp"

namespace sdcancel::kernels {

/// Pointwise affine family T(Q)(z_k) = T1_k + T2_k Q(z_k) T3_k with a 2x2
/// (or general square) FIR parameter Q(z) = sum_l Q_l z^-l.
struct AffineGrid {
  std::vector<Complex> z;    // evaluation points on the unit circle
  std::vector<CMatrix> t1;   // p x m
  std::vector<CMatrix> t2;   // p x nu
  std::vector<CMatrix> t3;   // ny x m
  Index size() const { return static_cast<Index>(z.size()); }
};

/// FIR coefficients stacked as Q_0, Q_1, ... (each nu x ny).
using FirCoefficients = std::vector<Matrix>;

/// sigma_max of T(Q) at one grid point.
double affine_sigma(const AffineGrid& grid, Index k, const FirCoefficients& q);

/// Subgradient of sigma_max(T(Q)(z_k)) w.r.t. the stacked coefficients
/// (column-major within each Q_l, l-major across taps).
Vector affine_subgradient(const AffineGrid& grid, Index k,
                          const FirCoefficients& q);

namespace serial {

std::vector<CMatrix> response_sweep(const StateSpace& sys,
                                    std::span<const double> omegas);
std::vector<double> sigma_max_sweep(const StateSpace& sys,
                                    std::span<const double> omegas);
std::vector<double> affine_sigma_sweep(const AffineGrid& grid,
                                       const FirCoefficients& q);

}  // namespace serial

namespace omp {

std::vector<CMatrix> response_sweep(const StateSpace& sys,
                                    std::span<const double> omegas);
std::vector<double> sigma_max_sweep(const StateSpace& sys,
                                    std::span<const double> omegas);
std::vector<double> affine_sigma_sweep(const AffineGrid& grid,
                                       const FirCoefficients& q);

}  // namespace omp

/// Index of the first maximum (ties resolved towards the lower index).
Index argmax(const std::vector<double>& values);

}  // namespace sdcancel::kernels
