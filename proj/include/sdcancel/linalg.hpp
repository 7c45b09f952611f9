#pragma once

#include <optional>

#include "sdcancel/state_space.hpp"

namespace sdcancel::linalg {

/// Matrix exponential (scaling and squaring with a Padé approximant).
Matrix expm(const Matrix& m);

/// Largest singular value.
double sigma_max(const CMatrix& m);
double sigma_max(const Matrix& m);

/// Largest singular value together with its left/right singular vectors.
struct TopSingular {
  double sigma = 0.0;
  CVector u;
  CVector v;
};
TopSingular top_singular(const CMatrix& m);

/// Eigenvalues of a real square matrix.
CVector eigenvalues(const Matrix& m);

/**
 * Orthonormal basis of the invariant subspace of `h` belonging to the
 * eigenvalues with negative real part, from an ordered real Schur form.
 *
 * Returns nullopt if any eigenvalue lies within `axis_tol` (relative to
 * max(1, |lambda|)) of the imaginary axis, or if the stable subspace does
 * not have dimension h.rows()/2.
 */
std::optional<Matrix> stable_subspace(const Matrix& h, double axis_tol);

/**
 * Stabilizing solution X of the Riccati equation whose Hamiltonian is `h`
 * (size 2n), i.e. X = U21 * inv(U11) for the stable invariant subspace
 * [U11; U21]. Returns nullopt when the Hamiltonian is not in dom(Ric).
 */
std::optional<Matrix> riccati_from_hamiltonian(const Matrix& h,
                                               double axis_tol = 1e-10);

/// Diagonal scaling d (powers of two) such that diag(d)^-1 m diag(d) has
/// rows and columns of comparable norm (LAPACK balancing, no permutation).
Vector balancing_scales(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

}  // namespace sdcancel::linalg
