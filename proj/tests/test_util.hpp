#pragma once

#include <random>

#include "sdcancel/state_space.hpp"

namespace testutil {

using sdcancel::Index;
using sdcancel::Matrix;
using sdcancel::StateSpace;

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

/// Random continuous system with every eigenvalue real part <= -0.5.
inline StateSpace random_stable_continuous(std::mt19937_64& rng, Index n, Index m,
                                           Index p) {
  Matrix a = random_matrix(rng, n, n);
  const double shift = a.eigenvalues().real().maxCoeff() + 0.5;
  a -= shift * Matrix::Identity(n, n);
  return StateSpace::Continuous(a, random_matrix(rng, n, m), random_matrix(rng, p, n),
                                random_matrix(rng, p, m));
}

/// Random discrete system with spectral radius `radius`.
inline StateSpace random_stable_discrete(std::mt19937_64& rng, Index n, Index m,
                                         Index p, double radius = 0.8,
                                         double period = 1.0) {
  Matrix a = random_matrix(rng, n, n);
  a *= radius / a.eigenvalues().cwiseAbs().maxCoeff();
  return StateSpace::Discrete(a, random_matrix(rng, n, m), random_matrix(rng, p, n),
                              random_matrix(rng, p, m), period);
}

}  // namespace testutil
