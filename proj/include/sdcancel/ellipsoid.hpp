#pragma once

#include <functional>
#include <optional>

#include "sdcancel/state_space.hpp"

namespace sdcancel {

/// Values and subgradients of a convex program at one point. The point is
/// feasible when `constraint <= 0`.
struct ConvexCut {
  double objective = 0.0;
  Vector objective_grad;
  double constraint = 0.0;
  Vector constraint_grad;
};

using ConvexOracle = std::function<ConvexCut(const Vector&)>;

struct EllipsoidOptions {
  double initial_radius = 1.0;
  /// Stop once the objective gap certified by the ellipsoid drops below tol.
  double tol = 1e-5;
  int max_iterations = 200000;
  std::optional<Vector> center;  // defaults to the origin
};

struct EllipsoidResult {
  Vector x;              // best feasible point (or last center if none)
  double objective = 0.0;
  double constraint = 0.0;
  bool feasible = false;
  bool converged = false;
  /// Set when a constraint cut proved the feasible set inside the initial
  /// ball empty.
  bool proved_infeasible = false;
  int iterations = 0;
};

/**
 * Deep-cut ellipsoid method for min f(x) s.t. g(x) <= 0 with convex f, g.
 * Deterministic: the iterates depend only on the oracle and the options.
 */
EllipsoidResult ellipsoid_minimize(Index dim, const ConvexOracle& oracle,
                                   const EllipsoidOptions& options = {});

}  // namespace sdcancel
