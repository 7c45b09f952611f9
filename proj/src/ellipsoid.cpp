#include "sdcancel/ellipsoid.hpp"

#include <cmath>
#include <limits>

#include "sdcancel/errors.hpp"

namespace sdcancel {

namespace {

// Cut {y : a'(y - x) <= -depth * sqrt(a'Pa)}; returns false when the cut
// leaves nothing of the ellipsoid.
bool apply_cut(Vector& x, Matrix& p, const Vector& a, double depth) {
  const Index n = x.size();
  const Vector pa = p * a;
  const double width = std::sqrt(std::max(a.dot(pa), 0.0));
  if (!(width > 0.0)) return false;
  depth = std::max(depth, 0.0);
  if (depth >= 1.0) return false;
  const Vector g = pa / width;
  if (n == 1) {
    x -= 0.5 * (1.0 + depth) * g;
    p *= 0.25 * (1.0 - depth) * (1.0 - depth);
    return true;
  }
  const double nd = static_cast<double>(n);
  x -= (1.0 + nd * depth) / (nd + 1.0) * g;
  const double shrink = nd * nd * (1.0 - depth * depth) / (nd * nd - 1.0);
  const double rank1 = 2.0 * (1.0 + nd * depth) / ((nd + 1.0) * (1.0 + depth));
  p = shrink * (p - rank1 * g * g.transpose());
  p = 0.5 * (p + p.transpose()).eval();
  return true;
}

}  // namespace

EllipsoidResult ellipsoid_minimize(Index dim, const ConvexOracle& oracle,
                                   const EllipsoidOptions& options) {
  if (dim < 1) throw InvalidArgument("ellipsoid: dimension must be positive");
  if (!(options.initial_radius > 0.0) || !(options.tol > 0.0)) {
    throw InvalidArgument("ellipsoid: radius and tol must be positive");
  }
  Vector x = options.center.value_or(Vector::Zero(dim));
  if (x.size() != dim) throw DimensionError("ellipsoid: center size");
  Matrix p = options.initial_radius * options.initial_radius *
             Matrix::Identity(dim, dim);

  EllipsoidResult result;
  result.x = x;
  double best = std::numeric_limits<double>::infinity();

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const ConvexCut cut = oracle(x);
    if (!std::isfinite(cut.objective) || !std::isfinite(cut.constraint)) {
      throw NumericError("ellipsoid: oracle returned a non-finite value");
    }
    bool alive = false;
    if (cut.constraint > 0.0) {
      const double width =
          std::sqrt(std::max(cut.constraint_grad.dot(p * cut.constraint_grad), 0.0));
      if (!(width > 0.0) || cut.constraint / width >= 1.0) {
        // every point of the ellipsoid violates the constraint
        result.proved_infeasible = !result.feasible;
        break;
      }
      alive = apply_cut(x, p, cut.constraint_grad, cut.constraint / width);
    } else {
      if (cut.objective < best) {
        best = cut.objective;
        result.x = x;
        result.objective = cut.objective;
        result.constraint = cut.constraint;
        result.feasible = true;
      }
      const double width =
          std::sqrt(std::max(cut.objective_grad.dot(p * cut.objective_grad), 0.0));
      if (width <= options.tol) {
        result.converged = true;
        break;
      }
      alive = apply_cut(x, p, cut.objective_grad, (cut.objective - best) / width);
    }
    if (!alive) {
      result.converged = result.feasible;
      break;
    }
  }
  if (!result.feasible) result.x = x;
  return result;
}

}  // namespace sdcancel
