#pragma once

#include <optional>

#include "sdcancel/lti.hpp"

namespace sdcancel {

/// Details of one gamma probe; useful for diagnosing infeasibility.
struct CentralControllerProbe {
  std::optional<StateSpace> controller;
  const char* failure = nullptr;  // first violated condition, if any
};

/**
 * Central H-infinity suboptimal controller of a continuous-time plant with
 * general D matrices (positive-feedback convention u = K y). Requires D12 of
 * full column rank and D21 of full row rank.
 */
CentralControllerProbe central_controller_continuous(const StateSpace& plant,
                                                     IoPartition partition,
                                                     double gamma);

/// Discrete-time version through the norm-preserving bilinear map.
CentralControllerProbe central_controller(const StateSpace& plant,
                                          IoPartition partition,
                                          double gamma);

/// Smallest gamma allowed by the feedthrough terms alone (a lower bound on
/// the optimum of the discrete problem).
double feedthrough_gamma_bound(const StateSpace& plant, IoPartition partition);

struct HinfDesign {
  StateSpace controller;
  double gamma = 0.0;          // feasible level the controller was built at
  double gamma_lower = 0.0;    // largest level found infeasible
  double closed_loop_norm = 0.0;
  int iterations = 0;
};

struct HinfDesignOptions {
  double rel_tol = 1e-3;
  int max_iterations = 60;
  /// Initial upper bracket; <= 0 means "norm of the open loop, if stable".
  double gamma_upper = 0.0;
};

/// gamma-bisection on a discrete-time plant. Throws InfeasibleError when the
/// upper bracket admits no stabilizing controller.
HinfDesign hinf_synthesize(const StateSpace& plant, IoPartition partition,
                           const HinfDesignOptions& options = {});

}  // namespace sdcancel
