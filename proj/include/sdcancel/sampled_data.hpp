#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdcancel/lti.hpp"
#include "sdcancel/relay_model.hpp"

namespace sdcancel {

/**
 * Finite-dimensional discrete-time plant produced by FSFH lifting.
 *
 * Inputs:  [w_1 stack, ..., w_k stack, u_d]   (u_d: 2 slow-rate controls)
 * Outputs: [z_1 stack, ..., z_k stack, y]     (y: 2 slow-rate samples)
 *
 * Every stack holds the N fast samples of one slow period, oldest first,
 * each sample being the 2-vector of I/Q channels. The controller channel
 * sits last, so `partition()` feeds straight into lower_lft.
 */
struct LiftedPlant {
  StateSpace sys;
  std::vector<Index> w_channels;  // stacked sizes, 2N each
  std::vector<Index> z_channels;
  int N = 0;
  double h = 0.0;
  Index delay_registers = 0;

  Index w_size() const;
  Index z_size() const;
  Index w_offset(std::size_t channel) const;
  Index z_offset(std::size_t channel) const;
  IoPartition partition() const { return {2, 2}; }

  /// Controller channel u_d -> y (slow rate, exact).
  StateSpace g22() const;
};

struct LiftOptions {
  /// Lift the perturbed channel (nominal plus extra paths) instead of the
  /// nominal one; extra delays must land on the fast grid too.
  bool include_extra_paths = false;
  /// When set, adds the uncertainty channel (w2 -> z2) of the robust design:
  /// z2 = W2 u, and w2 enters the coupling path before alpha e^{-Ls} A_L.
  std::optional<Matrix> uncertainty_weight;
  Index max_states = 2000;
};

/// Number of fast steps a delay spans; throws OffGridDelayError when the
/// delay is not an integer multiple of h/N (relative tolerance 1e-9).
Index delay_steps(double delay, double h, int N);

LiftedPlant fsfh_lift(const GeneralizedPlantSpec& plant, int N,
                      const LiftOptions& options = {});

/// Lower LFT of the lifted plant with a slow-rate controller (2 in, 2 out).
StateSpace lifted_closed_loop(const LiftedPlant& lp, const StateSpace& k);

struct SampledNorm {
  double norm = std::numeric_limits<double>::infinity();
  bool stable = false;
  double spectral_radius = 0.0;
  std::string diagnostic;
};

/// FSFH approximation of the sampled-data H-infinity norm of T_zw at
/// fast-rate factor N; converges to the true value as N grows.
SampledNorm sampled_data_norm(const GeneralizedPlantSpec& plant,
                              const StateSpace& k, int N, double tol = 1e-6);

}  // namespace sdcancel
