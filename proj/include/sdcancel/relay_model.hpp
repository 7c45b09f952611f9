#pragma once

#include <vector>

#include "sdcancel/state_space.hpp"

namespace sdcancel {

/// Relay station parameters. W, F, P are continuous 2x2 (I/Q) systems.
struct RelayParams {
  double h = 1.0;      // sampling period [s]
  double f = 1.0e4;    // carrier frequency [Hz]
  double a1 = 1.0;     // LNA gain
  double a2 = 1000.0;  // PA gain
  StateSpace W;        // input spectrum weight, strictly proper
  StateSpace F;        // anti-aliasing filter
  StateSpace P;        // post filter

  /// Throws InvalidArgument / DimensionError when an invariant fails.
  void validate() const;
};

/// One propagation path r * exp(-L s).
struct Path {
  double r = 0.0;
  double delay = 0.0;
};

/// Coupling-wave channel: the nominal path plus optional detour paths.
struct CouplingChannel {
  Path nominal{0.2, 1.0};
  std::vector<Path> extra_paths;

  void validate() const;
  /// a1 * a2 * r for the nominal path.
  double alpha(const RelayParams& params) const;
  /// Sum of r_i / r over the extra paths.
  double relative_extra_gain() const;
};

/// 2x2 rotation by the carrier phase 2*pi*f*L:
/// [[cos, sin], [-sin, cos]].
Matrix rotation_matrix(double f, double delay);

/**
 * Generalized plant of the canceler design problem,
 *
 *   Sigma(s) = [ W      -P                     ]
 *              [ F W    alpha e^{-Ls} A_L F P  ],
 *
 * kept in factored form so the delay is never approximated.
 */
struct GeneralizedPlantSpec {
  RelayParams params;
  CouplingChannel channel;
  double alpha = 0.0;
  Matrix rotation;  // A_L

  /// Sigma(j omega) as a 4x4 complex matrix, delay applied exactly.
  CMatrix response(double omega) const;
  /// Sigma22(j omega) = alpha e^{-j omega L} A_L F P.
  CMatrix coupling_response(double omega) const;
  /// Nominal plus extra paths, evaluated pointwise:
  /// alpha e^{-jwL} A_L + sum_i alpha_i e^{-jwL_i} A_{L_i}.
  CMatrix perturbed_channel_response(double omega) const;
};

GeneralizedPlantSpec build_generalized_plant(const RelayParams& params,
                                             const CouplingChannel& channel);

/// E(jw) = sum_i (r_i / r) e^{-j(L_i - L)w} A_{L_i - L}.
CMatrix error_system_response(const CouplingChannel& channel, double omega,
                              double f);

/// Static weight W2 = (sum_i r_i / r + epsilon) I (2x2, continuous).
StateSpace uncertainty_weight(const CouplingChannel& channel, double epsilon);

/// SISO transfer function (coefficients in descending powers) in
/// controllable canonical form. Throws on improper or zero denominators.
StateSpace transfer_function(const std::vector<double>& num,
                             const std::vector<double>& den);

/// sys (SISO) promoted to the diagonal channels-x-channels system sys * I.
StateSpace diagonal(const StateSpace& siso, Index channels = 2);

/// W = 1/(2s+1) I, F = I, P = 1/(0.001s+1) I, h = 1, f = 1e4, a1 = 1.
RelayParams reference_relay_params(double a2 = 1000.0);

}  // namespace sdcancel
