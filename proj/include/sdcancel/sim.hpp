#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdcancel/relay_model.hpp"

namespace sdcancel {

enum class InputKind { kRandomRect, kUnitNormL2, kCustomSamples };
enum class InputFilter { kThroughP, kThroughW, kNone };

struct InputSpec {
  InputKind kind = InputKind::kRandomRect;
  double period = 4.0;     // level duration [s] (rect and unit-norm kinds)
  double amplitude = 1.0;  // rect levels are +-amplitude
  InputFilter filter = InputFilter::kThroughP;
  /// Unit-norm kind: the disturbance is nonzero on [0, support); 0 means a
  /// quarter of the horizon.
  double support = 0.0;
  /// Custom kind: 2 x T piecewise-constant source on the fine grid.
  Matrix samples;
};

struct SimConfig {
  RelayParams params;
  CouplingChannel channel;   // extra paths are applied in simulation
  StateSpace controller;     // discrete, period h, 2 x 2
  double duration = 100.0;
  int oversample = 64;       // fine steps per h
  InputSpec input;
  std::uint64_t seed = 1;
};

/// Fine-grid record of one closed-loop run. Signals are 2 x T.
struct SimulationTrace {
  double dt = 0.0;
  std::vector<double> t;
  Matrix v, u, err;
  bool diverged = false;
  double l2_err = 0.0;
  double max_abs_err_tail = 0.0;  // max |v - u| over the last half
  double input_peak = 0.0;        // max |v| over the run
  double duration = 0.0;          // requested horizon
};

/// Divergence threshold relative to the input amplitude.
inline constexpr double kDivergenceFactor = 1e6;

/// Piecewise-constant source on the fine grid, before the input filter
/// (2 x (steps + 1) samples).
Matrix generate_source(const InputSpec& spec, const RelayParams& params,
                       double duration, int n_sim, std::uint64_t seed);

/// The input signal v on the fine grid: the source passed through the exact
/// ZOH discretization of the selected filter.
Matrix generate_input(const InputSpec& spec, const RelayParams& params,
                      double duration, int n_sim, std::uint64_t seed);

SimulationTrace simulate_closed_loop(const SimConfig& cfg);

struct Metrics {
  double l2_err = 0.0;
  double max_abs_err_tail = 0.0;
  bool diverged = false;
  std::optional<double> bound_ratio;  // l2_err / gamma
};

/// Trapezoidal L2 norm of err and the tail maximum (last 50% of the
/// horizon); recomputes from the arrays, so synthetic traces work too.
Metrics metrics(const SimulationTrace& trace,
                std::optional<double> gamma = std::nullopt);

/**
 * Numerical passband check of the baseband model: modulates u (2 x T,
 * spacing dt) onto cos/-sin carriers at params.f with n_rf samples per
 * carrier cycle, applies a1 a2 r and the delay on the RF grid, demodulates
 * with an 8th-order Butterworth low-pass at f/10 and returns the baseband
 * result on the input grid. Expected: alpha A_L u(t - L).
 */
Matrix passband_oracle(const Matrix& u, double dt, const RelayParams& params,
                       const Path& nominal, int n_rf);

/// Time after which the oracle's low-pass transient has died out.
double passband_settling_time(const RelayParams& params);

}  // namespace sdcancel
