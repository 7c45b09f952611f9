#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdcancel/kernels.hpp"
#include "sdcancel/relay_model.hpp"
#include "sdcancel/sampled_data.hpp"

namespace sdcancel {

enum class DesignMethod { kNominalHinf, kRobustQParam };

std::string to_string(DesignMethod method);
DesignMethod parse_design_method(const std::string& text);

struct SynthesisMeta {
  int N = 0;
  int n_q = 0;
  int grid_size = 0;
  double margin = 0.0;
  double tol = 0.0;
  double epsilon = 0.0;
  int iterations = 0;
  int retries = 0;
};

/// Discrete-time canceler K(z) (2 in, 2 out, period h) with its design data.
struct Controller {
  StateSpace sys;
  DesignMethod method = DesignMethod::kNominalHinf;
  double gamma = 0.0;   // nominal: achieved level
  double gamma1 = 0.0;  // robust: ||T_z1w1||
  double gamma2 = 0.0;  // robust: ||T_z2w2|| (certified <= 1)
  bool open_loop_stable = false;
  SynthesisMeta meta;
};

/// Problem 1 on a lifted plant: gamma-bisection with relative tolerance tol.
Controller synthesize_nominal(const LiftedPlant& lp, double tol = 1e-3);

/// FIR Youla parameter Q(z) = sum_l Q_l z^-l around the stable plant G22.
struct QParam {
  kernels::FirCoefficients coeffs;
  StateSpace base;  // G22

  int n_q() const { return static_cast<int>(coeffs.size()); }
  StateSpace q_system() const;
  /// K = Q (I + G22 Q)^-1.
  StateSpace controller() const;
};

/// State-space realization of an FIR matrix filter at the given period.
StateSpace fir_system(const kernels::FirCoefficients& taps, double period);

/// Controller K = Q (I + G22 Q)^-1 for the positive-feedback convention.
StateSpace youla_controller(const StateSpace& g22, const StateSpace& q);

/// Lifted two-channel plant of the robust design: (w1 -> z1) performance,
/// (w2 -> z2) uncertainty with z2 = W2 u.
struct RobustPlant {
  LiftedPlant lifted;
  Matrix w2;
  double epsilon = 0.0;
};

/// W2 from the channel's extra paths and epsilon; the nominal path is lifted.
RobustPlant build_robust_plant(const GeneralizedPlantSpec& spec, int N,
                               double epsilon);

/// T_c(Q) = T1 + T2 Q T3 for one channel.
struct AffineMap {
  StateSpace t1, t2, t3;
};

struct YoulaMaps {
  std::vector<AffineMap> channels;  // 0: performance, 1: uncertainty
  StateSpace g22;
};

/// Throws InvalidArgument when G22 is not stable.
YoulaMaps youla_closed_loop_maps(const RobustPlant& rp);

/// Frequency samples of an affine map on the slow-rate unit circle.
kernels::AffineGrid affine_grid(const AffineMap& map,
                                const std::vector<double>& omegas, double h);

struct RobustOptions {
  int n_q = 8;
  int grid_size = 256;
  double margin = 0.05;
  double tol = 1e-5;
  double initial_radius = 1.0;
  int max_retries = 3;
  int max_iterations = 200000;
  std::optional<kernels::FirCoefficients> warm_start;
};

struct RobustDesign {
  Controller controller;
  QParam q;
  double grid_objective = 0.0;   // max sigma of T_z1w1 on the grid
  double grid_constraint = 0.0;  // max sigma of T_z2w2 on the grid
};

/// Problem 2 with an FIR Q: grid-constrained convex minimax solved by the
/// ellipsoid method, certified by the exact H-infinity norm.
RobustDesign synthesize_robust(const RobustPlant& rp,
                               const RobustOptions& options = {});

struct VerificationReport {
  int N_verify = 0;
  bool stable = false;
  double spectral_radius = 0.0;
  double norm = 0.0;          // ||T_zw|| (nominal) or ||T_z1w1|| (robust)
  double synthesis_gamma = 0.0;
  double relative_gap = 0.0;  // |norm - synthesis_gamma| / synthesis_gamma
  bool robust = false;
  double gamma2_design = 0.0;  // ||T_z2w2|| at the design N
  double gamma2_verify = 0.0;  // same at N_verify (grows like sqrt(N) when F = I)
  bool small_gain = false;
  std::string l2_bound;
  std::string diagnostic;
};

/// Re-lifts at N_verify and reports stability, norms and (robust case) the
/// small-gain certificate. Never throws for a failing design.
VerificationReport verify_design(const GeneralizedPlantSpec& spec,
                                 const Controller& k, int N_verify,
                                 double tol = 1e-6);

/// Smallest fast-rate factor >= min_N that puts every delay of the channel
/// on the grid; throws OffGridDelayError when none exists up to max_N.
int fsfh_grid_for(const CouplingChannel& channel, double h, int min_N = 1,
                  int max_N = 4096);

/// Spectral radius of the slow-rate loop formed by K and the lifted
/// (perturbed) channel, lifted at `N` (0: smallest grid that fits).
double loop_spectral_radius(const RelayParams& params,
                            const CouplingChannel& channel,
                            const StateSpace& k, int N = 0);

/// Random admissible perturbations: 1-3 detour paths with sum r_i <=
/// bound * r and delays L + k h / grid, 1 <= k <= 2 grid.
std::vector<CouplingChannel> random_perturbations(const CouplingChannel& nominal,
                                                  double bound, int count,
                                                  int grid, double h,
                                                  std::uint64_t seed);

struct SweepResult {
  std::vector<double> spectral_radius;
  int stable_count = 0;
};

namespace serial {
SweepResult perturbation_sweep(const RelayParams& params,
                               const std::vector<CouplingChannel>& channels,
                               const StateSpace& k, int N = 0);
}  // namespace serial

namespace omp {
SweepResult perturbation_sweep(const RelayParams& params,
                               const std::vector<CouplingChannel>& channels,
                               const StateSpace& k, int N = 0);
}  // namespace omp

}  // namespace sdcancel
