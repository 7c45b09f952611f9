#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdcancel/errors.hpp"
#include "sdcancel/relay_model.hpp"
#include "sdcancel/sim.hpp"
#include "sdcancel/synthesis.hpp"

namespace sdcancel {

/// Malformed or inconsistent configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// SISO transfer function by coefficients (descending powers); promoted to
/// a 2x2 diagonal block.
struct TransferSpec {
  std::vector<double> num;
  std::vector<double> den;
  bool operator==(const TransferSpec&) const = default;
};

struct DesignSection {
  DesignMethod mode = DesignMethod::kNominalHinf;
  int N = 16;
  int n_q = 8;
  int grid_size = 256;
  double margin = 0.05;
  double epsilon = 0.01;
  double tol = 1e-3;
  /// Detour paths bounding the uncertainty (robust mode).
  std::vector<Path> uncertainty_paths;
  /// Lifting factor for verification; 0 means 2 N.
  int N_verify = 0;

  int verify_N() const { return N_verify > 0 ? N_verify : 2 * N; }
};

struct SimSection {
  double duration = 100.0;
  int oversample = 64;
  InputKind kind = InputKind::kRandomRect;
  double period = 4.0;
  double amplitude = 1.0;
  InputFilter filter = InputFilter::kThroughP;
  double support = 0.0;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  double h = 1.0;
  double f = 1.0e4;
  double a1 = 1.0;
  double a2 = 1000.0;
  TransferSpec W{{1.0}, {2.0, 1.0}};
  TransferSpec F{{1.0}, {1.0}};
  TransferSpec P{{1.0}, {0.001, 1.0}};
  CouplingChannel channel;
  DesignSection design;
  SimSection sim;

  RelayParams relay_params() const;
  /// Nominal path plus the design-time uncertainty paths.
  CouplingChannel design_channel() const;
  InputSpec input_spec() const;
  /// Re-checks every model invariant; throws ConfigError or
  /// OffGridDelayError.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

std::string to_string(InputKind kind);
std::string to_string(InputFilter filter);

/// Bundled setups of the design examples.
ExperimentConfig nominal_example_config(double a2 = 1000.0);
ExperimentConfig robust_example_config();
/// The detour path used in the perturbation experiments (0.07 r at 1.1 L).
CouplingChannel perturbed_example_channel();

}  // namespace sdcancel
