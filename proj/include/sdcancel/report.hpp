#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sdcancel/config.hpp"
#include "sdcancel/sim.hpp"
#include "sdcancel/synthesis.hpp"

namespace sdcancel {

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols);

nlohmann::json controller_to_json(const Controller& k);
/// Accepts a bare controller document or a design report containing one.
Controller controller_from_json(const nlohmann::json& doc);
Controller load_controller(const std::string& path);

nlohmann::json verification_to_json(const VerificationReport& rep);

struct Timings {
  double synthesis_s = 0.0;
  double verification_s = 0.0;
};

/// Self-contained design report: effective config, controller, norms,
/// verification and timings.
nlohmann::json design_report(const ExperimentConfig& cfg, const Controller& k,
                             const VerificationReport& rep,
                             const Timings& timings);

nlohmann::json metrics_to_json(const SimulationTrace& trace,
                               std::optional<double> gamma = std::nullopt);

/// Trace CSV: t,v_I,v_Q,u_I,u_Q,err_I,err_Q with 12 significant digits.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
void write_trace_csv(const std::string& path, const SimulationTrace& trace);

void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

}  // namespace sdcancel
