#include "sdcancel/report.hpp"

#include <cstdio>
#include <fstream>

namespace sdcancel {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw ConfigError("matrix has the wrong number of rows");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError("matrix has the wrong number of columns");
    }
    for (Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

json controller_to_json(const Controller& k) {
  return {{"A", matrix_to_json(k.sys.a())},
          {"B", matrix_to_json(k.sys.b())},
          {"C", matrix_to_json(k.sys.c())},
          {"D", matrix_to_json(k.sys.d())},
          {"period", k.sys.period()},
          {"method", to_string(k.method)},
          {"gamma", k.gamma},
          {"gamma1", k.gamma1},
          {"gamma2", k.gamma2},
          {"open_loop_stable", k.open_loop_stable},
          {"meta",
           {{"N", k.meta.N},
            {"n_q", k.meta.n_q},
            {"grid_size", k.meta.grid_size},
            {"margin", k.meta.margin},
            {"tol", k.meta.tol},
            {"epsilon", k.meta.epsilon},
            {"iterations", k.meta.iterations},
            {"retries", k.meta.retries}}}};
}

Controller controller_from_json(const json& doc) {
  const json& c = doc.contains("controller") ? doc.at("controller") : doc;
  try {
    const Index n = static_cast<Index>(c.at("A").size());
    const Index m = n > 0 ? static_cast<Index>(c.at("B").at(0).size())
                          : static_cast<Index>(c.at("D").at(0).size());
    const Index p = static_cast<Index>(c.at("D").size());
    Controller k;
    k.sys = StateSpace::Discrete(matrix_from_json(c.at("A"), n, n),
                                 matrix_from_json(c.at("B"), n, m),
                                 matrix_from_json(c.at("C"), p, n),
                                 matrix_from_json(c.at("D"), p, m),
                                 c.at("period").get<double>());
    k.method = parse_design_method(c.value("method", std::string("nominal_hinf")));
    k.gamma = c.value("gamma", 0.0);
    k.gamma1 = c.value("gamma1", 0.0);
    k.gamma2 = c.value("gamma2", 0.0);
    k.open_loop_stable = is_stable(k.sys);
    if (c.contains("meta")) {
      const json& mt = c.at("meta");
      k.meta.N = mt.value("N", 0);
      k.meta.n_q = mt.value("n_q", 0);
      k.meta.grid_size = mt.value("grid_size", 0);
      k.meta.margin = mt.value("margin", 0.0);
      k.meta.tol = mt.value("tol", 0.0);
      k.meta.epsilon = mt.value("epsilon", 0.0);
      k.meta.iterations = mt.value("iterations", 0);
      k.meta.retries = mt.value("retries", 0);
    }
    return k;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed controller document: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("malformed controller document: ") + e.what());
  }
}

Controller load_controller(const std::string& path) {
  return controller_from_json(read_json(path));
}

json verification_to_json(const VerificationReport& rep) {
  return {{"N_verify", rep.N_verify},
          {"stable", rep.stable},
          {"spectral_radius", rep.spectral_radius},
          {"norm", rep.norm},
          {"synthesis_gamma", rep.synthesis_gamma},
          {"relative_gap", rep.relative_gap},
          {"robust", rep.robust},
          {"gamma2_design_N", rep.gamma2_design},
          {"gamma2_verify_N", rep.gamma2_verify},
          {"small_gain", rep.small_gain},
          {"l2_bound", rep.l2_bound},
          {"diagnostic", rep.diagnostic}};
}

json design_report(const ExperimentConfig& cfg, const Controller& k,
                   const VerificationReport& rep, const Timings& timings) {
  return {{"config", config_to_json(cfg)},
          {"controller", controller_to_json(k)},
          {"verification", verification_to_json(rep)},
          {"timings",
           {{"synthesis_s", timings.synthesis_s},
            {"verification_s", timings.verification_s}}}};
}

json metrics_to_json(const SimulationTrace& trace, std::optional<double> gamma) {
  const Metrics m = metrics(trace, gamma);
  json doc = {{"diverged", m.diverged},
              {"l2_err", m.l2_err},
              {"max_abs_err_tail", m.max_abs_err_tail},
              {"input_peak", trace.input_peak},
              {"samples", trace.t.size()},
              {"dt", trace.dt},
              {"duration", trace.duration}};
  if (m.bound_ratio) doc["bound_ratio"] = *m.bound_ratio;
  return doc;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << "t,v_I,v_Q,u_I,u_Q,err_I,err_Q\n";
  char line[256];
  for (std::size_t j = 0; j < trace.t.size(); ++j) {
    const auto c = static_cast<Index>(j);
    std::snprintf(line, sizeof line,
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", trace.t[j],
                  trace.v(0, c), trace.v(1, c), trace.u(0, c), trace.u(1, c),
                  trace.err(0, c), trace.err(1, c));
    out << line;
  }
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_trace_csv(out, trace);
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace sdcancel
