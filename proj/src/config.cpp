#include "sdcancel/config.hpp"

#include <fstream>
#include <set>

#include "sdcancel/lti.hpp"
#include "sdcancel/sampled_data.hpp"

namespace sdcancel {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

TransferSpec read_tf(const json& obj, const std::string& where) {
  reject_unknown(obj, {"num", "den"}, where);
  TransferSpec tf;
  read(obj, "num", tf.num, where);
  read(obj, "den", tf.den, where);
  if (tf.num.empty() || tf.den.empty()) {
    throw ConfigError(where + " needs non-empty num and den");
  }
  return tf;
}

json tf_json(const TransferSpec& tf) { return {{"num", tf.num}, {"den", tf.den}}; }

std::vector<Path> read_paths(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + " must be a list");
  std::vector<Path> out;
  for (const json& p : arr) {
    reject_unknown(p, {"r", "L"}, where + "[]");
    Path path;
    if (!p.contains("r") || !p.contains("L")) {
      throw ConfigError(where + " entries need r and L");
    }
    read(p, "r", path.r, where);
    read(p, "L", path.delay, where);
    out.push_back(path);
  }
  return out;
}

json paths_json(const std::vector<Path>& paths) {
  json arr = json::array();
  for (const Path& p : paths) arr.push_back({{"r", p.r}, {"L", p.delay}});
  return arr;
}

InputKind parse_kind(const std::string& s) {
  if (s == "random_rect") return InputKind::kRandomRect;
  if (s == "unit_norm_l2") return InputKind::kUnitNormL2;
  if (s == "custom_samples") return InputKind::kCustomSamples;
  throw ConfigError("unknown input kind '" + s + "'");
}

InputFilter parse_filter(const std::string& s) {
  if (s == "P" || s == "through_P") return InputFilter::kThroughP;
  if (s == "W" || s == "through_W") return InputFilter::kThroughW;
  if (s == "none") return InputFilter::kNone;
  throw ConfigError("unknown input filter '" + s + "'");
}

StateSpace block(const TransferSpec& tf, const char* name) {
  try {
    return diagonal(transfer_function(tf.num, tf.den));
  } catch (const Error& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::kRandomRect: return "random_rect";
    case InputKind::kUnitNormL2: return "unit_norm_l2";
    case InputKind::kCustomSamples: return "custom_samples";
  }
  return "random_rect";
}

std::string to_string(InputFilter filter) {
  switch (filter) {
    case InputFilter::kThroughP: return "P";
    case InputFilter::kThroughW: return "W";
    case InputFilter::kNone: return "none";
  }
  return "none";
}

RelayParams ExperimentConfig::relay_params() const {
  RelayParams p;
  p.h = h;
  p.f = f;
  p.a1 = a1;
  p.a2 = a2;
  p.W = block(W, "relay.W");
  p.F = block(F, "relay.F");
  p.P = block(P, "relay.P");
  return p;
}

CouplingChannel ExperimentConfig::design_channel() const {
  CouplingChannel ch;
  ch.nominal = channel.nominal;
  ch.extra_paths = design.uncertainty_paths;
  return ch;
}

InputSpec ExperimentConfig::input_spec() const {
  InputSpec in;
  in.kind = sim.kind;
  in.period = sim.period;
  in.amplitude = sim.amplitude;
  in.filter = sim.filter;
  in.support = sim.support;
  return in;
}

void ExperimentConfig::validate() const {
  try {
    relay_params().validate();
    channel.validate();
    design_channel().validate();
  } catch (const OffGridDelayError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (design.N < 1) throw ConfigError("design.N must be positive");
  if (design.N_verify < 0) throw ConfigError("design.N_verify must be >= 0");
  if (design.n_q < 1) throw ConfigError("design.n_q must be positive");
  if (design.grid_size < 2) throw ConfigError("design.grid_size must be >= 2");
  if (!(design.margin > 0.0 && design.margin < 0.2)) {
    throw ConfigError("design.margin must lie in (0, 0.2)");
  }
  if (!(design.epsilon > 0.0)) throw ConfigError("design.epsilon must be > 0");
  if (!(design.tol > 0.0 && design.tol < 1.0)) {
    throw ConfigError("design.tol must lie in (0, 1)");
  }
  if (!(sim.duration > 0.0)) throw ConfigError("sim.duration must be > 0");
  if (sim.oversample < 8) throw ConfigError("sim.oversample must be >= 8");
  if (!(sim.period > 0.0)) throw ConfigError("sim.input.period must be > 0");
  if (!(sim.amplitude > 0.0)) throw ConfigError("sim.input.amplitude must be > 0");
  if (sim.kind == InputKind::kCustomSamples) {
    throw ConfigError("custom_samples inputs are only available in-process");
  }
  // the nominal delay must sit on the lifting grid and on the simulation
  // grid; detour paths only need the simulation grid
  delay_steps(channel.nominal.delay, h, design.N);
  delay_steps(channel.nominal.delay, h, sim.oversample);
  for (const Path& p : channel.extra_paths) delay_steps(p.delay, h, sim.oversample);
}

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc, {"relay", "channel", "design", "sim"}, "config");
  ExperimentConfig cfg;
  if (doc.contains("relay")) {
    const json& r = doc.at("relay");
    reject_unknown(r, {"h", "f", "a1", "a2", "W", "F", "P"}, "relay");
    read(r, "h", cfg.h, "relay");
    read(r, "f", cfg.f, "relay");
    read(r, "a1", cfg.a1, "relay");
    read(r, "a2", cfg.a2, "relay");
    if (r.contains("W")) cfg.W = read_tf(r.at("W"), "relay.W");
    if (r.contains("F")) cfg.F = read_tf(r.at("F"), "relay.F");
    if (r.contains("P")) cfg.P = read_tf(r.at("P"), "relay.P");
  }
  if (doc.contains("channel")) {
    const json& c = doc.at("channel");
    reject_unknown(c, {"r", "L", "extra_paths"}, "channel");
    read(c, "r", cfg.channel.nominal.r, "channel");
    read(c, "L", cfg.channel.nominal.delay, "channel");
    if (c.contains("extra_paths")) {
      cfg.channel.extra_paths = read_paths(c.at("extra_paths"), "channel.extra_paths");
    }
  }
  if (doc.contains("design")) {
    const json& d = doc.at("design");
    reject_unknown(d, {"mode", "N", "n_q", "grid_size", "margin", "epsilon",
                       "tol", "uncertainty_paths", "N_verify"},
                   "design");
    std::string mode = to_string(cfg.design.mode);
    read(d, "mode", mode, "design");
    try {
      cfg.design.mode = parse_design_method(mode);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    read(d, "N", cfg.design.N, "design");
    read(d, "n_q", cfg.design.n_q, "design");
    read(d, "grid_size", cfg.design.grid_size, "design");
    read(d, "margin", cfg.design.margin, "design");
    read(d, "epsilon", cfg.design.epsilon, "design");
    read(d, "tol", cfg.design.tol, "design");
    read(d, "N_verify", cfg.design.N_verify, "design");
    if (d.contains("uncertainty_paths")) {
      cfg.design.uncertainty_paths =
          read_paths(d.at("uncertainty_paths"), "design.uncertainty_paths");
    }
  }
  if (doc.contains("sim")) {
    const json& s = doc.at("sim");
    reject_unknown(s, {"duration", "oversample", "input", "seed"}, "sim");
    read(s, "duration", cfg.sim.duration, "sim");
    read(s, "oversample", cfg.sim.oversample, "sim");
    read(s, "seed", cfg.sim.seed, "sim");
    if (s.contains("input")) {
      const json& in = s.at("input");
      reject_unknown(in, {"kind", "period", "amplitude", "filter", "support"},
                     "sim.input");
      std::string kind = to_string(cfg.sim.kind), filter = to_string(cfg.sim.filter);
      read(in, "kind", kind, "sim.input");
      read(in, "filter", filter, "sim.input");
      cfg.sim.kind = parse_kind(kind);
      cfg.sim.filter = parse_filter(filter);
      read(in, "period", cfg.sim.period, "sim.input");
      read(in, "amplitude", cfg.sim.amplitude, "sim.input");
      read(in, "support", cfg.sim.support, "sim.input");
    }
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["relay"] = {{"h", cfg.h},        {"f", cfg.f},        {"a1", cfg.a1},
                  {"a2", cfg.a2},      {"W", tf_json(cfg.W)}, {"F", tf_json(cfg.F)},
                  {"P", tf_json(cfg.P)}};
  doc["channel"] = {{"r", cfg.channel.nominal.r},
                    {"L", cfg.channel.nominal.delay},
                    {"extra_paths", paths_json(cfg.channel.extra_paths)}};
  doc["design"] = {{"mode", to_string(cfg.design.mode)},
                   {"N", cfg.design.N},
                   {"n_q", cfg.design.n_q},
                   {"grid_size", cfg.design.grid_size},
                   {"margin", cfg.design.margin},
                   {"epsilon", cfg.design.epsilon},
                   {"tol", cfg.design.tol},
                   {"uncertainty_paths", paths_json(cfg.design.uncertainty_paths)},
                   {"N_verify", cfg.design.N_verify}};
  doc["sim"] = {{"duration", cfg.sim.duration},
                {"oversample", cfg.sim.oversample},
                {"seed", cfg.sim.seed},
                {"input",
                 {{"kind", to_string(cfg.sim.kind)},
                  {"period", cfg.sim.period},
                  {"amplitude", cfg.sim.amplitude},
                  {"filter", to_string(cfg.sim.filter)},
                  {"support", cfg.sim.support}}}};
  return doc;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig nominal_example_config(double a2) {
  ExperimentConfig cfg;
  cfg.a2 = a2;
  return cfg;
}

ExperimentConfig robust_example_config() {
  ExperimentConfig cfg;
  cfg.a2 = 100.0;
  cfg.design.mode = DesignMethod::kRobustQParam;
  cfg.design.N = 4;
  cfg.design.n_q = 8;
  cfg.design.N_verify = 8;
  // only the gain of the detour enters W2; the delay just has to exceed L
  cfg.design.uncertainty_paths = {Path{0.1 * cfg.channel.nominal.r, 2.0}};
  return cfg;
}

CouplingChannel perturbed_example_channel() {
  CouplingChannel ch;
  ch.extra_paths = {Path{0.07 * ch.nominal.r, 1.1 * ch.nominal.delay}};
  return ch;
}

}  // namespace sdcancel
