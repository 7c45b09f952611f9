#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>

#include "sdcancel/errors.hpp"
#include "sdcancel/experiments.hpp"

namespace sdcancel {

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> oversample;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--out", f.out, "output path or prefix");
  cmd->add_option("--seed", f.seed, "override the simulation seed");
  cmd->add_option("--oversample", f.oversample, "override the simulation oversampling");
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
  ExperimentConfig cfg = load_config(f.config);
  if (f.seed) cfg.sim.seed = *f.seed;
  if (f.oversample) cfg.sim.oversample = *f.oversample;
  cfg.validate();
  return cfg;
}

void check_controller_shape(const ExperimentConfig& cfg, const Controller& k) {
  const StateSpace& s = k.sys;
  if (s.inputs() != 2 || s.outputs() != 2) {
    throw DimensionError("controller must be 2x2, got " +
                         std::to_string(s.outputs()) + "x" +
                         std::to_string(s.inputs()));
  }
  if (!s.is_discrete() || std::abs(s.period() - cfg.h) > 1e-12 * cfg.h) {
    throw DimensionError("controller sampling period does not match h in the config");
  }
}

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    write_json(path, doc);
  }
}

int run_design_cmd(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(f);
  const DesignOutcome d = run_design(cfg);
  emit_json(design_report(cfg, d.controller, d.verification, d.timings), f.out, out);
  if (!d.verification.stable) {
    err << "design: closed loop is not stable at N=" << d.verification.N_verify << "\n";
    return 2;
  }
  err << "design: gamma=" << d.controller.gamma << " stable at N="
      << d.verification.N_verify << " (" << d.timings.synthesis_s << " s)\n";
  return 0;
}

int run_simulate_cmd(const CommonFlags& f, const std::string& controller_path,
                     const std::string& expect, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(f);
  const Controller k = load_controller(controller_path);
  check_controller_shape(cfg, k);
  const SimulationTrace trace = run_simulation(cfg, k.sys);
  json m = metrics_to_json(trace, k.gamma > 0 ? std::optional<double>(k.gamma)
                                              : std::nullopt);
  m["seed"] = cfg.sim.seed;
  m["oversample"] = cfg.sim.oversample;
  if (f.out.empty()) {
    out << m.dump(2) << "\n";
  } else {
    write_trace_csv(f.out + ".csv", trace);
    write_json(f.out + ".metrics.json", m);
  }
  const std::string outcome = trace.diverged ? "diverged" : "stable";
  if (!expect.empty() && expect != outcome) {
    err << "simulate: expected " << expect << " but the loop " << outcome << "\n";
    return 2;
  }
  err << "simulate: " << outcome << "\n";
  return 0;
}

int run_verify_cmd(const CommonFlags& f, const std::string& controller_path,
                   int n_verify, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(f);
  const Controller k = load_controller(controller_path);
  check_controller_shape(cfg, k);
  const RelayParams params = cfg.relay_params();
  CouplingChannel channel;
  channel.nominal = cfg.channel.nominal;
  if (k.method == DesignMethod::kRobustQParam) channel = cfg.design_channel();
  const GeneralizedPlantSpec spec = build_generalized_plant(params, channel);
  const int n = n_verify > 0 ? n_verify : cfg.design.verify_N();
  const VerificationReport rep = verify_design(spec, k, n);
  emit_json(verification_to_json(rep), f.out, out);
  if (!rep.stable) {
    err << "verify: closed loop unstable at N=" << n << "\n";
    return 2;
  }
  return 0;
}

int run_reproduce_cmd(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const std::string dir = f.out.empty() ? "reproduction" : f.out;
  const PaperRun run = reproduce_paper(dir);
  int failures = 0;
  for (const CriterionResult& c : run.criteria) {
    out << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.detail
        << "\n";
    if (!c.pass) {
      err << "reproduce-paper: criterion " << c.id << " failed\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 2;
}

int run_lift_cmd(const CommonFlags& f, std::vector<int> factors, std::ostream& out) {
  const ExperimentConfig cfg = load_with_overrides(f);
  if (factors.empty()) factors = {cfg.design.N, 2 * cfg.design.N};
  const auto rows = lift_check(cfg, factors);
  json doc = json::array();
  for (const LiftCheckRow& r : rows) {
    doc.push_back({{"N", r.N},
                   {"gamma_synth", r.gamma_synth},
                   {"norm_of_design", r.norm_of_design}});
  }
  emit_json(json{{"design_N", cfg.design.N}, {"rows", doc}}, f.out, out);
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampled-data H-infinity coupling-wave canceler toolkit"};
  app.require_subcommand(1);

  CommonFlags design_f, sim_f, verify_f, repro_f, lift_f;
  std::string sim_controller, verify_controller, expect;
  int verify_n = 0;
  std::vector<int> lift_factors;

  auto* design = app.add_subcommand("design", "synthesize and verify a canceler");
  add_common(design, design_f, true);

  auto* simulate = app.add_subcommand("simulate", "simulate the sampled-data loop");
  add_common(simulate, sim_f, true);
  simulate->add_option("--controller", sim_controller, "design report or controller JSON")
      ->required();
  simulate->add_option("--expect", expect, "expected outcome")
      ->check(CLI::IsMember({"stable", "diverged"}));

  auto* verify = app.add_subcommand("verify", "check a controller against a config");
  add_common(verify, verify_f, true);
  verify->add_option("--controller", verify_controller, "design report or controller JSON")
      ->required();
  verify->add_option("--N", verify_n, "lifting resolution for the check");

  auto* repro = app.add_subcommand("reproduce-paper", "run the three bundled experiments");
  add_common(repro, repro_f, false);

  auto* lift = app.add_subcommand("lift-check", "FSFH convergence study");
  add_common(lift, lift_f, true);
  lift->add_option("--N", lift_factors, "lifting resolutions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*design) return run_design_cmd(design_f, out, err);
    if (*simulate) return run_simulate_cmd(sim_f, sim_controller, expect, out, err);
    if (*verify) return run_verify_cmd(verify_f, verify_controller, verify_n, out, err);
    if (*repro) return run_reproduce_cmd(repro_f, out, err);
    if (*lift) return run_lift_cmd(lift_f, lift_factors, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const OffGridDelayError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::ios_base::failure& e) {
    err << "io error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace sdcancel
