#include "sdcancel/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "sdcancel/lti.hpp"

namespace sdcancel {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

CouplingChannel nominal_only(const CouplingChannel& ch) {
  CouplingChannel out;
  out.nominal = ch.nominal;
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

}  // namespace

DesignOutcome run_design(const ExperimentConfig& cfg) {
  cfg.validate();
  const RelayParams params = cfg.relay_params();
  DesignOutcome out;
  const auto start = std::chrono::steady_clock::now();
  GeneralizedPlantSpec spec;
  if (cfg.design.mode == DesignMethod::kNominalHinf) {
    spec = build_generalized_plant(params, nominal_only(cfg.channel));
    out.controller = synthesize_nominal(fsfh_lift(spec, cfg.design.N), cfg.design.tol);
  } else {
    spec = build_generalized_plant(params, cfg.design_channel());
    const RobustPlant rp = build_robust_plant(spec, cfg.design.N, cfg.design.epsilon);
    RobustOptions opts;
    opts.n_q = cfg.design.n_q;
    opts.grid_size = cfg.design.grid_size;
    opts.margin = cfg.design.margin;
    out.controller = synthesize_robust(rp, opts).controller;
  }
  out.timings.synthesis_s = seconds_since(start);
  const auto vstart = std::chrono::steady_clock::now();
  out.verification = verify_design(spec, out.controller, cfg.design.verify_N());
  out.timings.verification_s = seconds_since(vstart);
  return out;
}

SimulationTrace run_simulation(const ExperimentConfig& cfg, const StateSpace& k) {
  SimConfig sc;
  sc.params = cfg.relay_params();
  sc.channel = cfg.channel;
  sc.controller = k;
  sc.duration = cfg.sim.duration;
  sc.oversample = cfg.sim.oversample;
  sc.input = cfg.input_spec();
  sc.seed = cfg.sim.seed;
  return simulate_closed_loop(sc);
}

CriterionResult check_nominal_reproduction(const DesignOutcome& d,
                                           const SimulationTrace& trace) {
  CriterionResult r;
  r.id = 1;
  const double limit = 0.1 * trace.input_peak;
  r.pass = d.verification.stable && !trace.diverged &&
           trace.max_abs_err_tail <= limit;
  r.detail = "stable=" + std::string(d.verification.stable ? "yes" : "no") +
             " diverged=" + (trace.diverged ? "yes" : "no") +
             " gamma=" + fmt(d.controller.gamma) +
             " max_abs_err_tail=" + fmt(trace.max_abs_err_tail) +
             " limit=" + fmt(limit) +
             " synthesis_s=" + fmt(d.timings.synthesis_s);
  return r;
}

CriterionResult check_l2_bound(const ExperimentConfig& cfg, const Controller& k,
                               int draws, std::uint64_t base_seed) {
  CriterionResult r;
  r.id = 2;
  ExperimentConfig c = cfg;
  c.channel = nominal_only(cfg.channel);
  c.sim.kind = InputKind::kUnitNormL2;
  c.sim.filter = InputFilter::kThroughW;
  c.sim.period = cfg.h / 4.0;
  c.sim.support = c.sim.duration / 4.0;
  double worst = 0.0;
  bool diverged = false;
  for (int i = 0; i < draws; ++i) {
    c.sim.seed = base_seed + static_cast<std::uint64_t>(i);
    const SimulationTrace t = run_simulation(c, k.sys);
    diverged = diverged || t.diverged;
    worst = std::max(worst, t.l2_err / k.gamma);
  }
  r.pass = !diverged && worst <= 1.05;
  r.detail = "draws=" + std::to_string(draws) +
             " worst ||v-u||_2/gamma=" + fmt(worst) + " (limit 1.05)";
  return r;
}

CriterionResult check_instability(const SimulationTrace& trace, double loop_radius) {
  CriterionResult r;
  r.id = 3;
  r.pass = trace.diverged;
  const double peak_u = trace.u.size() ? trace.u.cwiseAbs().maxCoeff() : 0.0;
  r.detail = "diverged=" + std::string(trace.diverged ? "yes" : "no") +
             " horizon=" + fmt(trace.t.empty() ? 0.0 : trace.t.back()) +
             " peak|u|=" + fmt(peak_u) +
             " slow-loop spectral radius=" + fmt(loop_radius);
  return r;
}

CriterionResult check_robust(const ExperimentConfig& cfg, const DesignOutcome& d,
                             const SimulationTrace& trace, double loop_radius,
                             int perturbations, std::uint64_t seed) {
  CriterionResult r;
  r.id = 4;
  const int grid = 28;
  const double bound = cfg.design_channel().relative_extra_gain();
  const auto channels = random_perturbations(nominal_only(cfg.channel), bound,
                                             perturbations, grid, cfg.h, seed);
  const SweepResult sweep =
      omp::perturbation_sweep(cfg.relay_params(), channels, d.controller.sys, grid);
  double worst = 0.0;
  for (double x : sweep.spectral_radius) worst = std::max(worst, x);
  r.pass = !trace.diverged && d.controller.gamma2 <= 1.0 &&
           d.verification.small_gain && sweep.stable_count == perturbations;
  r.detail = "diverged=" + std::string(trace.diverged ? "yes" : "no") +
             " ||T_z2w2||=" + fmt(d.controller.gamma2) +
             " small_gain=" + (d.verification.small_gain ? "yes" : "no") +
             " perturbed loop radius=" + fmt(loop_radius) +
             " random perturbations stable " + std::to_string(sweep.stable_count) +
             "/" + std::to_string(perturbations) + " (worst radius " + fmt(worst) +
             ") synthesis_s=" + fmt(d.timings.synthesis_s);
  return r;
}

CriterionResult check_fsfh_convergence(const ExperimentConfig& cfg,
                                       const Controller& k, int N_fine) {
  CriterionResult r;
  r.id = 5;
  const GeneralizedPlantSpec spec =
      build_generalized_plant(cfg.relay_params(), nominal_only(cfg.channel));
  const SampledNorm coarse = sampled_data_norm(spec, k.sys, k.meta.N);
  const SampledNorm fine = sampled_data_norm(spec, k.sys, N_fine);
  const double gamma_fine =
      synthesize_nominal(fsfh_lift(spec, N_fine), cfg.design.tol).gamma;
  const double loop_change = std::abs(fine.norm - coarse.norm) / coarse.norm;
  const double synth_change = std::abs(gamma_fine - k.gamma) / k.gamma;
  r.pass = coarse.stable && fine.stable && loop_change < 0.02 && synth_change < 0.02;
  r.detail = "closed loop: gamma_" + std::to_string(k.meta.N) + "=" + fmt(coarse.norm) +
             " gamma_" + std::to_string(N_fine) + "=" + fmt(fine.norm) +
             " change=" + fmt(100.0 * loop_change) + "%; resynthesized: " +
             fmt(k.gamma) + " -> " + fmt(gamma_fine) + " change=" +
             fmt(100.0 * synth_change) + "% (limit 2%)";
  return r;
}

PaperRun reproduce_paper(const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  PaperRun run;

  ExperimentConfig cfg9 = nominal_example_config(1000.0);
  cfg9.sim.seed = 9;
  run.nominal = run_design(cfg9);
  run.fig9 = run_simulation(cfg9, run.nominal.controller.sys);

  ExperimentConfig cfg10 = nominal_example_config(100.0);
  run.nominal_40db = run_design(cfg10);
  cfg10.channel = perturbed_example_channel();
  cfg10.sim.oversample = 80;  // puts 1.1 L on the simulation grid
  cfg10.sim.seed = 10;
  run.fig10 = run_simulation(cfg10, run.nominal_40db.controller.sys);
  run.fig10_loop_radius = loop_spectral_radius(
      cfg10.relay_params(), cfg10.channel, run.nominal_40db.controller.sys);

  ExperimentConfig cfg11 = robust_example_config();
  run.robust = run_design(cfg11);
  cfg11.channel = perturbed_example_channel();
  cfg11.sim.oversample = 80;
  cfg11.sim.seed = 10;
  run.fig11 = run_simulation(cfg11, run.robust.controller.sys);
  run.fig11_loop_radius = loop_spectral_radius(
      cfg11.relay_params(), cfg11.channel, run.robust.controller.sys);

  run.criteria.push_back(check_nominal_reproduction(run.nominal, run.fig9));
  run.criteria.push_back(check_l2_bound(cfg9, run.nominal.controller));
  run.criteria.push_back(check_instability(run.fig10, run.fig10_loop_radius));
  run.criteria.push_back(
      check_robust(robust_example_config(), run.robust, run.fig11, run.fig11_loop_radius));
  run.criteria.push_back(check_fsfh_convergence(cfg9, run.nominal.controller, 32));

  auto outcome = [](const SimulationTrace& t) { return t.diverged ? "diverged" : "stable"; };
  json crit = json::array();
  for (const CriterionResult& c : run.criteria) {
    crit.push_back({{"id", c.id}, {"pass", c.pass}, {"detail", c.detail}});
  }
  run.summary = {
      {"fig9",
       {{"outcome", outcome(run.fig9)},
        {"gamma", run.nominal.controller.gamma},
        {"loop_stable", run.nominal.verification.stable},
        {"metrics", metrics_to_json(run.fig9, run.nominal.controller.gamma)}}},
      {"fig10",
       {{"outcome", outcome(run.fig10)},
        {"gamma", run.nominal_40db.controller.gamma},
        {"perturbed_loop_spectral_radius", run.fig10_loop_radius},
        {"metrics", metrics_to_json(run.fig10)}}},
      {"fig11",
       {{"outcome", outcome(run.fig11)},
        {"gamma1", run.robust.controller.gamma1},
        {"gamma2", run.robust.controller.gamma2},
        {"small_gain", run.robust.verification.small_gain},
        {"perturbed_loop_spectral_radius", run.fig11_loop_radius},
        {"metrics", metrics_to_json(run.fig11)}}},
      {"criteria", crit},
      {"timings",
       {{"nominal_synthesis_s", run.nominal.timings.synthesis_s},
        {"robust_synthesis_s", run.robust.timings.synthesis_s},
        {"total_s", seconds_since(start)}}}};

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_trace_csv((dir / "fig9.csv").string(), run.fig9);
    write_trace_csv((dir / "fig10.csv").string(), run.fig10);
    write_trace_csv((dir / "fig11.csv").string(), run.fig11);
    write_json((dir / "summary.json").string(), run.summary);
  }
  return run;
}

std::vector<LiftCheckRow> lift_check(const ExperimentConfig& cfg,
                                     const std::vector<int>& factors) {
  cfg.validate();
  const GeneralizedPlantSpec spec =
      build_generalized_plant(cfg.relay_params(), nominal_only(cfg.channel));
  const Controller base =
      synthesize_nominal(fsfh_lift(spec, cfg.design.N), cfg.design.tol);
  std::vector<LiftCheckRow> rows;
  for (int n : factors) {
    LiftCheckRow row;
    row.N = n;
    row.gamma_synth = synthesize_nominal(fsfh_lift(spec, n), cfg.design.tol).gamma;
    row.norm_of_design = sampled_data_norm(spec, base.sys, n).norm;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sdcancel
