#include "sdcancel/synthesis.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>

#include "sdcancel/ellipsoid.hpp"
#include "sdcancel/errors.hpp"
#include "sdcancel/hinf_synthesis.hpp"

namespace sdcancel {

std::string to_string(DesignMethod method) {
  return method == DesignMethod::kNominalHinf ? "nominal_hinf" : "robust_qparam";
}

DesignMethod parse_design_method(const std::string& text) {
  if (text == "nominal_hinf" || text == "nominal") return DesignMethod::kNominalHinf;
  if (text == "robust_qparam" || text == "robust") return DesignMethod::kRobustQParam;
  throw InvalidArgument("unknown design method '" + text + "'");
}

Controller synthesize_nominal(const LiftedPlant& lp, double tol) {
  HinfDesignOptions opts;
  opts.rel_tol = tol;
  const HinfDesign design = hinf_synthesize(lp.sys, lp.partition(), opts);
  Controller k;
  k.sys = design.controller;
  k.method = DesignMethod::kNominalHinf;
  k.gamma = design.gamma;
  k.open_loop_stable = is_stable(k.sys);
  k.meta.N = lp.N;
  k.meta.tol = tol;
  k.meta.iterations = design.iterations;
  return k;
}

StateSpace fir_system(const kernels::FirCoefficients& taps, double period) {
  if (taps.empty()) throw InvalidArgument("FIR filter needs at least one tap");
  const Index rows = taps.front().rows(), cols = taps.front().cols();
  for (const Matrix& t : taps) {
    if (t.rows() != rows || t.cols() != cols) {
      throw DimensionError("FIR taps must share one shape");
    }
  }
  const Index lags = static_cast<Index>(taps.size()) - 1;
  const Index n = lags * cols;
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, cols);
  Matrix c = Matrix::Zero(rows, n);
  // state block l holds the input from l + 1 steps ago
  if (lags > 0) b.topRows(cols).setIdentity();
  for (Index l = 0; l < lags; ++l) {
    if (l > 0) a.block(l * cols, (l - 1) * cols, cols, cols).setIdentity();
    c.middleCols(l * cols, cols) = taps[l + 1];
  }
  return StateSpace::Discrete(a, b, c, taps.front(), period);
}

StateSpace youla_controller(const StateSpace& g22, const StateSpace& q) {
  if (!g22.same_domain(q)) throw DimensionError("Q and G22 domains differ");
  const Index ny = g22.outputs(), nu = g22.inputs();
  if (q.inputs() != ny || q.outputs() != nu) {
    throw DimensionError("Q must map measurements to controls");
  }
  // inputs [y, u_q], outputs [u, e]; e = y - G22 u_q and u_q = Q e
  const Index n = g22.states();
  Matrix b = Matrix::Zero(n, ny + nu);
  b.rightCols(nu) = g22.b();
  Matrix c = Matrix::Zero(nu + ny, n);
  c.bottomRows(ny) = -g22.c();
  Matrix d = Matrix::Zero(nu + ny, ny + nu);
  d.topRightCorner(nu, nu).setIdentity();
  d.bottomLeftCorner(ny, ny).setIdentity();
  d.bottomRightCorner(ny, nu) = -g22.d();
  const StateSpace m = StateSpace::Discrete(g22.a(), b, c, d, g22.period());
  return lower_lft(m, q, IoPartition{ny, nu});
}

StateSpace QParam::q_system() const { return fir_system(coeffs, base.period()); }

StateSpace QParam::controller() const {
  return youla_controller(base, q_system());
}

RobustPlant build_robust_plant(const GeneralizedPlantSpec& spec, int N,
                               double epsilon) {
  RobustPlant rp;
  rp.epsilon = epsilon;
  rp.w2 = uncertainty_weight(spec.channel, epsilon).d();
  LiftOptions opts;
  opts.uncertainty_weight = rp.w2;
  rp.lifted = fsfh_lift(spec, N, opts);
  return rp;
}

YoulaMaps youla_closed_loop_maps(const RobustPlant& rp) {
  const LiftedPlant& lp = rp.lifted;
  YoulaMaps maps;
  maps.g22 = lp.g22();
  if (!is_stable(maps.g22)) {
    throw InvalidArgument("Youla maps need a stable G22");
  }
  const Index zu = lp.z_size(), wu = lp.w_size();
  for (std::size_t c = 0; c < lp.w_channels.size(); ++c) {
    const Index zo = lp.z_offset(c), zs = lp.z_channels[c];
    const Index wo = lp.w_offset(c), ws = lp.w_channels[c];
    maps.channels.push_back(AffineMap{lp.sys.select(zo, zs, wo, ws),
                                      lp.sys.select(zo, zs, wu, 2),
                                      lp.sys.select(zu, 2, wo, ws)});
  }
  return maps;
}

kernels::AffineGrid affine_grid(const AffineMap& map,
                                const std::vector<double>& omegas, double h) {
  kernels::AffineGrid grid;
  grid.z.reserve(omegas.size());
  for (double w : omegas) grid.z.push_back(std::polar(1.0, w * h));
  grid.t1 = kernels::omp::response_sweep(map.t1, omegas);
  grid.t2 = kernels::omp::response_sweep(map.t2, omegas);
  grid.t3 = kernels::omp::response_sweep(map.t3, omegas);
  return grid;
}

namespace {

kernels::FirCoefficients unpack(const Vector& x, int n_q) {
  kernels::FirCoefficients q(n_q);
  for (int l = 0; l < n_q; ++l) {
    q[l] = Eigen::Map<const Matrix>(x.data() + 4 * l, 2, 2);
  }
  return q;
}

Vector pack(const kernels::FirCoefficients& q, int n_q) {
  Vector x = Vector::Zero(4 * n_q);
  for (int l = 0; l < std::min<int>(n_q, static_cast<int>(q.size())); ++l) {
    Eigen::Map<Matrix>(x.data() + 4 * l, 2, 2) = q[l];
  }
  return x;
}

}  // namespace

RobustDesign synthesize_robust(const RobustPlant& rp,
                               const RobustOptions& options) {
  if (options.n_q < 1) throw InvalidArgument("n_q must be at least 1");
  if (!(options.margin > 0.0 && options.margin < 0.2)) {
    throw InvalidArgument("margin must lie in (0, 0.2)");
  }
  if (options.grid_size < 2) throw InvalidArgument("grid_size must be >= 2");
  const LiftedPlant& lp = rp.lifted;
  if (lp.w_channels.size() != 2) {
    throw DimensionError("robust synthesis needs the two-channel plant");
  }
  const YoulaMaps maps = youla_closed_loop_maps(rp);
  const double h = lp.h;
  const std::vector<double> omegas =
      log_grid(1e-3, std::numbers::pi / h, options.grid_size);
  const kernels::AffineGrid perf = affine_grid(maps.channels[0], omegas, h);
  const kernels::AffineGrid unc = affine_grid(maps.channels[1], omegas, h);
  const Index dim = 4 * options.n_q;

  double margin = options.margin;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    const double bound = 1.0 - margin;
    const ConvexOracle oracle = [&](const Vector& x) {
      const kernels::FirCoefficients q = unpack(x, options.n_q);
      const std::vector<double> sp = kernels::omp::affine_sigma_sweep(perf, q);
      const std::vector<double> su = kernels::omp::affine_sigma_sweep(unc, q);
      const Index ip = kernels::argmax(sp), iu = kernels::argmax(su);
      ConvexCut cut;
      cut.objective = sp[ip];
      cut.constraint = su[iu] - bound;
      if (cut.constraint > 0.0) {
        cut.constraint_grad = kernels::affine_subgradient(unc, iu, q);
        cut.objective_grad = Vector::Zero(dim);
      } else {
        cut.objective_grad = kernels::affine_subgradient(perf, ip, q);
        cut.constraint_grad = Vector::Zero(dim);
      }
      return cut;
    };
    EllipsoidOptions eo;
    eo.initial_radius = options.initial_radius;
    eo.tol = options.tol;
    eo.max_iterations = options.max_iterations;
    if (options.warm_start) eo.center = pack(*options.warm_start, options.n_q);
    const EllipsoidResult sol = ellipsoid_minimize(dim, oracle, eo);
    if (!sol.feasible) {
      throw InfeasibleError(
          "robust synthesis: uncertainty constraint infeasible for this n_q");
    }

    RobustDesign design;
    design.q.coeffs = unpack(sol.x, options.n_q);
    design.q.base = maps.g22;
    design.grid_objective = sol.objective;
    design.grid_constraint = sol.constraint + bound;

    Controller& k = design.controller;
    k.sys = balanced(design.q.controller());
    k.method = DesignMethod::kRobustQParam;
    k.open_loop_stable = is_stable(k.sys);
    k.meta.N = lp.N;
    k.meta.n_q = options.n_q;
    k.meta.grid_size = options.grid_size;
    k.meta.margin = margin;
    k.meta.tol = options.tol;
    k.meta.epsilon = rp.epsilon;
    k.meta.iterations = sol.iterations;
    k.meta.retries = attempt;

    const StateSpace cl = lifted_closed_loop(lp, k.sys);
    if (!is_stable(cl)) {
      throw NumericError("robust synthesis: reconstructed loop is unstable");
    }
    const Index z0 = lp.z_channels[0], w0 = lp.w_channels[0];
    k.gamma2 = hinf_norm(cl.select(z0, lp.z_channels[1], w0, lp.w_channels[1]));
    if (k.gamma2 <= 1.0) {
      k.gamma1 = hinf_norm(cl.select(0, z0, 0, w0));
      k.gamma = k.gamma1;
      return design;
    }
    margin = std::min(2.0 * margin, 0.5);
  }
  throw InfeasibleError(
      "robust synthesis: exact norm of the uncertainty channel exceeds 1 "
      "after all retries");
}

VerificationReport verify_design(const GeneralizedPlantSpec& spec,
                                 const Controller& k, int N_verify,
                                 double tol) {
  VerificationReport rep;
  rep.N_verify = N_verify;
  rep.robust = k.method == DesignMethod::kRobustQParam;
  rep.synthesis_gamma = rep.robust ? k.gamma1 : k.gamma;
  try {
    LiftOptions opts;
    if (rep.robust) {
      opts.uncertainty_weight =
          uncertainty_weight(spec.channel, k.meta.epsilon).d();
    }
    const LiftedPlant lp = fsfh_lift(spec, N_verify, opts);
    const StateSpace cl = lifted_closed_loop(lp, k.sys);
    const StabilityReport st = stability(cl);
    rep.spectral_radius = st.spectral_bound;
    rep.stable = st.verdict == Stability::kStable;
    if (!rep.stable) {
      std::ostringstream msg;
      msg << "closed loop not stable at N = " << N_verify
          << " (spectral radius " << st.spectral_bound << ")";
      rep.diagnostic = msg.str();
      return rep;
    }
    const Index z0 = lp.z_channels[0], w0 = lp.w_channels[0];
    rep.norm = hinf_norm(cl.select(0, z0, 0, w0), tol);
    if (rep.synthesis_gamma > 0.0) {
      rep.relative_gap =
          std::abs(rep.norm - rep.synthesis_gamma) / rep.synthesis_gamma;
    }
    if (rep.robust) {
      rep.gamma2_verify =
          hinf_norm(cl.select(z0, lp.z_channels[1], w0, lp.w_channels[1]), tol);
      const LiftedPlant ld = fsfh_lift(spec, k.meta.N, opts);
      const StateSpace cd = lifted_closed_loop(ld, k.sys);
      const Index zd = ld.z_channels[0], wd = ld.w_channels[0];
      rep.gamma2_design =
          hinf_norm(cd.select(zd, ld.z_channels[1], wd, ld.w_channels[1]), tol);
      rep.small_gain = rep.gamma2_design <= 1.0;
    }
    std::ostringstream bound;
    bound << "||v - u||_2 <= " << rep.norm << " * ||w||_2 for every v = W w";
    rep.l2_bound = bound.str();
  } catch (const std::exception& e) {
    rep.stable = false;
    rep.diagnostic = e.what();
  }
  return rep;
}

int fsfh_grid_for(const CouplingChannel& channel, double h, int min_N,
                  int max_N) {
  for (int n = std::max(1, min_N); n <= max_N; ++n) {
    try {
      delay_steps(channel.nominal.delay, h, n);
      for (const Path& p : channel.extra_paths) delay_steps(p.delay, h, n);
      return n;
    } catch (const OffGridDelayError&) {
    }
  }
  throw OffGridDelayError("no fast-rate factor up to " +
                          std::to_string(max_N) + " fits every delay");
}

double loop_spectral_radius(const RelayParams& params,
                            const CouplingChannel& channel,
                            const StateSpace& k, int N) {
  if (N <= 0) N = fsfh_grid_for(channel, params.h);
  const GeneralizedPlantSpec spec = build_generalized_plant(params, channel);
  LiftOptions opts;
  opts.include_extra_paths = true;
  opts.max_states = 100000;
  const LiftedPlant lp = fsfh_lift(spec, N, opts);
  return stability(lower_lft(lp.g22(), k, IoPartition{2, 2})).spectral_bound;
}

std::vector<CouplingChannel> random_perturbations(const CouplingChannel& nominal,
                                                  double bound, int count,
                                                  int grid, double h,
                                                  std::uint64_t seed) {
  if (grid < 1 || count < 0 || !(bound >= 0.0)) {
    throw InvalidArgument("random_perturbations: bad arguments");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<CouplingChannel> out;
  for (int i = 0; i < count; ++i) {
    CouplingChannel ch;
    ch.nominal = nominal.nominal;
    const int paths = 1 + static_cast<int>(rng() % 3);
    const double total = bound * nominal.nominal.r * (1.0 - uniform());
    std::vector<double> weight(paths);
    double sum = 0.0;
    for (double& w : weight) sum += (w = 0.05 + uniform());
    for (int p = 0; p < paths; ++p) {
      const auto steps = 1 + static_cast<long>(rng() % (2 * grid));
      ch.extra_paths.push_back(
          Path{total * weight[p] / sum,
               nominal.nominal.delay + static_cast<double>(steps) * h / grid});
    }
    out.push_back(std::move(ch));
  }
  return out;
}

namespace {

SweepResult finish_sweep(std::vector<double> radius) {
  SweepResult res;
  res.spectral_radius = std::move(radius);
  for (double r : res.spectral_radius) {
    if (r < 1.0 - kStabilityMargin) ++res.stable_count;
  }
  return res;
}

}  // namespace

namespace serial {
SweepResult perturbation_sweep(const RelayParams& params,
                               const std::vector<CouplingChannel>& channels,
                               const StateSpace& k, int N) {
  std::vector<double> radius(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    radius[i] = loop_spectral_radius(params, channels[i], k, N);
  }
  return finish_sweep(std::move(radius));
}
}  // namespace serial

namespace omp {
SweepResult perturbation_sweep(const RelayParams& params,
                               const std::vector<CouplingChannel>& channels,
                               const StateSpace& k, int N) {
  const auto n = static_cast<long>(channels.size());
  std::vector<double> radius(channels.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      radius[i] = loop_spectral_radius(params, channels[i], k, N);
    } catch (...) {
#pragma omp critical(sdcancel_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return finish_sweep(std::move(radius));
}
}  // namespace omp

}  // namespace sdcancel
