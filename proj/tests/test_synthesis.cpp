#include <gtest/gtest.h>

#include <numbers>

#include "sdcancel/ellipsoid.hpp"
#include "sdcancel/errors.hpp"
#include "sdcancel/hinf_synthesis.hpp"
#include "sdcancel/linalg.hpp"
#include "sdcancel/synthesis.hpp"
#include "test_util.hpp"

using namespace sdcancel;

namespace {

GeneralizedPlantSpec nominal_spec(double a2) {
  return build_generalized_plant(reference_relay_params(a2), CouplingChannel{});
}

// Nominal designs are reused across tests.
const Controller& nominal_n4() {
  static const Controller k = synthesize_nominal(fsfh_lift(nominal_spec(1000.0), 4));
  return k;
}

const Controller& nominal_n16() {
  static const Controller k = synthesize_nominal(fsfh_lift(nominal_spec(1000.0), 16));
  return k;
}

RobustPlant robust_plant(int N) {
  CouplingChannel ch;
  ch.extra_paths = {{0.02, 2.0}};
  return build_robust_plant(build_generalized_plant(reference_relay_params(100.0), ch), N, 0.01);
}

}  // namespace

TEST(Ellipsoid, ConstrainedQuadratic) {
  // min (x0 - 2)^2 + (x1 + 1)^2  s.t.  x0 + x1 <= 0.5 ; optimum (1.75, -1.25)
  const ConvexOracle oracle = [](const Vector& x) {
    ConvexCut c;
    c.objective = std::pow(x(0) - 2, 2) + std::pow(x(1) + 1, 2);
    c.objective_grad = Vector(2);
    c.objective_grad << 2 * (x(0) - 2), 2 * (x(1) + 1);
    c.constraint = x(0) + x(1) - 0.5;
    c.constraint_grad = Vector::Ones(2);
    return c;
  };
  EllipsoidOptions opt;
  opt.initial_radius = 10.0;
  opt.tol = 1e-9;
  const EllipsoidResult r = ellipsoid_minimize(2, oracle, opt);
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.75, 1e-4);
  EXPECT_NEAR(r.x(1), -1.25, 1e-4);
  EXPECT_NEAR(r.objective, 0.125, 1e-8);
}

TEST(Ellipsoid, ProvesInfeasibility) {
  const ConvexOracle oracle = [](const Vector& x) {
    ConvexCut c;
    c.objective = x.squaredNorm();
    c.objective_grad = 2 * x;
    c.constraint = 5.0 - x(0);  // x0 >= 5, outside the unit ball
    c.constraint_grad = Vector::Zero(x.size());
    c.constraint_grad(0) = -1.0;
    return c;
  };
  const EllipsoidResult r = ellipsoid_minimize(3, oracle);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.proved_infeasible);
}

TEST(Ellipsoid, OneDimensional) {
  const ConvexOracle oracle = [](const Vector& x) {
    ConvexCut c;
    c.objective = std::abs(x(0) - 0.3);
    c.objective_grad = Vector::Constant(1, x(0) >= 0.3 ? 1.0 : -1.0);
    c.constraint = -1.0;
    c.constraint_grad = Vector::Zero(1);
    return c;
  };
  EllipsoidOptions opt;
  opt.tol = 1e-10;
  EXPECT_NEAR(ellipsoid_minimize(1, oracle, opt).x(0), 0.3, 1e-8);
}

TEST(CentralController, StaticModelMatching) {
  // z = w + u, y = w: u = -y cancels exactly, any gamma > 0 is feasible with a
  // closed loop norm below gamma
  const Matrix d = (Matrix(2, 2) << 1, 1, 1, 0).finished();
  Matrix a(1, 1), b(1, 2), c(2, 1);
  a << 0.5;
  b << 0, 0;
  c << 0, 0;
  const StateSpace plant = StateSpace::Discrete(a, b, c, d, 1.0);
  const HinfDesign des = hinf_synthesize(plant, {1, 1});
  EXPECT_LT(des.closed_loop_norm, 1e-2);
}

TEST(NominalSynthesis, LoopStableAndNormBelowGamma) {
  const Controller& k = nominal_n4();
  EXPECT_EQ(k.method, DesignMethod::kNominalHinf);
  EXPECT_EQ(k.meta.N, 4);
  const LiftedPlant lp = fsfh_lift(nominal_spec(1000.0), 4);
  const StateSpace cl = lifted_closed_loop(lp, k.sys);
  ASSERT_TRUE(is_stable(cl));
  EXPECT_LE(hinf_norm(cl, 1e-8), k.gamma * (1 + 1e-6));
  // G11 alone has norm ~1: the canceler must do much better
  EXPECT_LT(k.gamma, 0.5);
}

TEST(NominalSynthesis, MatchesFirYoulaOracle) {
  // Independent optimum: FIR Youla parameter minimized on a frequency grid by
  // the ellipsoid method. Both approach the same infimum.
  const LiftedPlant lp = fsfh_lift(nominal_spec(1000.0), 4);
  const Index zs = lp.z_size(), ws = lp.w_size();
  const AffineMap m{lp.sys.select(0, zs, 0, ws), lp.sys.select(0, zs, ws, 2),
                    lp.sys.select(zs, 2, 0, ws)};
  const auto grid = affine_grid(m, log_grid(1e-3, std::numbers::pi, 512), 1.0);
  const int nq = 8;
  const Index dim = 4 * nq;
  const ConvexOracle oracle = [&](const Vector& x) {
    kernels::FirCoefficients q(nq);
    for (int l = 0; l < nq; ++l) q[l] = Eigen::Map<const Matrix>(x.data() + 4 * l, 2, 2);
    const auto s = kernels::serial::affine_sigma_sweep(grid, q);
    const Index i = kernels::argmax(s);
    ConvexCut c;
    c.objective = s[i];
    c.objective_grad = kernels::affine_subgradient(grid, i, q);
    c.constraint = -1.0;
    c.constraint_grad = Vector::Zero(dim);
    return c;
  };
  EllipsoidOptions opt;
  opt.tol = 1e-6;
  const EllipsoidResult r = ellipsoid_minimize(dim, oracle, opt);
  const double riccati = nominal_n4().gamma;
  // grid values can only undershoot the true norm of the FIR design
  EXPECT_NEAR(r.objective, riccati, 5e-3 * riccati);
}

TEST(NominalSynthesis, VerificationAtDoubleN) {
  const Controller& k = nominal_n16();
  const VerificationReport rep = verify_design(nominal_spec(1000.0), k, 32);
  EXPECT_TRUE(rep.stable);
  EXPECT_LT(rep.relative_gap, 0.05);
  EXPECT_FALSE(rep.l2_bound.empty());
}

TEST(NominalSynthesis, ZeroPaGainIsTrivial) {
  const Controller k = synthesize_nominal(fsfh_lift(nominal_spec(0.0), 4));
  const VerificationReport rep = verify_design(nominal_spec(0.0), k, 8);
  EXPECT_TRUE(rep.stable);
  EXPECT_GT(k.gamma, 0.0);
}

TEST(Youla, FirRealization) {
  kernels::FirCoefficients taps{Matrix::Identity(2, 2), 0.5 * Matrix::Ones(2, 2),
                                Matrix::Constant(2, 2, -0.25)};
  const StateSpace q = fir_system(taps, 1.0);
  for (double w : {0.2, 1.7}) {
    const Complex zi = std::polar(1.0, -w);
    const CMatrix ref = taps[0].cast<Complex>() + zi * taps[1].cast<Complex>() +
                        zi * zi * taps[2].cast<Complex>();
    EXPECT_LT((frequency_response(q, w) - ref).norm(), 1e-12);
  }
}

TEST(Youla, ControllerGivesAffineClosedLoop) {
  const RobustPlant rp = robust_plant(4);
  const YoulaMaps maps = youla_closed_loop_maps(rp);
  std::mt19937_64 rng(21);
  kernels::FirCoefficients taps;
  for (int l = 0; l < 3; ++l) taps.push_back(0.01 * testutil::random_matrix(rng, 2, 2));
  const StateSpace q = fir_system(taps, 1.0);
  const StateSpace k = youla_controller(maps.g22, q);
  const StateSpace cl = lifted_closed_loop(rp.lifted, k);
  const Index z1 = rp.lifted.z_channels[0], w1 = rp.lifted.w_channels[0];
  for (double w : {0.05, 0.9, 2.8}) {
    const AffineMap& m = maps.channels[0];
    const CMatrix ref = frequency_response(m.t1, w) +
                        frequency_response(m.t2, w) * frequency_response(q, w) *
                            frequency_response(m.t3, w);
    const CMatrix got = frequency_response(cl, w).topLeftCorner(z1, w1);
    EXPECT_LT((got - ref).norm(), 1e-8 * (1 + ref.norm()));
  }
}

TEST(RobustSynthesis, CertifiedSmallGain) {
  const RobustPlant rp = robust_plant(4);
  RobustOptions opt;
  opt.n_q = 2;
  const RobustDesign d = synthesize_robust(rp, opt);
  EXPECT_EQ(d.controller.method, DesignMethod::kRobustQParam);
  EXPECT_LE(d.controller.gamma2, 1.0);
  EXPECT_GT(d.controller.gamma1, 0.0);
  EXPECT_LE(d.grid_constraint, d.controller.gamma2 + 1e-9);
  // certified by an independent norm computation on the closed loop
  const StateSpace cl = lifted_closed_loop(rp.lifted, d.controller.sys);
  ASSERT_TRUE(is_stable(cl));
  const Index off = rp.lifted.z_offset(1), w_off = rp.lifted.w_offset(1);
  const StateSpace t22 = cl.select(off, rp.lifted.z_channels[1], w_off,
                                   rp.lifted.w_channels[1]);
  EXPECT_LE(hinf_norm(t22, 1e-8), 1.0);
}

TEST(RobustSynthesis, HugeUncertaintyForcesWeakCanceler) {
  // K = 0 is always admissible for a stable plant, so a large W2 leaves the
  // performance close to the open-loop value ||W|| = 1 instead of failing.
  CouplingChannel ch;
  ch.extra_paths = {{0.4, 2.0}};
  const RobustPlant rp =
      build_robust_plant(build_generalized_plant(reference_relay_params(1000.0), ch), 4, 0.01);
  RobustOptions opt;
  opt.n_q = 1;
  const RobustDesign d = synthesize_robust(rp, opt);
  EXPECT_LE(d.controller.gamma2, 1.0);
  EXPECT_GT(d.controller.gamma1, 0.9);
}

TEST(Perturbations, AdmissibleAndReproducible) {
  CouplingChannel nominal;
  const auto a = random_perturbations(nominal, 0.1, 30, 28, 1.0, 99);
  const auto b = random_perturbations(nominal, 0.1, 30, 28, 1.0, 99);
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(a[i].relative_extra_gain(), 0.1 + 1e-12);
    EXPECT_GE(a[i].extra_paths.size(), 1u);
    EXPECT_LE(a[i].extra_paths.size(), 3u);
    for (std::size_t j = 0; j < a[i].extra_paths.size(); ++j) {
      const Path& p = a[i].extra_paths[j];
      EXPECT_GT(p.delay, nominal.nominal.delay);
      EXPECT_NO_THROW(delay_steps(p.delay, 1.0, 28));
      EXPECT_EQ(p.r, b[i].extra_paths[j].r);
      EXPECT_EQ(p.delay, b[i].extra_paths[j].delay);
    }
  }
}

TEST(Perturbations, SerialAndParallelSweepsAgree) {
  const RelayParams prm = reference_relay_params(100.0);
  const auto chans = random_perturbations(CouplingChannel{}, 0.1, 6, 28, 1.0, 5);
  const StateSpace k = nominal_n4().sys;
  const SweepResult s = serial::perturbation_sweep(prm, chans, k, 28);
  const SweepResult p = omp::perturbation_sweep(prm, chans, k, 28);
  ASSERT_EQ(s.spectral_radius.size(), p.spectral_radius.size());
  for (std::size_t i = 0; i < s.spectral_radius.size(); ++i) {
    EXPECT_EQ(s.spectral_radius[i], p.spectral_radius[i]);
  }
  EXPECT_EQ(s.stable_count, p.stable_count);
}

TEST(Perturbations, GridSelection) {
  CouplingChannel ch;
  ch.extra_paths = {{0.014, 1.1}};
  EXPECT_EQ(fsfh_grid_for(ch, 1.0, 4), 10);
  ch.extra_paths = {{0.014, 1.0 + 1.0 / 7.0}};
  EXPECT_EQ(fsfh_grid_for(ch, 1.0, 4), 7);
  ch.extra_paths = {{0.014, 1.0 + 1e-5 * std::numbers::pi}};
  EXPECT_THROW(fsfh_grid_for(ch, 1.0, 1, 64), OffGridDelayError);
}

TEST(DesignMethod, Strings) {
  EXPECT_EQ(parse_design_method("nominal"), DesignMethod::kNominalHinf);
  EXPECT_EQ(parse_design_method("robust_qparam"), DesignMethod::kRobustQParam);
  EXPECT_EQ(parse_design_method(to_string(DesignMethod::kRobustQParam)),
            DesignMethod::kRobustQParam);
  EXPECT_THROW(parse_design_method("lqg"), Error);
}
