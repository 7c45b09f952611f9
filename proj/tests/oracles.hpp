#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the library routine it checks.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "sdcancel/lti.hpp"
#include "sdcancel/relay_model.hpp"
#include "sdcancel/sampled_data.hpp"
#include "sdcancel/sim.hpp"

namespace oracle {

using sdcancel::Index;
using sdcancel::Matrix;
using sdcancel::Vector;

/// Plain Taylor series of exp(M) with scaling and squaring.
inline Matrix series_expm(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix a = m / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = (term * a / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

/// ZOH pair (Ad, Bd) from the series expm of the augmented matrix.
inline std::pair<Matrix, Matrix> series_zoh(const Matrix& a, const Matrix& b,
                                            double t) {
  const Index n = a.rows(), m = b.cols();
  Matrix big = Matrix::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = a * t;
  big.topRightCorner(n, m) = b * t;
  const Matrix e = series_expm(big);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Largest entry error between zoh_discretize and the series oracle over a
/// few systems (the relay filters and seeded random stable ones).
inline double zoh_max_error(std::uint64_t seed = 5) {
  std::vector<std::pair<sdcancel::StateSpace, double>> cases;
  const sdcancel::RelayParams prm = sdcancel::reference_relay_params();
  cases.emplace_back(prm.W, 0.25);
  cases.emplace_back(prm.P, 1.0 / 16.0);
  cases.emplace_back(prm.P, 1.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int c = 0; c < 4; ++c) {
    const Index n = 2 + c;
    Matrix a(n, n), b(n, 2), cc(1, n), d(1, 2);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
    cc.setOnes();
    d.setZero();
    a -= (a.eigenvalues().real().maxCoeff() + 1.0) * Matrix::Identity(n, n);
    cases.emplace_back(sdcancel::StateSpace::Continuous(a, b, cc, d), 0.3);
  }
  double worst = 0.0;
  for (const auto& [sys, t] : cases) {
    const sdcancel::StateSpace sd = sdcancel::zoh_discretize(sys, t);
    const auto [ad, bd] = series_zoh(sys.a(), sys.b(), t);
    worst = std::max(worst, (sd.a() - ad).cwiseAbs().maxCoeff());
    worst = std::max(worst, (sd.b() - bd).cwiseAbs().maxCoeff());
  }
  return worst;
}

/**
 * Relative difference between the lifted plant and a direct fine-step
 * simulation of W, P, F and the delayed coupling path driven by
 * piecewise-constant inputs. F must be static. Each fast step is split into
 * `substeps` exact sub-steps.
 */
inline double lifted_vs_fine_error(int N, int periods, int substeps,
                                   std::uint64_t seed = 3) {
  const sdcancel::RelayParams prm = sdcancel::reference_relay_params(1000.0);
  sdcancel::CouplingChannel ch;
  const sdcancel::GeneralizedPlantSpec spec =
      sdcancel::build_generalized_plant(prm, ch);
  const sdcancel::LiftedPlant lp = sdcancel::fsfh_lift(spec, N);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const Index steps = static_cast<Index>(N) * periods;
  Matrix w(2, steps), u(2, periods);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = ud(rng);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = ud(rng);

  // lifted run
  Matrix z_lift(2, steps), y_lift(2, periods);
  Vector x = Vector::Zero(lp.sys.states());
  for (Index k = 0; k < periods; ++k) {
    Vector in(2 * N + 2);
    for (int j = 0; j < N; ++j) in.segment(2 * j, 2) = w.col(k * N + j);
    in.tail(2) = u.col(k);
    const Vector out = lp.sys.c() * x + lp.sys.d() * in;
    for (int j = 0; j < N; ++j) z_lift.col(k * N + j) = out.segment(2 * j, 2);
    y_lift.col(k) = out.tail(2);
    x = lp.sys.a() * x + lp.sys.b() * in;
  }

  // fine run: states [W, P(u), P(u delayed)], inputs [w, u, u_delayed]
  const Index nw = prm.W.states(), np = prm.P.states();
  const Index n = nw + 2 * np;
  Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, 6);
  a.block(0, 0, nw, nw) = prm.W.a();
  a.block(nw, nw, np, np) = prm.P.a();
  a.block(nw + np, nw + np, np, np) = prm.P.a();
  b.block(0, 0, nw, 2) = prm.W.b();
  b.block(nw, 2, np, 2) = prm.P.b();
  b.block(nw + np, 4, np, 2) = prm.P.b();
  const double dt = prm.h / N / substeps;
  const auto [ad, bd] = series_zoh(a, b, dt);
  const double delay_steps = ch.nominal.delay * N / prm.h;
  const Index lag = static_cast<Index>(std::llround(delay_steps));
  const Matrix gain = spec.alpha * sdcancel::rotation_matrix(prm.f, ch.nominal.delay);

  Matrix z_fine(2, steps), y_fine(2, periods);
  Vector xf = Vector::Zero(n);
  for (Index i = 0; i < steps; ++i) {
    Vector in = Vector::Zero(6);
    in.head(2) = w.col(i);
    in.segment(2, 2) = u.col(i / N);
    if (i >= lag) in.tail(2) = u.col((i - lag) / N);
    const Vector v = prm.W.c() * xf.head(nw) + prm.W.d() * in.head(2);
    const Vector pu = prm.P.c() * xf.segment(nw, np) + prm.P.d() * in.segment(2, 2);
    const Vector pd = prm.P.c() * xf.tail(np) + prm.P.d() * in.tail(2);
    z_fine.col(i) = v - pu;
    if (i % N == 0) y_fine.col(i / N) = prm.F.d() * (v + gain * pd);
    for (int s = 0; s < substeps; ++s) xf = ad * xf + bd * in;
  }
  const double scale = std::max(z_fine.cwiseAbs().maxCoeff(), y_fine.cwiseAbs().maxCoeff());
  const double err = std::max((z_fine - z_lift).cwiseAbs().maxCoeff(),
                              (y_fine - y_lift).cwiseAbs().maxCoeff());
  return err / scale;
}

/// Worst orthogonality / composition defect of the carrier rotations.
inline double rotation_error() {
  const double f = 1.0e4;
  const std::vector<double> delays{0.0, 1.0, 1.1, 0.25, 0.3, 2.0, 1.0 + 1.0 / 28.0};
  double worst = 0.0;
  for (double l1 : delays) {
    const Matrix r1 = sdcancel::rotation_matrix(f, l1);
    worst = std::max(worst, (r1.transpose() * r1 - Matrix::Identity(2, 2))
                                .cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(r1.determinant() - 1.0));
    for (double l2 : delays) {
      // compose through the phase in turns so the reference is exact
      const double t1 = f * l1 - std::floor(f * l1);
      const double t2 = f * l2 - std::floor(f * l2);
      double turns = t1 + t2;
      turns -= std::floor(turns);
      const double ang = 2.0 * std::numbers::pi * turns;
      Matrix ref(2, 2);
      ref << std::cos(ang), std::sin(ang), -std::sin(ang), std::cos(ang);
      const Matrix r2 = sdcancel::rotation_matrix(f, l2);
      worst = std::max(worst, (r1 * r2 - ref).cwiseAbs().maxCoeff());
      worst = std::max(worst, (r1 * r2 - r2 * r1).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

struct EBound {
  double bound = 0.0;     // sum r_i / r
  double peak = 0.0;      // max sigma_max(E) over the grid
  double mismatch = 0.0;  // library vs direct evaluation
};

/// sigma_max(E(jw)) on a 1000-point log grid over [1e-3, 1e3], evaluated both
/// by the library and directly from the path list.
inline EBound e_bound_check(const sdcancel::CouplingChannel& ch, double f) {
  EBound out;
  for (const auto& p : ch.extra_paths) out.bound += p.r / ch.nominal.r;
  for (int i = 0; i < 1000; ++i) {
    const double w = std::pow(10.0, -3.0 + 6.0 * i / 999.0);
    Eigen::Matrix2cd e = Eigen::Matrix2cd::Zero();
    for (const auto& p : ch.extra_paths) {
      const double dl = p.delay - ch.nominal.delay;
      const double ang = 2.0 * std::numbers::pi * f * dl;
      Eigen::Matrix2d rot;
      rot << std::cos(ang), std::sin(ang), -std::sin(ang), std::cos(ang);
      e += (p.r / ch.nominal.r) * std::polar(1.0, -w * dl) *
           rot.cast<std::complex<double>>();
    }
    const sdcancel::CMatrix lib = sdcancel::error_system_response(ch, w, f);
    const double s_lib = Eigen::JacobiSVD<sdcancel::CMatrix>(lib).singularValues()(0);
    const double s_ref = Eigen::JacobiSVD<Eigen::Matrix2cd>(e).singularValues()(0);
    out.peak = std::max(out.peak, std::max(s_lib, s_ref));
    out.mismatch = std::max(out.mismatch, std::abs(s_lib - s_ref));
  }
  return out;
}

/// Relative L2 error between the passband oracle output and
/// alpha A_L u(t - L), measured after the low-pass transient.
inline double passband_relative_error(double duration = 1.5, double hz = 0.5) {
  const sdcancel::RelayParams prm = sdcancel::reference_relay_params(1000.0);
  const sdcancel::Path path{0.2, 1.0};
  const double dt = 1e-3;
  const Index n = static_cast<Index>(std::llround(duration / dt)) + 1;
  Matrix u(2, n);
  for (Index k = 0; k < n; ++k) {
    const double t = k * dt;
    u(0, k) = std::sin(2.0 * std::numbers::pi * hz * t);
    u(1, k) = 0.5 * std::cos(2.0 * std::numbers::pi * 0.7 * hz * t);
  }
  const Matrix out = sdcancel::passband_oracle(u, dt, prm, path, 16);
  const Matrix gain = prm.a1 * prm.a2 * path.r * sdcancel::rotation_matrix(prm.f, path.delay);
  const Index lag = static_cast<Index>(std::llround(path.delay / dt));
  const Index start =
      lag + static_cast<Index>(std::ceil(sdcancel::passband_settling_time(prm) / dt));
  double num = 0.0, den = 0.0;
  for (Index k = start; k < n; ++k) {
    const Vector ref = gain * u.col(k - lag);
    num += (out.col(k) - ref).squaredNorm();
    den += ref.squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace oracle
