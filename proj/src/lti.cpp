#include "sdcancel/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdcancel/errors.hpp"
#include "sdcancel/kernels.hpp"
#include "sdcancel/linalg.hpp"

namespace sdcancel {

namespace {

StateSpace make_like(const StateSpace& ref, Matrix a, Matrix b, Matrix c,
                     Matrix d) {
  if (ref.is_discrete()) {
    return StateSpace::Discrete(std::move(a), std::move(b), std::move(c),
                                std::move(d), ref.period());
  }
  return StateSpace::Continuous(std::move(a), std::move(b), std::move(c),
                                std::move(d));
}

void require_same_domain(const StateSpace& a, const StateSpace& b,
                         const char* op) {
  if (!a.same_domain(b)) {
    throw DimensionError(std::string(op) +
                         ": systems live in different time domains");
  }
}

}  // namespace

StateSpace zoh_discretize(const StateSpace& sys, double period) {
  if (sys.is_discrete()) {
    throw InvalidArgument("zoh_discretize: system is already discrete");
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw InvalidArgument("zoh_discretize: period must be positive");
  }
  const Index n = sys.states(), m = sys.inputs();
  // exp([A B; 0 0] T) = [Ad Bd; 0 I]
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = sys.a() * period;
  aug.topRightCorner(n, m) = sys.b() * period;
  const Matrix phi = linalg::expm(aug);
  return StateSpace::Discrete(phi.topLeftCorner(n, n),
                              phi.topRightCorner(n, m), sys.c(), sys.d(),
                              period);
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  require_same_domain(first, second, "series");
  if (first.outputs() != second.inputs()) {
    throw DimensionError("series: output/input sizes differ");
  }
  const Index n1 = first.states(), n2 = second.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = first.a();
  a.bottomLeftCorner(n2, n1) = second.b() * first.c();
  a.bottomRightCorner(n2, n2) = second.a();
  Matrix b(n1 + n2, first.inputs());
  b << first.b(), second.b() * first.d();
  Matrix c(second.outputs(), n1 + n2);
  c << second.d() * first.c(), second.c();
  return make_like(first, a, b, c, second.d() * first.d());
}

StateSpace parallel(const StateSpace& first, const StateSpace& second) {
  require_same_domain(first, second, "parallel");
  if (first.inputs() != second.inputs() ||
      first.outputs() != second.outputs()) {
    throw DimensionError("parallel: input/output sizes differ");
  }
  const Index n1 = first.states(), n2 = second.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = first.a();
  a.bottomRightCorner(n2, n2) = second.a();
  Matrix b(n1 + n2, first.inputs());
  b << first.b(), second.b();
  Matrix c(first.outputs(), n1 + n2);
  c << first.c(), second.c();
  return make_like(first, a, b, c, first.d() + second.d());
}

StateSpace lower_lft(const StateSpace& plant, const StateSpace& controller,
                     IoPartition partition) {
  require_same_domain(plant, controller, "lower_lft");
  const Index ny = partition.measurements, nu = partition.controls;
  if (ny < 0 || nu < 0 || ny > plant.outputs() || nu > plant.inputs() ||
      controller.inputs() != ny || controller.outputs() != nu) {
    throw DimensionError("lower_lft: controller does not fit the partition");
  }
  const Index n = plant.states(), nk = controller.states();
  const Index m1 = plant.inputs() - nu, p1 = plant.outputs() - ny;

  const Matrix& a = plant.a();
  const Matrix b1 = plant.b().leftCols(m1), b2 = plant.b().rightCols(nu);
  const Matrix c1 = plant.c().topRows(p1), c2 = plant.c().bottomRows(ny);
  const Matrix d11 = plant.d().topLeftCorner(p1, m1);
  const Matrix d12 = plant.d().topRightCorner(p1, nu);
  const Matrix d21 = plant.d().bottomLeftCorner(ny, m1);
  const Matrix d22 = plant.d().bottomRightCorner(ny, nu);
  const Matrix& ak = controller.a();
  const Matrix& bk = controller.b();
  const Matrix& ck = controller.c();
  const Matrix& dk = controller.d();

  // u = Dk y + Ck xk, y = C2 x + D21 w + D22 u  =>  (I - Dk D22) u = ...
  const Matrix loop = Matrix::Identity(nu, nu) - dk * d22;
  Eigen::FullPivLU<Matrix> lu(loop);
  if (nu > 0 && lu.rcond() < 1e-12) {
    throw IllPosedError("lower_lft: I - D22*Dk is singular (improper loop)");
  }
  const Matrix r_inv = nu > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
  const Matrix ux = r_inv * dk * c2;
  const Matrix uk = r_inv * ck;
  const Matrix uw = r_inv * dk * d21;
  const Matrix yx = c2 + d22 * ux;
  const Matrix yk = d22 * uk;
  const Matrix yw = d21 + d22 * uw;

  Matrix acl(n + nk, n + nk);
  acl << a + b2 * ux, b2 * uk, bk * yx, ak + bk * yk;
  Matrix bcl(n + nk, m1);
  bcl << b1 + b2 * uw, bk * yw;
  Matrix ccl(p1, n + nk);
  ccl << c1 + d12 * ux, d12 * uk;
  return make_like(plant, acl, bcl, ccl, d11 + d12 * uw);
}

StateSpace interconnect(Interconnection kind, const StateSpace& sys1,
                        const StateSpace& sys2, IoPartition partition) {
  switch (kind) {
    case Interconnection::kSeries:
      return series(sys1, sys2);
    case Interconnection::kParallel:
      return parallel(sys1, sys2);
    case Interconnection::kLowerLft:
      return lower_lft(sys1, sys2, partition);
  }
  throw InvalidArgument("interconnect: unknown kind");
}

StabilityReport stability(const StateSpace& sys) {
  StabilityReport report;
  if (sys.states() == 0) {
    report.spectral_bound = sys.is_discrete() ? 0.0 : -INFINITY;
    return report;
  }
  const CVector eig = linalg::eigenvalues(sys.a());
  if (sys.is_discrete()) {
    report.spectral_bound = eig.cwiseAbs().maxCoeff();
    const double gap = 1.0 - report.spectral_bound;
    report.verdict = gap > kStabilityMargin    ? Stability::kStable
                     : gap >= -kStabilityMargin ? Stability::kMarginal
                                                : Stability::kUnstable;
  } else {
    report.spectral_bound = eig.real().maxCoeff();
    const double gap = -report.spectral_bound;
    report.verdict = gap > kStabilityMargin    ? Stability::kStable
                     : gap >= -kStabilityMargin ? Stability::kMarginal
                                                : Stability::kUnstable;
  }
  return report;
}

bool is_stable(const StateSpace& sys) {
  return stability(sys).verdict == Stability::kStable;
}

CMatrix evaluate(const StateSpace& sys, Complex point) {
  const Index n = sys.states();
  CMatrix d = sys.d().cast<Complex>();
  if (n == 0) return d;
  CMatrix pencil = -sys.a().cast<Complex>();
  pencil.diagonal().array() += point;
  Eigen::PartialPivLU<CMatrix> lu(pencil);
  // rcond is scale dependent, so only an exactly singular pivot or a
  // non-finite result marks a pole.
  const CMatrix out =
      lu.rcond() > 0.0
          ? CMatrix(sys.c().cast<Complex>() * lu.solve(sys.b().cast<Complex>()) + d)
          : CMatrix();
  if (out.size() == 0 || !out.allFinite()) {
    throw NumericError("frequency response: evaluation point is a pole");
  }
  return out;
}

CMatrix frequency_response(const StateSpace& sys, double omega) {
  const Complex point = sys.is_discrete()
                            ? std::polar(1.0, omega * sys.period())
                            : Complex(0.0, omega);
  return evaluate(sys, point);
}

StateSpace balanced(const StateSpace& sys) {
  if (sys.states() == 0) return sys;
  const Vector d = linalg::balancing_scales(sys.a());
  const Vector inv = d.cwiseInverse();
  const Matrix a = inv.asDiagonal() * sys.a() * d.asDiagonal();
  const Matrix b = inv.asDiagonal() * sys.b();
  const Matrix c = sys.c() * d.asDiagonal();
  return sys.is_discrete()
             ? StateSpace::Discrete(a, b, c, sys.d(), sys.period())
             : StateSpace::Continuous(a, b, c, sys.d());
}

StateSpace bilinear_to_continuous(const StateSpace& discrete) {
  if (!discrete.is_discrete()) {
    throw InvalidArgument("bilinear_to_continuous: system is continuous");
  }
  const Index n = discrete.states();
  const Matrix eye = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(discrete.a() + eye);
  if (n > 0 && !(lu.rcond() > 1e-16)) {
    throw NumericError("bilinear transform: eigenvalue at z = -1");
  }
  const Matrix inv = n > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
  const double s2 = std::numbers::sqrt2;
  return StateSpace::Continuous(inv * (discrete.a() - eye),
                                s2 * inv * discrete.b(),
                                s2 * discrete.c() * inv,
                                discrete.d() - discrete.c() * inv * discrete.b());
}

StateSpace bilinear_to_discrete(const StateSpace& continuous, double period) {
  if (continuous.is_discrete()) {
    throw InvalidArgument("bilinear_to_discrete: system is discrete");
  }
  const Index n = continuous.states();
  const Matrix eye = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(eye - continuous.a());
  if (n > 0 && !(lu.rcond() > 1e-16)) {
    throw NumericError("bilinear transform: eigenvalue at s = 1");
  }
  const Matrix inv = n > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
  const double s2 = std::numbers::sqrt2;
  return StateSpace::Discrete(
      (eye + continuous.a()) * inv, s2 * inv * continuous.b(),
      s2 * continuous.c() * inv,
      continuous.d() + continuous.c() * inv * continuous.b(), period);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw InvalidArgument("log_grid: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

namespace {

// Frequencies probed for the initial lower bound: a log grid, the band edges
// and the natural frequencies of the poles.
std::vector<double> probe_frequencies(const StateSpace& sys) {
  std::vector<double> omegas;
  if (sys.is_discrete()) {
    const double nyquist = std::numbers::pi / sys.period();
    omegas = log_grid(1e-5 * nyquist, nyquist, 96);
    omegas.insert(omegas.begin(), 0.0);
    const CVector eig = linalg::eigenvalues(sys.a());
    for (Index i = 0; i < eig.size(); ++i) {
      const double theta = std::abs(std::arg(eig(i)));
      if (std::abs(eig(i)) > 1e-8) omegas.push_back(theta / sys.period());
    }
  } else {
    double scale = 1.0;
    const CVector eig = linalg::eigenvalues(sys.a());
    for (Index i = 0; i < eig.size(); ++i) {
      scale = std::max(scale, std::abs(eig(i)));
      omegas.push_back(std::abs(eig(i).imag()));
    }
    const std::vector<double> grid = log_grid(1e-5, 1e2 * scale, 96);
    omegas.insert(omegas.end(), grid.begin(), grid.end());
    omegas.push_back(0.0);
  }
  return omegas;
}

struct Probe {
  bool crossing = false;
  double sigma = 0.0;
  double omega = 0.0;
};

// Does sigma_max(G(jw)) reach gamma for some w? `cont` is continuous.
Probe hamiltonian_probe(const StateSpace& cont, double gamma) {
  const Index n = cont.states(), m = cont.inputs(), p = cont.outputs();
  const Matrix& a = cont.a();
  const Matrix& b = cont.b();
  const Matrix& c = cont.c();
  const Matrix& d = cont.d();
  Probe probe;
  const Matrix r = gamma * gamma * Matrix::Identity(m, m) - d.transpose() * d;
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success) {
    probe.crossing = true;
    probe.sigma = linalg::sigma_max(d);
    probe.omega = INFINITY;
    return probe;
  }
  const Matrix r_inv_dt_c = llt.solve(d.transpose() * c);
  const Matrix a_bar = a + b * r_inv_dt_c;
  Matrix h(2 * n, 2 * n);
  h << a_bar, b * llt.solve(b.transpose()),
      -c.transpose() * (Matrix::Identity(p, p) + d * llt.solve(d.transpose())) * c,
      -a_bar.transpose();
  const CVector eig = linalg::eigenvalues(h);
  for (Index i = 0; i < eig.size(); ++i) {
    const Complex lambda = eig(i);
    if (lambda.imag() < 0.0) continue;
    if (std::abs(lambda.real()) > 1e-6 * std::max(1.0, std::abs(lambda))) {
      continue;
    }
    const double w = lambda.imag();
    const double s = linalg::sigma_max(evaluate(cont, Complex(0.0, w)));
    if (s >= gamma * (1.0 - 1e-8) && s > probe.sigma) {
      probe.crossing = true;
      probe.sigma = s;
      probe.omega = w;
    }
  }
  return probe;
}

}  // namespace

HinfResult hinf_norm_detailed(const StateSpace& sys, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("hinf_norm: tol must be positive");
  const StabilityReport st = stability(sys);
  if (st.verdict != Stability::kStable) {
    throw InvalidArgument("hinf_norm: system is not stable");
  }
  HinfResult result;
  if (sys.states() == 0) {
    result.norm = result.lower_bound = linalg::sigma_max(sys.d());
    return result;
  }

  const StateSpace bal = balanced(sys);
  const std::vector<double> omegas = probe_frequencies(bal);
  const std::vector<double> sig = kernels::omp::sigma_max_sweep(bal, omegas);
  const Index best = kernels::argmax(sig);
  result.lower_bound = sig[best];
  result.peak_omega = omegas[best];

  const StateSpace cont =
      sys.is_discrete() ? balanced(bilinear_to_continuous(bal)) : bal;
  // continuous frequency -> frequency of the original system
  auto map_back = [&](double w) {
    if (!sys.is_discrete()) return w;
    if (std::isinf(w)) return std::numbers::pi / sys.period();
    return 2.0 * std::atan(w) / sys.period();
  };

  double lo = result.lower_bound;
  double hi = lo * 10.0 + linalg::sigma_max(sys.d()) + 1.0;
  for (int expand = 0; expand < 60; ++expand) {
    const Probe p = hamiltonian_probe(cont, hi);
    if (!p.crossing) break;
    lo = std::max(lo, p.sigma);
    result.lower_bound = lo;
    result.peak_omega = map_back(p.omega);
    hi *= 2.0;
    if (expand == 59) throw NumericError("hinf_norm: no upper bound found");
  }

  constexpr int kMaxIterations = 200;
  int it = 0;
  for (; it < kMaxIterations && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Probe p = hamiltonian_probe(cont, mid);
    if (p.crossing) {
      lo = std::max(mid, p.sigma);
      if (p.sigma > result.lower_bound) {
        result.lower_bound = p.sigma;
        result.peak_omega = map_back(p.omega);
      }
      if (lo > hi) hi = lo;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > tol) {
    throw NumericError("hinf_norm: bisection did not converge");
  }
  result.norm = hi;
  result.iterations = it;
  return result;
}

double hinf_norm(const StateSpace& sys, double tol) {
  return hinf_norm_detailed(sys, tol).norm;
}

}  // namespace sdcancel
