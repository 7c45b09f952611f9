#include "sdcancel/hinf_synthesis.hpp"

#include <cmath>

#include "sdcancel/errors.hpp"
#include "sdcancel/linalg.hpp"

namespace sdcancel {

namespace {

struct Normalized {
  StateSpace plant;  // D12 = [0; I], D21 = [0 I], D22 = 0
  Matrix d22;        // removed feedthrough (loop shift)
  Matrix r12_inv;    // u = r12_inv * u'
  Matrix r21_inv_t;  // y' = r21_inv_t * y
};

Normalized normalize(const StateSpace& g, IoPartition part) {
  const Index p2 = part.measurements, m2 = part.controls;
  const Index m1 = g.inputs() - m2, p1 = g.outputs() - p2;
  if (p1 < m2 || m1 < p2) {
    throw DimensionError("synthesis: need dim z >= dim u and dim w >= dim y");
  }
  const Matrix b1 = g.b().leftCols(m1), b2 = g.b().rightCols(m2);
  const Matrix c1 = g.c().topRows(p1), c2 = g.c().bottomRows(p2);
  const Matrix d11 = g.d().topLeftCorner(p1, m1);
  const Matrix d12 = g.d().topRightCorner(p1, m2);
  const Matrix d21 = g.d().bottomLeftCorner(p2, m1);

  Eigen::HouseholderQR<Matrix> qr12(d12);
  const Matrix qa = qr12.householderQ() * Matrix::Identity(p1, p1);
  const Matrix r12 =
      qr12.matrixQR().topRows(m2).triangularView<Eigen::Upper>();
  Eigen::HouseholderQR<Matrix> qr21(d21.transpose());
  const Matrix qb = qr21.householderQ() * Matrix::Identity(m1, m1);
  const Matrix r21t =
      qr21.matrixQR().topRows(p2).triangularView<Eigen::Upper>();

  const double scale12 = std::max(1.0, d12.norm());
  const double scale21 = std::max(1.0, d21.norm());
  for (Index i = 0; i < m2; ++i) {
    if (std::abs(r12(i, i)) < 1e-10 * scale12) {
      throw NumericError("synthesis: D12 does not have full column rank");
    }
  }
  for (Index i = 0; i < p2; ++i) {
    if (std::abs(r21t(i, i)) < 1e-10 * scale21) {
      throw NumericError("synthesis: D21 does not have full row rank");
    }
  }

  Matrix u(p1, p1);
  u << qa.rightCols(p1 - m2), qa.leftCols(m2);
  Matrix v(m1, m1);
  v << qb.rightCols(m1 - p2), qb.leftCols(p2);

  Normalized out;
  out.d22 = g.d().bottomRightCorner(p2, m2);
  out.r12_inv = r12.inverse();
  out.r21_inv_t = r21t.transpose().inverse();

  Matrix b(g.states(), m1 + m2);
  b << b1 * v, b2 * out.r12_inv;
  Matrix c(p1 + p2, g.states());
  c << u.transpose() * c1, out.r21_inv_t * c2;
  Matrix d = Matrix::Zero(p1 + p2, m1 + m2);
  d.topLeftCorner(p1, m1) = u.transpose() * d11 * v;
  d.block(p1 - m2, m1, m2, m2).setIdentity();
  d.block(p1, m1 - p2, p2, p2).setIdentity();
  out.plant = StateSpace::Continuous(g.a(), b, c, d);
  return out;
}

// K~ (designed for D22 = 0) -> K = K~ (I + D22 K~)^-1
StateSpace undo_loop_shift(const StateSpace& k, const Matrix& d22) {
  const Index nu = k.outputs();
  const Matrix m = (Matrix::Identity(nu, nu) + k.d() * d22).inverse();
  const Index ny = k.inputs();
  return StateSpace::Continuous(
      k.a() - k.b() * d22 * m * k.c(),
      k.b() * (Matrix::Identity(ny, ny) - d22 * m * k.d()), m * k.c(),
      m * k.d());
}

}  // namespace

double feedthrough_gamma_bound(const StateSpace& plant, IoPartition part) {
  const StateSpace cont =
      plant.is_discrete() ? bilinear_to_continuous(plant) : plant;
  const Normalized nrm = normalize(cont, part);
  const Index p2 = part.measurements, m2 = part.controls;
  const Index m1 = cont.inputs() - m2, p1 = cont.outputs() - p2;
  const Matrix d11 = nrm.plant.d().topLeftCorner(p1, m1);
  const Matrix top = d11.topRows(p1 - m2);   // [D1111 D1112]
  const Matrix left = d11.leftCols(m1 - p2); // [D1111; D1121]
  return std::max(linalg::sigma_max(top), linalg::sigma_max(left));
}

CentralControllerProbe central_controller_continuous(const StateSpace& plant,
                                                     IoPartition part,
                                                     double gamma) {
  CentralControllerProbe probe;
  const Normalized nrm = normalize(plant, part);
  const StateSpace& g = nrm.plant;
  const Index n = g.states();
  const Index p2 = part.measurements, m2 = part.controls;
  const Index m1 = g.inputs() - m2, p1 = g.outputs() - p2;
  const double g2 = gamma * gamma;

  const Matrix& a = g.a();
  const Matrix& b = g.b();
  const Matrix& c = g.c();
  const Matrix b1 = b.leftCols(m1), b2 = b.rightCols(m2);
  const Matrix c1 = c.topRows(p1), c2 = c.bottomRows(p2);
  const Matrix d11 = g.d().topLeftCorner(p1, m1);
  const Matrix d1111 = d11.topLeftCorner(p1 - m2, m1 - p2);
  const Matrix d1112 = d11.topRightCorner(p1 - m2, p2);
  const Matrix d1121 = d11.bottomLeftCorner(m2, m1 - p2);
  const Matrix d1122 = d11.bottomRightCorner(m2, p2);

  if (gamma <= std::max(linalg::sigma_max(Matrix(d11.topRows(p1 - m2))),
                        linalg::sigma_max(Matrix(d11.leftCols(m1 - p2))))) {
    probe.failure = "gamma below the feedthrough bound";
    return probe;
  }

  const Matrix d1s = g.d().topRows(p1);     // [D11 D12]
  const Matrix ds1 = g.d().leftCols(m1);    // [D11; D21]

  Matrix r = d1s.transpose() * d1s;
  r.topLeftCorner(m1, m1) -= g2 * Matrix::Identity(m1, m1);
  Matrix rt = ds1 * ds1.transpose();
  rt.topLeftCorner(p1, p1) -= g2 * Matrix::Identity(p1, p1);
  Eigen::FullPivLU<Matrix> r_lu(r), rt_lu(rt);
  if (r_lu.rcond() < 1e-14 || rt_lu.rcond() < 1e-14) {
    probe.failure = "singular R matrices";
    return probe;
  }
  const Matrix r_inv = r_lu.inverse(), rt_inv = rt_lu.inverse();

  Matrix hx(2 * n, 2 * n);
  {
    Matrix left(2 * n, m1 + m2);
    left << b, -c1.transpose() * d1s;
    Matrix right(m1 + m2, 2 * n);
    right << d1s.transpose() * c1, b.transpose();
    hx << a, Matrix::Zero(n, n), -c1.transpose() * c1, -a.transpose();
    hx -= left * r_inv * right;
  }
  Matrix hy(2 * n, 2 * n);
  {
    Matrix left(2 * n, p1 + p2);
    left << c.transpose(), -b1 * ds1.transpose();
    Matrix right(p1 + p2, 2 * n);
    right << ds1 * b1.transpose(), c;
    hy << a.transpose(), Matrix::Zero(n, n), -b1 * b1.transpose(), -a;
    hy -= left * rt_inv * right;
  }

  const auto x = linalg::riccati_from_hamiltonian(hx);
  if (!x) {
    probe.failure = "X Riccati has no stabilizing solution";
    return probe;
  }
  const auto y = linalg::riccati_from_hamiltonian(hy);
  if (!y) {
    probe.failure = "Y Riccati has no stabilizing solution";
    return probe;
  }
  const double psd_tol = 1e-9;
  if (linalg::min_symmetric_eigenvalue(*x) < -psd_tol * std::max(1.0, x->norm())) {
    probe.failure = "X is not positive semidefinite";
    return probe;
  }
  if (linalg::min_symmetric_eigenvalue(*y) < -psd_tol * std::max(1.0, y->norm())) {
    probe.failure = "Y is not positive semidefinite";
    return probe;
  }
  const CVector xy_eig = linalg::eigenvalues(*x * *y);
  if (n > 0 && xy_eig.cwiseAbs().maxCoeff() >= g2 * (1.0 - 1e-9)) {
    probe.failure = "spectral radius of XY reaches gamma^2";
    return probe;
  }

  const Matrix f = -r_inv * (d1s.transpose() * c1 + b.transpose() * *x);
  const Matrix l = -(b1 * ds1.transpose() + *y * c.transpose()) * rt_inv;
  const Matrix f2 = f.bottomRows(m2);
  const Matrix f12 = f.topRows(m1).bottomRows(p2);
  const Matrix l2 = l.rightCols(p2);
  const Matrix l12 = l.leftCols(p1).rightCols(m2);

  const Index q1 = p1 - m2;  // rows of D1111
  const Index q2 = m1 - p2;  // cols of D1111
  const Matrix inner_a =
      (g2 * Matrix::Identity(q1, q1) - d1111 * d1111.transpose()).inverse();
  const Matrix inner_b =
      (g2 * Matrix::Identity(q2, q2) - d1111.transpose() * d1111).inverse();
  const Matrix dh11 =
      -d1121 * d1111.transpose() * inner_a * d1112 - d1122;
  const Matrix m12 =
      Matrix::Identity(m2, m2) - d1121 * inner_b * d1121.transpose();
  const Matrix m21 =
      Matrix::Identity(p2, p2) - d1112.transpose() * inner_a * d1112;
  Eigen::LLT<Matrix> llt12(m12), llt21(m21);
  if (llt12.info() != Eigen::Success || llt21.info() != Eigen::Success) {
    probe.failure = "D-hat factors are not positive definite";
    return probe;
  }
  const Matrix dh12 = llt12.matrixL();
  const Matrix dh21 = llt21.matrixU();  // dh21' dh21 = m21

  const Matrix z_mat =
      (Matrix::Identity(n, n) - *y * *x / g2).inverse();
  const Matrix dh12_inv = dh12.inverse(), dh21_inv = dh21.inverse();
  const Matrix bh2 = z_mat * (b2 + l12) * dh12;
  const Matrix ch2 = -dh21 * (c2 + f12);
  const Matrix bh1 = -z_mat * l2 + bh2 * dh12_inv * dh11;
  const Matrix ch1 = f2 + dh11 * dh21_inv * ch2;
  const Matrix ah = a + b * f + bh1 * dh21_inv * ch2;
  if (!ah.allFinite() || !bh1.allFinite() || !ch1.allFinite()) {
    probe.failure = "controller formulas produced non-finite data";
    return probe;
  }

  // back to the original signal coordinates
  const StateSpace k_norm = StateSpace::Continuous(
      ah, bh1 * nrm.r21_inv_t, nrm.r12_inv * ch1,
      nrm.r12_inv * dh11 * nrm.r21_inv_t);
  probe.controller = undo_loop_shift(k_norm, nrm.d22);
  return probe;
}

CentralControllerProbe central_controller(const StateSpace& plant,
                                          IoPartition part, double gamma) {
  if (!plant.is_discrete()) {
    return central_controller_continuous(plant, part, gamma);
  }
  const StateSpace cont = balanced(bilinear_to_continuous(balanced(plant)));
  CentralControllerProbe probe =
      central_controller_continuous(cont, part, gamma);
  if (probe.controller) {
    try {
      probe.controller = balanced(
          bilinear_to_discrete(balanced(*probe.controller), plant.period()));
    } catch (const NumericError&) {
      probe.controller.reset();
      probe.failure = "controller has a pole at s = 1";
    }
  }
  return probe;
}

HinfDesign hinf_synthesize(const StateSpace& plant, IoPartition part,
                           const HinfDesignOptions& options) {
  auto try_level = [&](double gamma) -> std::optional<StateSpace> {
    CentralControllerProbe probe = central_controller(plant, part, gamma);
    if (!probe.controller) return std::nullopt;
    try {
      if (!is_stable(lower_lft(plant, *probe.controller, part))) {
        return std::nullopt;
      }
    } catch (const IllPosedError&) {
      return std::nullopt;
    }
    return probe.controller;
  };

  double hi = options.gamma_upper;
  if (!(hi > 0.0)) {
    const Index m1 = plant.inputs() - part.controls;
    const Index p1 = plant.outputs() - part.measurements;
    const StateSpace g11 = plant.select(0, p1, 0, m1);
    hi = is_stable(plant) ? 1.01 * hinf_norm(g11, 1e-9) + 1e-9 : 1.0;
  }
  double lo = feedthrough_gamma_bound(plant, part);
  hi = std::max(hi, 1.01 * lo + 1e-12);

  std::optional<StateSpace> best = try_level(hi);
  for (int expand = 0; !best && expand < 30; ++expand) {
    lo = hi;
    hi *= 2.0;
    best = try_level(hi);
  }
  if (!best) {
    throw InfeasibleError(
        "H-infinity synthesis infeasible at the upper bracket: no "
        "stabilizing controller found");
  }

  HinfDesign design;
  int it = 0;
  for (; it < options.max_iterations && hi - lo > options.rel_tol * hi; ++it) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (auto k = try_level(mid)) {
      hi = mid;
      best = std::move(k);
    } else {
      lo = mid;
    }
  }
  design.iterations = it;

  // The central controller satisfies ||T|| < gamma; confirm numerically and
  // back off slightly if round-off says otherwise.
  for (int attempt = 0;; ++attempt) {
    const StateSpace cl = lower_lft(plant, *best, part);
    const double norm = hinf_norm(cl, 1e-7 * hi);
    if (norm <= hi * (1.0 + 1e-6) || attempt == 5) {
      if (norm > hi * (1.0 + 1e-6)) {
        throw NumericError("H-infinity synthesis: closed-loop norm exceeds gamma");
      }
      design.controller = *best;
      design.gamma = hi;
      design.gamma_lower = lo;
      design.closed_loop_norm = norm;
      return design;
    }
    hi *= 1.0 + options.rel_tol;
    auto k = try_level(hi);
    if (k) best = std::move(k);
  }
}

}  // namespace sdcancel
