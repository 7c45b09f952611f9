#include "sdcancel/sampled_data.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "sdcancel/diagram.hpp"
#include "sdcancel/errors.hpp"

namespace sdcancel {

Index LiftedPlant::w_size() const {
  return std::accumulate(w_channels.begin(), w_channels.end(), Index{0});
}

Index LiftedPlant::z_size() const {
  return std::accumulate(z_channels.begin(), z_channels.end(), Index{0});
}

Index LiftedPlant::w_offset(std::size_t channel) const {
  return std::accumulate(w_channels.begin(), w_channels.begin() + channel,
                         Index{0});
}

Index LiftedPlant::z_offset(std::size_t channel) const {
  return std::accumulate(z_channels.begin(), z_channels.begin() + channel,
                         Index{0});
}

StateSpace LiftedPlant::g22() const {
  return sys.select(z_size(), 2, w_size(), 2);
}

Index delay_steps(double delay, double h, int N) {
  const double steps = delay * N / h;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
    std::ostringstream msg;
    msg << "L = " << delay << " gives L*N/h = " << steps
        << " (increase N or adjust L)";
    throw OffGridDelayError(msg.str());
  }
  return static_cast<Index>(rounded);
}

namespace {

struct CoreLayout {
  bool robust = false;
  Index extra = 0;       // number of extra paths lifted
  // continuous core input offsets
  Index in_w1 = 0, in_w2 = -1, in_u0 = 0, in_d0 = 0, in_dw2 = -1, in_di = 0;
  Index inputs = 0;
  // outputs
  Index out_z1 = 0, out_z2 = -1, out_y = 0, outputs = 0;
};

// Continuous part of the relay loop with every delayed signal brought out as
// an extra input: the delays act on piecewise-constant signals (held u_d,
// fast-held w2), so shift registers realize them exactly.
StateSpace relay_core(const GeneralizedPlantSpec& plant,
                      const LiftOptions& options, CoreLayout& layout) {
  const RelayParams& prm = plant.params;
  layout.robust = options.uncertainty_weight.has_value();
  layout.extra = options.include_extra_paths
                     ? static_cast<Index>(plant.channel.extra_paths.size())
                     : 0;
  Index pos = 0;
  layout.in_w1 = pos; pos += 2;
  if (layout.robust) { layout.in_w2 = pos; pos += 2; }
  layout.in_u0 = pos; pos += 2;
  layout.in_d0 = pos; pos += 2;
  if (layout.robust) { layout.in_dw2 = pos; pos += 2; }
  layout.in_di = pos; pos += 2 * layout.extra;
  layout.inputs = pos;

  DiagramBuilder db(layout.inputs);
  const auto v = db.add(prm.W, db.input(layout.in_w1, 2));
  const auto u = db.add(prm.P, db.input(layout.in_u0, 2));
  const Matrix nominal_gain = plant.alpha * plant.rotation;
  auto chan = db.scale(nominal_gain, db.add(prm.P, db.input(layout.in_d0, 2)));
  if (layout.robust) {
    chan = db.sum(chan, db.scale(nominal_gain, db.input(layout.in_dw2, 2)));
  }
  for (Index i = 0; i < layout.extra; ++i) {
    const Path& p = plant.channel.extra_paths[i];
    const Matrix gain =
        prm.a1 * prm.a2 * p.r * rotation_matrix(prm.f, p.delay);
    chan = db.sum(chan, db.scale(gain, db.add(prm.P, db.input(
                                                   layout.in_di + 2 * i, 2))));
  }
  const auto y0 = db.add(prm.F, db.sum(v, chan));
  const auto z1 = db.sum(v, db.scale(-Matrix::Identity(2, 2), u));

  std::vector<DiagramBuilder::Signal> outs{z1};
  pos = 0;
  layout.out_z1 = pos; pos += 2;
  if (layout.robust) {
    const Matrix& w2 = *options.uncertainty_weight;
    if (w2.rows() != 2 || w2.cols() != 2) {
      throw DimensionError("uncertainty weight must be 2x2");
    }
    outs.push_back(db.scale(w2, u));
    layout.out_z2 = pos; pos += 2;
  }
  outs.push_back(y0);
  layout.out_y = pos; pos += 2;
  layout.outputs = pos;
  return db.build(outs);
}

}  // namespace

LiftedPlant fsfh_lift(const GeneralizedPlantSpec& plant, int N,
                      const LiftOptions& options) {
  if (N < 1) throw InvalidArgument("fsfh_lift: N must be positive");
  const double h = plant.params.h;
  const double fast = h / N;

  CoreLayout layout;
  const StateSpace core = relay_core(plant, options, layout);
  const StateSpace core_d = zoh_discretize(core, fast);

  const Index n0 = delay_steps(plant.channel.nominal.delay, h, N);
  if (n0 < 1) throw OffGridDelayError("delay shorter than one fast step");
  std::vector<Index> ni;
  Index n_u_reg = n0;
  for (Index i = 0; i < layout.extra; ++i) {
    ni.push_back(delay_steps(plant.channel.extra_paths[i].delay, h, N));
    n_u_reg = std::max(n_u_reg, ni.back());
  }
  const Index n_w_reg = layout.robust ? n0 : 0;

  const Index nc = core.states();
  const Index off_ru = nc;
  const Index off_rw = nc + 2 * n_u_reg;
  const Index nf = nc + 2 * n_u_reg + 2 * n_w_reg;
  if (nf > options.max_states) {
    std::ostringstream msg;
    msg << "lifted state dimension " << nf << " exceeds the cap "
        << options.max_states;
    throw DimensionError(msg.str());
  }

  // fast-rate external inputs: [w1, (w2), u0]
  const Index e_w1 = 0;
  const Index e_w2 = layout.robust ? 2 : -1;
  const Index e_u0 = layout.robust ? 4 : 2;
  const Index me = e_u0 + 2;

  // core input = gx * xf + ge * ext
  Matrix gx = Matrix::Zero(layout.inputs, nf);
  Matrix ge = Matrix::Zero(layout.inputs, me);
  ge.block(layout.in_w1, e_w1, 2, 2).setIdentity();
  if (layout.robust) ge.block(layout.in_w2, e_w2, 2, 2).setIdentity();
  ge.block(layout.in_u0, e_u0, 2, 2).setIdentity();
  // register m (1-based) of a chain holds the signal from m steps ago
  gx.block(layout.in_d0, off_ru + 2 * (n0 - 1), 2, 2).setIdentity();
  for (Index i = 0; i < layout.extra; ++i) {
    gx.block(layout.in_di + 2 * i, off_ru + 2 * (ni[i] - 1), 2, 2)
        .setIdentity();
  }
  if (layout.robust) {
    gx.block(layout.in_dw2, off_rw + 2 * (n0 - 1), 2, 2).setIdentity();
  }

  Matrix af = Matrix::Zero(nf, nf);
  Matrix bf = Matrix::Zero(nf, me);
  af.topLeftCorner(nc, nc) = core_d.a();
  af.topRows(nc) += core_d.b() * gx;
  bf.topRows(nc) = core_d.b() * ge;
  bf.block(off_ru, e_u0, 2, 2).setIdentity();
  for (Index m = 1; m < n_u_reg; ++m) {
    af.block(off_ru + 2 * m, off_ru + 2 * (m - 1), 2, 2).setIdentity();
  }
  if (layout.robust) {
    bf.block(off_rw, e_w2, 2, 2).setIdentity();
    for (Index m = 1; m < n_w_reg; ++m) {
      af.block(off_rw + 2 * m, off_rw + 2 * (m - 1), 2, 2).setIdentity();
    }
  }
  Matrix cf = core_d.d() * gx;
  cf.leftCols(nc) += core_d.c();
  const Matrix df = core_d.d() * ge;

  // slow-rate lifted system
  const Index n_w_ch = layout.robust ? 2 : 1;
  const Index stack = 2 * N;
  const Index ms = n_w_ch * stack + 2;
  const Index ps = n_w_ch * stack + 2;
  const Index s_ud = n_w_ch * stack;

  Matrix cl = Matrix::Zero(ps, nf);
  Matrix dl = Matrix::Zero(ps, ms);
  Matrix phi = Matrix::Identity(nf, nf);
  Matrix gamma = Matrix::Zero(nf, ms);
  for (int j = 0; j < N; ++j) {
    Matrix sel = Matrix::Zero(me, ms);  // ext_j = sel * slow input
    sel.block(e_w1, 2 * j, 2, 2).setIdentity();
    if (layout.robust) sel.block(e_w2, stack + 2 * j, 2, 2).setIdentity();
    sel.block(e_u0, s_ud, 2, 2).setIdentity();

    const Matrix out_x = cf * phi;
    const Matrix out_u = cf * gamma + df * sel;
    cl.middleRows(2 * j, 2) = out_x.middleRows(layout.out_z1, 2);
    dl.middleRows(2 * j, 2) = out_u.middleRows(layout.out_z1, 2);
    if (layout.robust) {
      cl.middleRows(stack + 2 * j, 2) = out_x.middleRows(layout.out_z2, 2);
      dl.middleRows(stack + 2 * j, 2) = out_u.middleRows(layout.out_z2, 2);
    }
    if (j == 0) {
      // y is sampled at the start of the slow period
      cl.middleRows(s_ud, 2) = out_x.middleRows(layout.out_y, 2);
      dl.middleRows(s_ud, 2) = out_u.middleRows(layout.out_y, 2);
    }
    gamma = (af * gamma + bf * sel).eval();
    phi = (af * phi).eval();
  }

  LiftedPlant lp;
  lp.sys = StateSpace::Discrete(phi, gamma, cl, dl, h);
  lp.w_channels.assign(n_w_ch, stack);
  lp.z_channels.assign(n_w_ch, stack);
  lp.N = N;
  lp.h = h;
  lp.delay_registers = 2 * n_u_reg + 2 * n_w_reg;
  return lp;
}

StateSpace lifted_closed_loop(const LiftedPlant& lp, const StateSpace& k) {
  if (!k.is_discrete() || !k.same_domain(lp.sys)) {
    throw DimensionError("controller period does not match the lifted plant");
  }
  if (k.inputs() != 2 || k.outputs() != 2) {
    throw DimensionError("controller must have 2 inputs and 2 outputs");
  }
  return lower_lft(lp.sys, k, lp.partition());
}

SampledNorm sampled_data_norm(const GeneralizedPlantSpec& plant,
                              const StateSpace& k, int N, double tol) {
  const LiftedPlant lp = fsfh_lift(plant, N);
  const StateSpace cl = lifted_closed_loop(lp, k);
  SampledNorm out;
  const StabilityReport st = stability(cl);
  out.spectral_radius = st.spectral_bound;
  if (st.verdict != Stability::kStable) {
    std::ostringstream msg;
    msg << "closed loop not stable (spectral radius " << st.spectral_bound
        << ")";
    out.diagnostic = msg.str();
    return out;
  }
  out.stable = true;
  out.norm = hinf_norm(cl, tol);
  return out;
}

}  // namespace sdcancel
