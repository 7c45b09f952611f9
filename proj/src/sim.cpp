#include "sdcancel/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sdcancel/diagram.hpp"
#include "sdcancel/errors.hpp"
#include "sdcancel/lti.hpp"
#include "sdcancel/sampled_data.hpp"

namespace sdcancel {

namespace {

Index fine_steps(double span, double dt, const char* what) {
  const double steps = span / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    std::ostringstream msg;
    msg << what << " = " << span << " is not a multiple of the fine step "
        << dt;
    throw InvalidArgument(msg.str());
  }
  return static_cast<Index>(rounded);
}

const StateSpace* filter_block(InputFilter filter, const RelayParams& params) {
  switch (filter) {
    case InputFilter::kThroughP: return &params.P;
    case InputFilter::kThroughW: return &params.W;
    case InputFilter::kNone: return nullptr;
  }
  return nullptr;
}

// Portable uniform in [0, 1).
double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Matrix generate_source(const InputSpec& spec, const RelayParams& params,
                       double duration, int n_sim, std::uint64_t seed) {
  if (n_sim < 1) throw InvalidArgument("oversample must be positive");
  const double dt = params.h / n_sim;
  const Index steps = fine_steps(duration, dt, "duration");
  Matrix s = Matrix::Zero(2, steps + 1);
  std::mt19937_64 rng(seed);

  switch (spec.kind) {
    case InputKind::kRandomRect: {
      const Index per = fine_steps(spec.period, dt, "input period");
      if (per < 1) throw InvalidArgument("input period must be positive");
      for (Index j0 = 0; j0 <= steps; j0 += per) {
        for (Index ch = 0; ch < 2; ++ch) {
          const double level = (rng() >> 63) ? spec.amplitude : -spec.amplitude;
          for (Index j = j0; j < std::min(j0 + per, steps + 1); ++j) s(ch, j) = level;
        }
      }
      break;
    }
    case InputKind::kUnitNormL2: {
      const Index per = fine_steps(spec.period, dt, "input period");
      const double support = spec.support > 0.0 ? spec.support : duration / 4;
      const Index active = std::min(fine_steps(support, dt, "support"), steps);
      if (per < 1 || active < 1) throw InvalidArgument("empty disturbance");
      for (Index j0 = 0; j0 < active; j0 += per) {
        for (Index ch = 0; ch < 2; ++ch) {
          // Box-Muller keeps the draw independent of the standard library
          const double r = std::sqrt(-2.0 * std::log(1.0 - uniform(rng)));
          const double level = r * std::cos(2.0 * std::numbers::pi * uniform(rng));
          for (Index j = j0; j < std::min(j0 + per, active); ++j) s(ch, j) = level;
        }
      }
      // piecewise constant over each fine step: ||w||^2 = dt * sum w_j^2
      const double norm = std::sqrt(dt * s.leftCols(active).squaredNorm());
      s /= norm;
      break;
    }
    case InputKind::kCustomSamples: {
      if (spec.samples.rows() != 2 || spec.samples.cols() < 1) {
        throw DimensionError("custom input must have 2 rows");
      }
      const Index n = std::min<Index>(spec.samples.cols(), steps + 1);
      s.leftCols(n) = spec.samples.leftCols(n);
      break;
    }
  }
  return s;
}

Matrix generate_input(const InputSpec& spec, const RelayParams& params,
                      double duration, int n_sim, std::uint64_t seed) {
  const Matrix s = generate_source(spec, params, duration, n_sim, seed);
  const StateSpace* g = filter_block(spec.filter, params);
  if (!g) return s;
  const StateSpace gd = zoh_discretize(*g, params.h / n_sim);
  Matrix v(2, s.cols());
  Vector x = Vector::Zero(gd.states());
  for (Index j = 0; j < s.cols(); ++j) {
    v.col(j) = gd.c() * x + gd.d() * s.col(j);
    x = gd.a() * x + gd.b() * s.col(j);
  }
  return v;
}

SimulationTrace simulate_closed_loop(const SimConfig& cfg) {
  const RelayParams& prm = cfg.params;
  prm.validate();
  cfg.channel.validate();
  const StateSpace& k = cfg.controller;
  if (!k.is_discrete() || std::abs(k.period() - prm.h) > 1e-12 * prm.h) {
    throw DimensionError("controller period must equal h");
  }
  if (k.inputs() != 2 || k.outputs() != 2) {
    throw DimensionError("controller must have 2 inputs and 2 outputs");
  }
  if (cfg.oversample < 8) throw InvalidArgument("oversample must be >= 8");
  const int n_sim = cfg.oversample;
  const double dt = prm.h / n_sim;

  // every path: gain, rotation and delay in fine steps
  std::vector<Path> paths{cfg.channel.nominal};
  paths.insert(paths.end(), cfg.channel.extra_paths.begin(),
               cfg.channel.extra_paths.end());
  std::vector<Index> lag;
  for (const Path& p : paths) lag.push_back(delay_steps(p.delay, prm.h, n_sim));
  const Index n_paths = static_cast<Index>(paths.size());

  // continuous part, inputs [s, u0, d_1 .. d_m] (all held over a fine step)
  DiagramBuilder db(4 + 2 * n_paths);
  const StateSpace* gin = filter_block(cfg.input.filter, prm);
  const auto v = gin ? db.add(*gin, db.input(0, 2)) : db.input(0, 2);
  const auto u = db.add(prm.P, db.input(2, 2));
  auto chan = db.zero(2);
  for (Index i = 0; i < n_paths; ++i) {
    const Matrix gain = prm.a1 * prm.a2 * paths[i].r *
                        rotation_matrix(prm.f, paths[i].delay);
    chan = db.sum(chan, db.scale(gain, db.add(prm.P, db.input(4 + 2 * i, 2))));
  }
  const auto y0 = db.add(prm.F, db.sum(v, chan));
  const StateSpace plant = zoh_discretize(db.build({v, u, y0}), dt);

  const Matrix source =
      generate_source(cfg.input, prm, cfg.duration, n_sim, cfg.seed);
  const Index steps = source.cols() - 1;
  const double peak = source.size() ? source.cwiseAbs().maxCoeff() : 0.0;
  const double threshold = kDivergenceFactor * (peak > 0.0 ? peak : 1.0);

  const Index max_lag = *std::max_element(lag.begin(), lag.end());
  std::vector<Vector> held(max_lag + 1, Vector::Zero(2));  // u0 history ring
  Vector x = Vector::Zero(plant.states());
  Vector xk = Vector::Zero(k.states());
  Vector u0 = Vector::Zero(2);
  Vector in = Vector::Zero(plant.inputs());

  SimulationTrace tr;
  tr.dt = dt;
  tr.duration = cfg.duration;
  tr.v.resize(2, steps + 1);
  tr.u.resize(2, steps + 1);
  Index recorded = 0;

  for (Index j = 0; j <= steps; ++j) {
    in.segment(0, 2) = source.col(j);
    for (Index i = 0; i < n_paths; ++i) {
      in.segment(4 + 2 * i, 2) =
          j >= lag[i] ? held[(j - lag[i]) % (max_lag + 1)] : Vector::Zero(2);
    }
    if (j % n_sim == 0) {
      // sampler at t = kh; y0 has no direct path from the current u0
      in.segment(2, 2) = u0;
      const Vector y = (plant.c() * x + plant.d() * in).segment(4, 2);
      u0 = k.c() * xk + k.d() * y;
      xk = k.a() * xk + k.b() * y;
    }
    in.segment(2, 2) = u0;
    held[j % (max_lag + 1)] = u0;
    const Vector out = plant.c() * x + plant.d() * in;
    tr.v.col(j) = out.segment(0, 2);
    tr.u.col(j) = out.segment(2, 2);
    recorded = j + 1;
    const double size = std::max({out.cwiseAbs().maxCoeff(),
                                  x.size() ? x.cwiseAbs().maxCoeff() : 0.0,
                                  u0.cwiseAbs().maxCoeff()});
    if (!std::isfinite(size) || size > threshold) {
      tr.diverged = true;
      break;
    }
    x = plant.a() * x + plant.b() * in;
  }

  tr.v.conservativeResize(2, recorded);
  tr.u.conservativeResize(2, recorded);
  tr.err = tr.v - tr.u;
  tr.t.resize(recorded);
  for (Index j = 0; j < recorded; ++j) tr.t[j] = static_cast<double>(j) * dt;
  const Metrics m = metrics(tr);
  tr.l2_err = m.l2_err;
  tr.max_abs_err_tail = m.max_abs_err_tail;
  tr.input_peak = recorded ? tr.v.cwiseAbs().maxCoeff() : 0.0;
  return tr;
}

Metrics metrics(const SimulationTrace& trace, std::optional<double> gamma) {
  Metrics m;
  m.diverged = trace.diverged;
  const Index n = trace.err.cols();
  double acc = 0.0;
  for (Index j = 0; j + 1 < n; ++j) {
    const double dt = trace.t.size() == static_cast<std::size_t>(n)
                          ? trace.t[j + 1] - trace.t[j]
                          : trace.dt;
    acc += 0.5 * dt * (trace.err.col(j).squaredNorm() +
                       trace.err.col(j + 1).squaredNorm());
  }
  m.l2_err = std::sqrt(acc);
  const double horizon =
      trace.duration > 0.0 ? trace.duration
                           : (trace.t.empty() ? 0.0 : trace.t.back());
  for (Index j = 0; j < n; ++j) {
    const double tj = trace.t.size() == static_cast<std::size_t>(n)
                          ? trace.t[j]
                          : static_cast<double>(j) * trace.dt;
    if (tj >= 0.5 * horizon) {
      m.max_abs_err_tail =
          std::max(m.max_abs_err_tail, trace.err.col(j).cwiseAbs().maxCoeff());
    }
  }
  if (gamma && *gamma > 0.0) m.bound_ratio = m.l2_err / *gamma;
  return m;
}

namespace {

// Analog Butterworth low-pass of the given order and cutoff [rad/s], unit
// DC gain, as a cascade of second-order sections.
StateSpace butterworth(int order, double wc) {
  StateSpace acc = StateSpace::Gain(Matrix::Identity(1, 1));
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const double zeta = std::sin(theta);
    acc = series(acc, transfer_function({wc * wc}, {1.0, 2.0 * zeta * wc, wc * wc}));
  }
  if (order % 2) acc = series(acc, transfer_function({wc}, {1.0, wc}));
  return acc;
}

}  // namespace

double passband_settling_time(const RelayParams& params) {
  // about 40 time constants of the slowest filter pole
  const double wc = 2.0 * std::numbers::pi * params.f / 10.0;
  return 40.0 / (wc * std::sin(std::numbers::pi / 16.0));
}

Matrix passband_oracle(const Matrix& u, double dt, const RelayParams& params,
                       const Path& nominal, int n_rf) {
  if (u.rows() != 2) throw DimensionError("baseband signal must have 2 rows");
  if (n_rf < 16) {
    throw InvalidArgument("carrier under-resolved: need >= 16 samples per cycle");
  }
  const double dt_rf = 1.0 / (params.f * n_rf);
  const Index ratio = fine_steps(dt, dt_rf, "baseband step");
  const Index lag = fine_steps(nominal.delay, dt_rf, "delay");
  const Index n_bb = u.cols();
  if (n_bb == 0) return Matrix(2, 0);
  const Index n = (n_bb - 1) * ratio + 1;
  const double gain = params.a1 * params.a2 * nominal.r;

  const StateSpace lpf =
      zoh_discretize(butterworth(8, 2.0 * std::numbers::pi * params.f / 10.0), dt_rf);
  Vector xi = Vector::Zero(lpf.states()), xq = Vector::Zero(lpf.states());
  const Matrix& a = lpf.a();
  const Vector b = lpf.b().col(0);
  const Vector c = lpf.c().row(0).transpose();
  const double d = lpf.d()(0, 0);

  auto baseband = [&](Index k) -> Vector {
    // linear interpolation between baseband samples
    const Index j = k / ratio, r = k % ratio;
    if (r == 0 || j + 1 >= n_bb) return u.col(std::min(j, n_bb - 1));
    const double s = static_cast<double>(r) / static_cast<double>(ratio);
    return (1.0 - s) * u.col(j) + s * u.col(j + 1);
  };

  Matrix out = Matrix::Zero(2, n_bb);
  for (Index k = 0; k < n; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k % n_rf) / n_rf;
    const double cs = std::cos(phase), sn = std::sin(phase);
    double received = 0.0;
    if (k >= lag) {
      const Index kd = k - lag;
      const double pd = 2.0 * std::numbers::pi * static_cast<double>(kd % n_rf) / n_rf;
      const Vector ub = baseband(kd);
      received = gain * (ub(0) * std::cos(pd) - ub(1) * std::sin(pd));
    }
    const double mi = 2.0 * received * cs;
    const double mq = -2.0 * received * sn;
    if (k % ratio == 0) {
      out(0, k / ratio) = c.dot(xi) + d * mi;
      out(1, k / ratio) = c.dot(xq) + d * mq;
    }
    xi = a * xi + b * mi;
    xq = a * xq + b * mq;
  }
  return out;
}

}  // namespace sdcancel
