#include "sdcancel/relay_model.hpp"

#include <cmath>
#include <numbers>

#include "sdcancel/errors.hpp"
#include "sdcancel/lti.hpp"

namespace sdcancel {

namespace {

void check_block(const StateSpace& sys, const char* name) {
  if (sys.is_discrete()) {
    throw InvalidArgument(std::string(name) + " must be continuous-time");
  }
  if (sys.inputs() != 2 || sys.outputs() != 2) {
    throw DimensionError(std::string(name) + " must be 2x2 (I/Q channels)");
  }
  if (!is_stable(sys)) {
    throw InvalidArgument(std::string(name) + " must be stable");
  }
}

}  // namespace

void RelayParams::validate() const {
  if (!(h > 0.0)) throw InvalidArgument("sampling period h must be positive");
  if (!(f > 0.0)) throw InvalidArgument("carrier frequency f must be positive");
  if (!(a1 > 0.0)) throw InvalidArgument("LNA gain a1 must be positive");
  if (!(a2 >= 0.0)) throw InvalidArgument("PA gain a2 must be non-negative");
  check_block(W, "W");
  check_block(F, "F");
  check_block(P, "P");
  if (W.d().cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidArgument("W must be strictly proper");
  }
}

void CouplingChannel::validate() const {
  if (!(nominal.r > 0.0)) {
    throw InvalidArgument("channel attenuation r must be positive");
  }
  if (!(nominal.delay > 0.0)) {
    throw InvalidArgument("channel delay L must be positive");
  }
  for (const Path& p : extra_paths) {
    if (!(p.r >= 0.0)) throw InvalidArgument("extra path r_i must be >= 0");
    if (!(p.delay > nominal.delay)) {
      throw InvalidArgument("extra path delay L_i must exceed L");
    }
  }
}

double CouplingChannel::alpha(const RelayParams& params) const {
  return params.a1 * params.a2 * nominal.r;
}

double CouplingChannel::relative_extra_gain() const {
  if (!(nominal.r > 0.0)) {
    throw InvalidArgument("channel attenuation r must be positive");
  }
  double sum = 0.0;
  for (const Path& p : extra_paths) sum += p.r / nominal.r;
  return sum;
}

Matrix rotation_matrix(double f, double delay) {
  // Reduce the phase to one turn first: f * L is large at RF.
  double turns = f * delay;
  turns -= std::floor(turns);
  const double angle = 2.0 * std::numbers::pi * turns;
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix out(2, 2);
  out << c, s, -s, c;
  return out;
}

CMatrix GeneralizedPlantSpec::coupling_response(double omega) const {
  const CMatrix fp = frequency_response(params.F, omega) *
                     frequency_response(params.P, omega);
  const Complex delay = std::polar(1.0, -omega * channel.nominal.delay);
  return alpha * delay * rotation.cast<Complex>() * fp;
}

CMatrix GeneralizedPlantSpec::response(double omega) const {
  const CMatrix w = frequency_response(params.W, omega);
  const CMatrix f = frequency_response(params.F, omega);
  const CMatrix p = frequency_response(params.P, omega);
  CMatrix out(4, 4);
  out.topLeftCorner(2, 2) = w;
  out.topRightCorner(2, 2) = -p;
  out.bottomLeftCorner(2, 2) = f * w;
  out.bottomRightCorner(2, 2) = coupling_response(omega);
  return out;
}

CMatrix GeneralizedPlantSpec::perturbed_channel_response(double omega) const {
  CMatrix out = alpha * std::polar(1.0, -omega * channel.nominal.delay) *
                rotation.cast<Complex>();
  const double gain = params.a1 * params.a2;
  for (const Path& p : channel.extra_paths) {
    out += gain * p.r * std::polar(1.0, -omega * p.delay) *
           rotation_matrix(params.f, p.delay).cast<Complex>();
  }
  return out;
}

GeneralizedPlantSpec build_generalized_plant(const RelayParams& params,
                                             const CouplingChannel& channel) {
  params.validate();
  channel.validate();
  GeneralizedPlantSpec spec;
  spec.params = params;
  spec.channel = channel;
  spec.alpha = channel.alpha(params);
  spec.rotation = rotation_matrix(params.f, channel.nominal.delay);
  return spec;
}

CMatrix error_system_response(const CouplingChannel& channel, double omega,
                              double f) {
  if (!(channel.nominal.r > 0.0)) {
    throw InvalidArgument("error system: nominal attenuation r is zero");
  }
  CMatrix out = CMatrix::Zero(2, 2);
  for (const Path& p : channel.extra_paths) {
    const double extra = p.delay - channel.nominal.delay;
    out += (p.r / channel.nominal.r) * std::polar(1.0, -extra * omega) *
           rotation_matrix(f, extra).cast<Complex>();
  }
  return out;
}

StateSpace uncertainty_weight(const CouplingChannel& channel, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw InvalidArgument("uncertainty weight: epsilon must be positive");
  }
  const double level = channel.relative_extra_gain() + epsilon;
  return StateSpace::Gain(level * Matrix::Identity(2, 2));
}

StateSpace transfer_function(const std::vector<double>& num,
                             const std::vector<double>& den) {
  std::size_t lead = 0;
  while (lead < den.size() && den[lead] == 0.0) ++lead;
  if (lead == den.size()) {
    throw InvalidArgument("transfer function: zero denominator");
  }
  const std::vector<double> a(den.begin() + lead, den.end());
  const Index n = static_cast<Index>(a.size()) - 1;
  std::size_t nlead = 0;
  while (nlead + 1 < num.size() && num[nlead] == 0.0) ++nlead;
  std::vector<double> b(num.begin() + nlead, num.end());
  if (b.empty()) b.push_back(0.0);
  if (static_cast<Index>(b.size()) - 1 > n) {
    throw InvalidArgument("transfer function: improper (deg num > deg den)");
  }
  // pad numerator to n + 1 coefficients and normalize by the leading a0
  std::vector<double> bp(n + 1 - b.size(), 0.0);
  bp.insert(bp.end(), b.begin(), b.end());
  const double a0 = a[0];
  const double d = bp[0] / a0;
  Matrix am = Matrix::Zero(n, n), bm = Matrix::Zero(n, 1);
  Matrix cm(1, n), dm(1, 1);
  dm(0, 0) = d;
  if (n > 0) {
    for (Index i = 0; i < n; ++i) am(0, i) = -a[i + 1] / a0;
    if (n > 1) am.bottomLeftCorner(n - 1, n - 1).setIdentity();
    bm(0, 0) = 1.0;
    for (Index i = 0; i < n; ++i) cm(0, i) = bp[i + 1] / a0 - d * a[i + 1] / a0;
  }
  return StateSpace::Continuous(am, bm, cm, dm);
}

StateSpace diagonal(const StateSpace& siso, Index channels) {
  if (siso.inputs() != 1 || siso.outputs() != 1) {
    throw DimensionError("diagonal: expected a SISO system");
  }
  StateSpace out = siso;
  for (Index i = 1; i < channels; ++i) out = append(out, siso);
  return out;
}

RelayParams reference_relay_params(double a2) {
  RelayParams p;
  p.h = 1.0;
  p.f = 1.0e4;
  p.a1 = 1.0;
  p.a2 = a2;
  p.W = diagonal(transfer_function({1.0}, {2.0, 1.0}));
  p.F = StateSpace::Gain(Matrix::Identity(2, 2));
  p.P = diagonal(transfer_function({1.0}, {0.001, 1.0}));
  return p;
}

}  // namespace sdcancel
