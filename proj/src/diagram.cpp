#include "sdcancel/diagram.hpp"

#include "sdcancel/errors.hpp"

namespace sdcancel {

DiagramBuilder::DiagramBuilder(Index external_inputs)
    : inputs_(external_inputs), b_(0, external_inputs) {}

DiagramBuilder::Signal DiagramBuilder::pad(const Signal& s) const {
  if (s.x_map.cols() == states()) return s;
  Signal out{Matrix::Zero(s.size(), states()), s.u_map};
  out.x_map.leftCols(s.x_map.cols()) = s.x_map;
  return out;
}

DiagramBuilder::Signal DiagramBuilder::input(Index begin, Index count) const {
  if (begin < 0 || count < 0 || begin + count > inputs_) {
    throw DimensionError("diagram: input selection out of range");
  }
  Signal s{Matrix::Zero(count, states()), Matrix::Zero(count, inputs_)};
  s.u_map.middleCols(begin, count).setIdentity();
  return s;
}

DiagramBuilder::Signal DiagramBuilder::zero(Index rows) const {
  return Signal{Matrix::Zero(rows, states()), Matrix::Zero(rows, inputs_)};
}

DiagramBuilder::Signal DiagramBuilder::sum(const Signal& a,
                                           const Signal& b) const {
  if (a.size() != b.size()) throw DimensionError("diagram: summing mismatch");
  const Signal pa = pad(a), pb = pad(b);
  return Signal{pa.x_map + pb.x_map, pa.u_map + pb.u_map};
}

DiagramBuilder::Signal DiagramBuilder::scale(const Matrix& gain,
                                             const Signal& s) const {
  if (gain.cols() != s.size()) throw DimensionError("diagram: gain mismatch");
  const Signal ps = pad(s);
  return Signal{gain * ps.x_map, gain * ps.u_map};
}

DiagramBuilder::Signal DiagramBuilder::add(const StateSpace& block,
                                           const Signal& in) {
  if (block.is_discrete()) {
    throw InvalidArgument("diagram: blocks must be continuous");
  }
  if (block.inputs() != in.size()) {
    throw DimensionError("diagram: block input size mismatch");
  }
  const Signal pin = pad(in);
  const Index n_old = states(), nb = block.states();
  Matrix a = Matrix::Zero(n_old + nb, n_old + nb);
  a.topLeftCorner(n_old, n_old) = a_;
  a.bottomLeftCorner(nb, n_old) = block.b() * pin.x_map;
  a.bottomRightCorner(nb, nb) = block.a();
  Matrix b(n_old + nb, inputs_);
  b << b_, block.b() * pin.u_map;
  a_ = std::move(a);
  b_ = std::move(b);

  Signal out{Matrix::Zero(block.outputs(), n_old + nb),
             block.d() * pin.u_map};
  out.x_map.leftCols(n_old) = block.d() * pin.x_map;
  out.x_map.rightCols(nb) = block.c();
  return out;
}

StateSpace DiagramBuilder::build(const std::vector<Signal>& outputs) const {
  Index rows = 0;
  for (const Signal& s : outputs) rows += s.size();
  Matrix c(rows, states());
  Matrix d(rows, inputs_);
  Index r = 0;
  for (const Signal& s : outputs) {
    const Signal ps = pad(s);
    c.middleRows(r, s.size()) = ps.x_map;
    d.middleRows(r, s.size()) = ps.u_map;
    r += s.size();
  }
  return StateSpace::Continuous(a_, b_, c, d);
}

}  // namespace sdcancel
