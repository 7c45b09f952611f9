#pragma once

#include <vector>

#include "sdcancel/state_space.hpp"

namespace sdcancel {

/**
 * Assembles a feed-forward block diagram of continuous (or same-period
 * discrete) blocks into one state-space realization.
 *
 * A Signal is a linear function of the diagram state and external input:
 * signal = x_map * x + u_map * u. Blocks are added in topological order;
 * the state of each new block is appended, so older signals are padded
 * with zero columns on use.
 */
class DiagramBuilder {
 public:
  struct Signal {
    Matrix x_map;
    Matrix u_map;
    Index size() const { return u_map.rows(); }
  };

  explicit DiagramBuilder(Index external_inputs);

  /// Rows [begin, begin + count) of the external input vector.
  Signal input(Index begin, Index count) const;

  /// Output of `block` driven by `in`; `block` must be continuous.
  Signal add(const StateSpace& block, const Signal& in);

  Signal sum(const Signal& a, const Signal& b) const;
  Signal scale(const Matrix& gain, const Signal& s) const;
  Signal zero(Index rows) const;

  Index states() const { return static_cast<Index>(a_.rows()); }

  /// Continuous system with the given output signals stacked in order.
  StateSpace build(const std::vector<Signal>& outputs) const;

 private:
  Signal pad(const Signal& s) const;

  Index inputs_;
  Matrix a_ = Matrix(0, 0);
  Matrix b_;
};

}  // namespace sdcancel
