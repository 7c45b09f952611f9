#pragma once

#include <complex>

#include <Eigen/Dense>

namespace sdcancel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

enum class TimeDomain { kContinuous, kDiscrete };

/**
 * Real LTI system in state-space form, continuous or discrete time.
 *
 *   continuous: x' = A x + B u,        y = C x + D u
 *   discrete:   x[k+1] = A x[k] + B u, y = C x + D u   (sample period T)
 *
 * Instances are immutable; every operation returns a new system.
 */
class StateSpace {
 public:
  StateSpace() = default;

  static StateSpace Continuous(Matrix a, Matrix b, Matrix c, Matrix d);
  static StateSpace Discrete(Matrix a, Matrix b, Matrix c, Matrix d,
                             double period);
  /// Memoryless system y = D u.
  static StateSpace Gain(Matrix d);
  static StateSpace Gain(Matrix d, double period);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }

  TimeDomain domain() const { return domain_; }
  bool is_discrete() const { return domain_ == TimeDomain::kDiscrete; }
  /// Sample period; 0 for continuous systems.
  double period() const { return period_; }

  Index states() const { return a_.rows(); }
  Index inputs() const { return b_.cols(); }
  Index outputs() const { return c_.rows(); }

  bool same_domain(const StateSpace& other) const;

  /// Sub-system mapping the selected input columns to the selected outputs.
  StateSpace select(Index out_begin, Index out_count, Index in_begin,
                    Index in_count) const;

  /// Realization of the transposed transfer matrix (A', C', B', D').
  StateSpace transposed() const;

  /// Coordinates x = T x_new; T must be invertible.
  StateSpace similarity(const Matrix& t) const;

  /// y -> scale * y
  StateSpace scaled(double scale) const;

 private:
  StateSpace(TimeDomain domain, double period, Matrix a, Matrix b, Matrix c,
             Matrix d);

  TimeDomain domain_ = TimeDomain::kContinuous;
  double period_ = 0.0;
  Matrix a_ = Matrix(0, 0);
  Matrix b_ = Matrix(0, 0);
  Matrix c_ = Matrix(0, 0);
  Matrix d_ = Matrix(0, 0);
};

/// One point of a frequency response.
struct FrequencyResponseSample {
  double omega = 0.0;  // rad/s
  CMatrix value;
};

/// Block-diagonal direct sum: inputs and outputs stacked, states appended.
StateSpace append(const StateSpace& first, const StateSpace& second);

}  // namespace sdcancel
