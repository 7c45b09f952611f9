#include "sdcancel/state_space.hpp"

#include <cmath>
#include <sstream>

#include "sdcancel/errors.hpp"

namespace sdcancel {

namespace {

void check_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite entries in matrix ") + name);
  }
}

}  // namespace

StateSpace::StateSpace(TimeDomain domain, double period, Matrix a, Matrix b,
                       Matrix c, Matrix d)
    : domain_(domain),
      period_(period),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      d_(std::move(d)) {
  const Index n = a_.rows();
  if (a_.cols() != n || b_.rows() != n || c_.cols() != n ||
      d_.rows() != c_.rows() || d_.cols() != b_.cols()) {
    std::ostringstream msg;
    msg << "inconsistent state-space dimensions: A " << a_.rows() << "x"
        << a_.cols() << ", B " << b_.rows() << "x" << b_.cols() << ", C "
        << c_.rows() << "x" << c_.cols() << ", D " << d_.rows() << "x"
        << d_.cols();
    throw DimensionError(msg.str());
  }
  check_finite(a_, "A");
  check_finite(b_, "B");
  check_finite(c_, "C");
  check_finite(d_, "D");
  if (domain_ == TimeDomain::kDiscrete && !(period_ > 0.0)) {
    throw InvalidArgument("discrete system needs a positive sample period");
  }
}

StateSpace StateSpace::Continuous(Matrix a, Matrix b, Matrix c, Matrix d) {
  return StateSpace(TimeDomain::kContinuous, 0.0, std::move(a), std::move(b),
                    std::move(c), std::move(d));
}

StateSpace StateSpace::Discrete(Matrix a, Matrix b, Matrix c, Matrix d,
                                double period) {
  return StateSpace(TimeDomain::kDiscrete, period, std::move(a), std::move(b),
                    std::move(c), std::move(d));
}

StateSpace StateSpace::Gain(Matrix d) {
  const Index p = d.rows(), m = d.cols();
  return Continuous(Matrix(0, 0), Matrix(0, m), Matrix(p, 0), std::move(d));
}

StateSpace StateSpace::Gain(Matrix d, double period) {
  const Index p = d.rows(), m = d.cols();
  return Discrete(Matrix(0, 0), Matrix(0, m), Matrix(p, 0), std::move(d),
                  period);
}

bool StateSpace::same_domain(const StateSpace& other) const {
  if (domain_ != other.domain_) return false;
  if (domain_ == TimeDomain::kContinuous) return true;
  return std::abs(period_ - other.period_) <=
         1e-12 * std::max(period_, other.period_);
}

StateSpace StateSpace::select(Index out_begin, Index out_count,
                              Index in_begin, Index in_count) const {
  if (out_begin < 0 || out_count < 0 || out_begin + out_count > outputs() ||
      in_begin < 0 || in_count < 0 || in_begin + in_count > inputs()) {
    throw DimensionError("channel selection outside the system dimensions");
  }
  return StateSpace(domain_, period_, a_, b_.middleCols(in_begin, in_count),
                    c_.middleRows(out_begin, out_count),
                    d_.block(out_begin, in_begin, out_count, in_count));
}

StateSpace StateSpace::transposed() const {
  return StateSpace(domain_, period_, a_.transpose(), c_.transpose(),
                    b_.transpose(), d_.transpose());
}

StateSpace StateSpace::similarity(const Matrix& t) const {
  if (t.rows() != states() || t.cols() != states()) {
    throw DimensionError("similarity transform has wrong size");
  }
  Eigen::PartialPivLU<Matrix> lu(t);
  Matrix t_inv = lu.inverse();
  return StateSpace(domain_, period_, t_inv * a_ * t, t_inv * b_, c_ * t, d_);
}

StateSpace StateSpace::scaled(double scale) const {
  return StateSpace(domain_, period_, a_, b_, scale * c_, scale * d_);
}

StateSpace append(const StateSpace& first, const StateSpace& second) {
  if (!first.same_domain(second)) {
    throw DimensionError("append: systems live in different time domains");
  }
  const Index n1 = first.states(), n2 = second.states();
  const Index m1 = first.inputs(), m2 = second.inputs();
  const Index p1 = first.outputs(), p2 = second.outputs();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  Matrix b = Matrix::Zero(n1 + n2, m1 + m2);
  Matrix c = Matrix::Zero(p1 + p2, n1 + n2);
  Matrix d = Matrix::Zero(p1 + p2, m1 + m2);
  a.topLeftCorner(n1, n1) = first.a();
  a.bottomRightCorner(n2, n2) = second.a();
  b.topLeftCorner(n1, m1) = first.b();
  b.bottomRightCorner(n2, m2) = second.b();
  c.topLeftCorner(p1, n1) = first.c();
  c.bottomRightCorner(p2, n2) = second.c();
  d.topLeftCorner(p1, m1) = first.d();
  d.bottomRightCorner(p2, m2) = second.d();
  if (first.is_discrete()) {
    return StateSpace::Discrete(a, b, c, d, first.period());
  }
  return StateSpace::Continuous(a, b, c, d);
}

}  // namespace sdcancel
