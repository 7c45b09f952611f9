#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "sdcancel/diagram.hpp"
#include "sdcancel/errors.hpp"
#include "sdcancel/relay_model.hpp"

using namespace sdcancel;

namespace {

Complex poly(const std::vector<double>& c, Complex s) {
  Complex acc = 0.0;
  for (double x : c) acc = acc * s + x;
  return acc;
}

}  // namespace

TEST(Rotation, OrthogonalAndComposes) { EXPECT_LT(oracle::rotation_error(), 1e-12); }

TEST(Rotation, QuarterTurn) {
  // f L = 1/4 turn
  const Matrix r = rotation_matrix(1.0e4, 0.25e-4);
  EXPECT_NEAR(r(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(r(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(r(1, 0), -1.0, 1e-12);
}

TEST(ErrorSystem, BoundedBySumOfGains) {
  CouplingChannel ch;
  ch.extra_paths = {{0.01, 1.25}, {0.004, 1.5}, {0.006, 2.0}};
  const oracle::EBound eb = oracle::e_bound_check(ch, 1.0e4);
  EXPECT_LE(eb.peak, eb.bound * (1 + 1e-12));
  EXPECT_LT(eb.mismatch, 1e-9);
  EXPECT_NEAR(ch.relative_extra_gain(), 0.1, 1e-15);
}

TEST(ErrorSystem, SinglePathDominance) {
  CouplingChannel ch;
  ch.extra_paths = {{0.1 * ch.nominal.r, 1.1}};
  const oracle::EBound eb = oracle::e_bound_check(ch, 1.0e4);
  EXPECT_LT(eb.peak, 0.11);
  // a single path has constant gain r1 / r at every frequency
  EXPECT_NEAR(eb.peak, 0.1, 1e-12);
}

TEST(TransferFunction, MatchesPolynomialRatio) {
  const std::vector<double> num{1.0, 3.0}, den{2.0, 0.5, 4.0, 1.0};
  const StateSpace tf = transfer_function(num, den);
  for (double w : {0.01, 0.7, 9.0}) {
    const Complex s(0.0, w);
    EXPECT_LT(std::abs(frequency_response(tf, w)(0, 0) - poly(num, s) / poly(den, s)),
              1e-12);
  }
  const StateSpace prop = transfer_function({2.0, 1.0}, {1.0, 4.0});
  EXPECT_NEAR(prop.d()(0, 0), 2.0, 1e-15);
  EXPECT_THROW(transfer_function({1.0, 0.0, 0.0}, {1.0, 1.0}), Error);
  EXPECT_THROW(transfer_function({1.0}, {0.0}), Error);
}

TEST(TransferFunction, DiagonalPromotion) {
  const StateSpace w = diagonal(transfer_function({1.0}, {2.0, 1.0}));
  const CMatrix g = frequency_response(w, 0.5);
  ASSERT_EQ(g.rows(), 2);
  EXPECT_LT(std::abs(g(0, 1)) + std::abs(g(1, 0)), 1e-15);
  EXPECT_LT(std::abs(g(0, 0) - 1.0 / Complex(1.0, 1.0)), 1e-12);
  EXPECT_LT(std::abs(g(0, 0) - g(1, 1)), 1e-15);
}

TEST(GeneralizedPlant, ResponseMatchesDefinition) {
  const RelayParams prm = reference_relay_params(1000.0);
  CouplingChannel ch;
  const GeneralizedPlantSpec spec = build_generalized_plant(prm, ch);
  EXPECT_NEAR(spec.alpha, 1000.0 * 0.2, 1e-12);
  for (double w : {0.01, 0.5, 3.0}) {
    const Complex s(0.0, w);
    const Complex wv = 1.0 / (2.0 * s + 1.0), pv = 1.0 / (0.001 * s + 1.0);
    const Complex delay = std::exp(-s * ch.nominal.delay);
    const CMatrix g = spec.response(w);
    const CMatrix rot = rotation_matrix(prm.f, ch.nominal.delay).cast<Complex>();
    const CMatrix eye = CMatrix::Identity(2, 2);
    EXPECT_LT((g.topLeftCorner(2, 2) - wv * eye).norm(), 1e-12);
    EXPECT_LT((g.topRightCorner(2, 2) + pv * eye).norm(), 1e-12);
    EXPECT_LT((g.bottomLeftCorner(2, 2) - wv * eye).norm(), 1e-12);
    EXPECT_LT((g.bottomRightCorner(2, 2) - spec.alpha * delay * pv * rot).norm(), 1e-9);
  }
}

TEST(GeneralizedPlant, PerturbedChannelAddsPaths) {
  const RelayParams prm = reference_relay_params(100.0);
  CouplingChannel ch;
  ch.extra_paths = {{0.014, 1.1}};
  const GeneralizedPlantSpec spec = build_generalized_plant(prm, ch);
  const double w = 0.8;
  const CMatrix nominal = spec.alpha * std::exp(Complex(0, -w)) *
                          rotation_matrix(prm.f, 1.0).cast<Complex>();
  const CMatrix extra = 100.0 * 0.014 * std::exp(Complex(0, -1.1 * w)) *
                        rotation_matrix(prm.f, 1.1).cast<Complex>();
  EXPECT_LT((spec.perturbed_channel_response(w) - (nominal + extra)).norm(), 1e-9);
}

TEST(RelayParams, Validation) {
  RelayParams p = reference_relay_params();
  EXPECT_NO_THROW(p.validate());
  p.a2 = 0.0;
  EXPECT_NO_THROW(p.validate());
  p.a2 = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = reference_relay_params();
  p.h = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = reference_relay_params();
  p.W = StateSpace::Gain(Matrix::Identity(2, 2));
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(CouplingChannel, Validation) {
  CouplingChannel ch;
  EXPECT_NO_THROW(ch.validate());
  ch.extra_paths = {{0.01, 0.5}};
  EXPECT_THROW(ch.validate(), InvalidArgument);
  ch.extra_paths = {{-0.01, 1.5}};
  EXPECT_THROW(ch.validate(), InvalidArgument);
  ch = CouplingChannel{};
  ch.nominal.r = 0.0;
  EXPECT_THROW(ch.validate(), InvalidArgument);
}

TEST(UncertaintyWeight, StaticScaledIdentity) {
  CouplingChannel ch;
  ch.extra_paths = {{0.02, 2.0}};
  const StateSpace w2 = uncertainty_weight(ch, 0.01);
  EXPECT_EQ(w2.states(), 0);
  EXPECT_LT((w2.d() - 0.11 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Diagram, BuildsFeedForwardNetwork) {
  const StateSpace a = transfer_function({1.0}, {1.0, 1.0});
  const StateSpace b = transfer_function({1.0}, {0.5, 1.0});
  DiagramBuilder db(2);
  const auto ya = db.add(a, db.input(0, 1));
  const auto yb = db.add(b, db.sum(ya, db.input(1, 1)));
  const StateSpace sys = db.build({yb, db.scale(Matrix::Constant(1, 1, 3.0), ya)});
  const double w = 0.9;
  const Complex ga = frequency_response(a, w)(0, 0), gb = frequency_response(b, w)(0, 0);
  const CMatrix g = frequency_response(sys, w);
  EXPECT_LT(std::abs(g(0, 0) - gb * ga), 1e-12);
  EXPECT_LT(std::abs(g(0, 1) - gb), 1e-12);
  EXPECT_LT(std::abs(g(1, 0) - 3.0 * ga), 1e-12);
  EXPECT_LT(std::abs(g(1, 1)), 1e-15);
}
