#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cardpath/error.hpp"
#include "cardpath/lattice.hpp"
#include "cardpath/numeric.hpp"

using namespace cardpath;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cardpath::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(TimeGrid, StepsTileTheSpan) {
  const TimeGrid g(0.3, 1.7, 7);
  EXPECT_NEAR(g.epsilon() * g.k(), 1.4, 1.4e-12);
  EXPECT_DOUBLE_EQ(g.time(0), 0.3);
  EXPECT_NEAR(g.time(7), 1.7, 1e-15);
  EXPECT_NEAR(g.midpoint_time(1), 0.4, 1e-15);
  EXPECT_EQ(code_of([] { TimeGrid(1.0, 1.0, 3); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { TimeGrid(0.0, 1.0, 0); }), ErrorCode::InvalidArgument);
}

TEST(SpaceGrid, SitesAndSnapping) {
  const SpaceGrid s(-1.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(s.dx(), 0.5);
  EXPECT_DOUBLE_EQ(s.position(3), 0.5);
  EXPECT_EQ(s.nearest_site(0.3), 3u);
  EXPECT_EQ(s.nearest_site(1.2), 4u);
  EXPECT_EQ(code_of([&] { (void)s.nearest_site(1.3); }), ErrorCode::GridMismatch);
  EXPECT_EQ(code_of([] { SpaceGrid(0.0, 1.0, 1); }), ErrorCode::InvalidArgument);

  const auto c = SpaceGrid::centered(2.0, 3.0, 7);
  EXPECT_DOUBLE_EQ(c.lo(), -1.0);
  EXPECT_DOUBLE_EQ(c.hi(), 5.0);
  EXPECT_DOUBLE_EQ(c.position(3), 2.0);
}

TEST(LagrangianSpec, FactoriesAndValidation) {
  const auto h = LagrangianSpec::harmonic(2.0, 3.0);
  EXPECT_DOUBLE_EQ(h.V(1.0, 0.0), 9.0);
  EXPECT_NEAR(h.dV(1.0, 0.0), 18.0, 1e-12);
  EXPECT_NEAR(h.d2V(0.4, 0.0), 18.0, 1e-9);
  EXPECT_DOUBLE_EQ(LagrangianSpec::linear(1.0, 2.0).V(1.5, 0.0), 3.0);

  LagrangianSpec bad = LagrangianSpec::free_particle(1.0);
  bad.mass = -1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
  bad.mass = 1.0;
  bad.potential = nullptr;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
}

TEST(LagrangianSpec, DifferencedDerivativesWithoutAnalyticOnes) {
  LagrangianSpec lag;
  lag.mass = 1.0;
  lag.potential = [](double r, double) { return r * r * r; };
  EXPECT_NEAR(lag.dV(2.0, 0.0), 12.0, 1e-6);
  EXPECT_NEAR(lag.d2V(2.0, 0.0), 12.0, 1e-4);
}

TEST(DiscretizedAction, StraightFreePathIsHalfMassDistanceSquaredOverTime) {
  const auto lag = LagrangianSpec::free_particle(1.0);
  for (int k : {1, 4, 37}) {
    const TimeGrid g(0.0, 1.0, k);
    EXPECT_NEAR(discretized_action(LatticePath::straight(0.0, 1.0, k), g, lag), 0.5, 1e-14);
  }
}

TEST(DiscretizedAction, ConstantFreePathIsZero) {
  const TimeGrid g(0.0, 2.0, 5);
  const LatticePath p(std::vector<double>(6, 1.3));
  EXPECT_EQ(discretized_action(p, g, LagrangianSpec::free_particle(1.0)), 0.0);
}

TEST(DiscretizedAction, SingleStepHandValue) {
  // m = 2, eps = 0.5, dr = 1: (1/2) 2 (1/0.5)^2 0.5 = 2.
  const TimeGrid g(0.0, 0.5, 1);
  EXPECT_DOUBLE_EQ(discretized_action(LatticePath({0.0, 1.0}), g, LagrangianSpec::free_particle(2.0)), 2.0);
}

TEST(DiscretizedAction, MidpointPotential) {
  // One step 0 -> 1 over eps = 1 with V = g r: S = 1/2 - g * 0.5.
  const TimeGrid g(0.0, 1.0, 1);
  EXPECT_DOUBLE_EQ(discretized_action(LatticePath({0.0, 1.0}), g, LagrangianSpec::linear(1.0, 3.0)), -1.0);
}

TEST(DiscretizedAction, LengthMismatch) {
  const TimeGrid g(0.0, 1.0, 3);
  EXPECT_EQ(code_of([&] { (void)discretized_action(LatticePath({0.0, 1.0}), g, LagrangianSpec::free_particle(1)); }),
            ErrorCode::GridMismatch);
}

TEST(Winding, Examples) {
  EXPECT_EQ(winding_of(0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(winding_of(kTwoPi, kTwoPi), 1.0);
  EXPECT_DOUBLE_EQ(winding_of(0.5, 0.25), 2.0);
  EXPECT_EQ(code_of([] { (void)winding_of(1.0, 0.0); }), ErrorCode::NonpositiveUnit);
}

TEST(Winding, AdditiveOverConcatenation) {
  const auto lag = LagrangianSpec::harmonic(1.0, 1.3);
  const LatticePath p({0.0, 0.3, 0.2, 0.7});
  const LatticePath q({0.7, 0.1, -0.4});
  const TimeGrid whole(0.0, 1.0, 5);
  const TimeGrid first(0.0, 0.6, 3);
  const TimeGrid second(0.6, 1.0, 2);
  const double h = 0.37;
  const double joined = winding_of(discretized_action(concatenate(p, q), whole, lag), h);
  const double parts = winding_of(discretized_action(p, first, lag), h) + winding_of(discretized_action(q, second, lag), h);
  EXPECT_NEAR(joined, parts, 1e-12);
  EXPECT_EQ(code_of([&] { (void)concatenate(p, LatticePath({0.0, 1.0})); }), ErrorCode::GridMismatch);
}

TEST(TransitionRatio, Examples) {
  EXPECT_EQ(transition_ratio({1.0, 0.0}, {1.0, 0.37}), 1.0);
  EXPECT_EQ(transition_ratio({2.0, 0.0}, {1.0, 0.0}), 0.25);
  EXPECT_EQ(code_of([] { (void)transition_ratio({0.0, 0.3}, {1.0, 0.0}); }), ErrorCode::ZeroDenominator);
}

TEST(PathProbabilityProduct, Telescopes) {
  const std::vector<WaveSample> s{{1.0, 0.1}, {2.0, 0.7}, {4.0, -3.0}};
  EXPECT_DOUBLE_EQ(path_probability_product(s), 16.0);
  const std::vector<WaveSample> flat(9, WaveSample{0.3, 0.2});
  EXPECT_NEAR(path_probability_product(flat), 1.0, 1e-15);
  const std::vector<WaveSample> broken{{1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  EXPECT_EQ(code_of([&] { (void)path_probability_product(broken); }), ErrorCode::ZeroDenominator);
}

TEST(PathAmplitude, Examples) {
  const auto lag = LagrangianSpec::free_particle(1.0);
  const TimeGrid g(0.0, 1.0, 4);
  // S = 0.5, h = 0.5: one full turn.
  const auto full = path_amplitude(LatticePath::straight(0.0, 1.0, 4), g, lag, 0.5, 1.0);
  EXPECT_NEAR(full.winding, 1.0, 1e-14);
  EXPECT_NEAR(full.value.re(), 1.0, 1e-12);
  EXPECT_NEAR(full.value.im(), 0.0, 1e-12);
  // S = h/2: half turn.
  const auto half = path_amplitude(LatticePath::straight(0.0, 1.0, 4), g, lag, 1.0, 2.0);
  EXPECT_NEAR(half.value.re(), -2.0, 1e-12);
  EXPECT_NEAR(half.value.im(), 0.0, 1e-12);
  const auto still = path_amplitude(LatticePath(std::vector<double>(5, 0.4)), g, lag, 0.7, 0.3);
  EXPECT_EQ(still.value, Amplitude(0.3, 0.0));
}

TEST(PathCsv, RoundTripsBitForBit) {
  const TimeGrid g(0.0, 1.0, 3);
  const LatticePath p({0.1, 1.0 / 3.0, -2.0e-17, 5.5});
  std::stringstream buf;
  write_path_csv(buf, p, g);
  EXPECT_EQ(buf.str().substr(0, 4), "t,r\n");
  const auto back = read_path_csv(buf);
  ASSERT_EQ(back.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(back[i], p[i]);
}
