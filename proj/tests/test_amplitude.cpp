#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cardpath/amplitude.hpp"
#include "cardpath/error.hpp"
#include "cardpath/numeric.hpp"

using namespace cardpath;

TEST(BornProbability, Examples) {
  EXPECT_EQ(born_probability({1.0, 0.0}), 1.0);
  EXPECT_NEAR(born_probability({0.6, 0.8}), 1.0, 1e-15);
  EXPECT_EQ(born_probability({}), 0.0);
}

TEST(Superpose, AmplitudesAddProbabilitiesDoNot) {
  EXPECT_EQ(superpose({1, 0}, {0, 1}), Amplitude(1, 1));
  const auto dark = superpose({1, 0}, {-1, 0});
  EXPECT_EQ(dark, Amplitude(0, 0));
  EXPECT_EQ(born_probability(dark), 0.0);
  EXPECT_EQ(born_probability({1, 0}) + born_probability({-1, 0}), 2.0);
  EXPECT_EQ(born_probability(superpose({1, 0}, {1, 0})), 4.0);
}

TEST(InterferenceTerm, MatchesProbabilityDefect) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Amplitude a(u(rng), u(rng)), b(u(rng), u(rng));
    const double defect = born_probability(superpose(a, b)) - born_probability(a) - born_probability(b);
    const double cross = 2.0 * (a.re() * b.re() + a.im() * b.im());
    EXPECT_NEAR(interference_term(a, b), cross, 1e-15);
    EXPECT_NEAR(defect, cross, 1e-12);
  }
}

TEST(Amplitude, ModulusAndPhase) {
  EXPECT_DOUBLE_EQ(Amplitude(3, 4).modulus(), 5.0);
  EXPECT_DOUBLE_EQ(Amplitude(0, 1).phase(), kPi / 2);
  EXPECT_DOUBLE_EQ(Amplitude(-1, 0).phase(), kPi);
}

TEST(UnitPhase, QuarterTurnsAreExact) {
  EXPECT_EQ(unit_phase(0.0), Complex(1, 0));
  EXPECT_EQ(unit_phase(0.25), Complex(0, 1));
  EXPECT_EQ(unit_phase(0.5), Complex(-1, 0));
  EXPECT_EQ(unit_phase(-0.25), Complex(0, -1));
  EXPECT_EQ(unit_phase(7.0), Complex(1, 0));
  EXPECT_EQ(unit_phase(-3.75), Complex(0, 1));
}

TEST(UnitPhase, PeriodicAndOnUnitCircle) {
  for (double t : {0.1, 0.37, -0.81, 12.3}) {
    const Complex z = unit_phase(t);
    EXPECT_NEAR(std::abs(z), 1.0, 1e-15);
    EXPECT_NEAR(z.real(), std::cos(kTwoPi * t), 1e-12);
    EXPECT_NEAR(z.imag(), std::sin(kTwoPi * t), 1e-12);
    EXPECT_NEAR(std::abs(unit_phase(t + 5.0) - z), 0.0, 1e-13);
  }
}

TEST(PhaseFromCount, Examples) {
  EXPECT_EQ(phase_from_count({1.0, 0.0}), Amplitude(1, 0));
  EXPECT_EQ(phase_from_count({1.0, 0.25}), Amplitude(0, 1));
  EXPECT_EQ(phase_from_count({2.0, 7.0}), Amplitude(2, 0));
  EXPECT_NEAR(phase_from_count({1.7, 0.123}).modulus(), 1.7, 1e-12);
}

TEST(PhaseFromCount, NegativeModulusThrows) {
  try {
    (void)phase_from_count({-0.1, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeModulus);
  }
}

TEST(ShiftWinding, Examples) {
  const auto s = shift_winding({1.0, 0.1}, 1.0);
  EXPECT_EQ(s.modulus, 1.0);
  EXPECT_NEAR(s.winding, 1.1, 1e-15);
  EXPECT_NEAR(born_probability(phase_from_count(s)), 1.0, 1e-15);

  const auto same = shift_winding({3.0, 0.0}, 0.0);
  EXPECT_EQ(same.modulus, 3.0);
  EXPECT_EQ(same.winding, 0.0);

  EXPECT_EQ(phase_from_count({1.0, 0.25}), Amplitude(0, 1));
  EXPECT_EQ(phase_from_count(shift_winding({1.0, 0.25}, 0.25)), Amplitude(-1, 0));
}
