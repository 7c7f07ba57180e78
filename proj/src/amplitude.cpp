#include "cardpath/amplitude.hpp"

#include <cmath>

#include "cardpath/error.hpp"
#include "cardpath/numeric.hpp"

namespace cardpath {

double Amplitude::modulus() const noexcept { return std::hypot(re_, im_); }

double Amplitude::phase() const noexcept { return std::atan2(im_, re_); }

double born_probability(const Amplitude& psi) noexcept {
  return psi.re() * psi.re() + psi.im() * psi.im();
}

Amplitude superpose(const Amplitude& a, const Amplitude& b) noexcept {
  return {a.re() + b.re(), a.im() + b.im()};
}

double interference_term(const Amplitude& a, const Amplitude& b) noexcept {
  return 2.0 * (a.re() * b.re() + a.im() * b.im());
}

std::complex<double> unit_phase(double turns) noexcept {
  // Reduce to f in [-1/2, 1/2], then to a quarter-turn index q and a
  // remainder r in [-1/8, 1/8]; the quarter turns are applied exactly.
  const double f = turns - std::round(turns);
  const double q = std::round(4.0 * f);
  const double r = f - 0.25 * q;
  const double c = std::cos(kTwoPi * r);
  const double s = std::sin(kTwoPi * r);
  switch ((static_cast<int>(q) % 4 + 4) % 4) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

Amplitude phase_from_count(const WaveSample& sample) {
  if (!(sample.modulus >= 0.0)) {
    throw Error(ErrorCode::NegativeModulus, "modulus must be nonnegative");
  }
  return Amplitude(sample.modulus * unit_phase(sample.winding));
}

WaveSample shift_winding(const WaveSample& sample, double c) noexcept {
  return {sample.modulus, sample.winding + c};
}

}  // namespace cardpath
