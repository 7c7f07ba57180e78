#pragma once

#include <complex>

namespace cardpath {

/// Dimensionless complex amplitude psi.
class Amplitude {
 public:
  constexpr Amplitude() = default;
  constexpr Amplitude(double re, double im) : re_(re), im_(im) {}
  explicit constexpr Amplitude(std::complex<double> z) : re_(z.real()), im_(z.imag()) {}

  constexpr double re() const noexcept { return re_; }
  constexpr double im() const noexcept { return im_; }
  std::complex<double> complex() const noexcept { return {re_, im_}; }

  double modulus() const noexcept;
  /// Argument in radians, (-pi, pi].
  double phase() const noexcept;

  friend constexpr bool operator==(const Amplitude&, const Amplitude&) = default;

 private:
  double re_ = 0.0;
  double im_ = 0.0;
};

/// Squared modulus |psi|^2, read downstream as an ordinary probability density.
double born_probability(const Amplitude& psi) noexcept;

/// Amplitudes of alternatives add; their probabilities do not.
Amplitude superpose(const Amplitude& a, const Amplitude& b) noexcept;

/// Cross term 2 Re(a conj(b)): born(a+b) - born(a) - born(b).
double interference_term(const Amplitude& a, const Amplitude& b) noexcept;

/// A sample in phase form: modulus A and winding n in whole turns, so the
/// amplitude is A exp(2 pi i n).
struct WaveSample {
  double modulus = 0.0;
  double winding = 0.0;
};

/// (cos 2 pi t, sin 2 pi t), exact at multiples of a quarter turn and
/// periodic under integer shifts of t.
std::complex<double> unit_phase(double turns) noexcept;

/// A exp(2 pi i n). Throws NegativeModulus when A < 0.
Amplitude phase_from_count(const WaveSample& sample);

/// n -> n + c. The Born probability is unchanged.
WaveSample shift_winding(const WaveSample& sample, double c) noexcept;

}  // namespace cardpath
