#pragma once

#include <complex>
#include <optional>
#include <span>

#include "cardpath/amplitude.hpp"
#include "cardpath/lattice.hpp"
#include "cardpath/propagator.hpp"

// Ground truth for the test suites. Nothing here calls into the propagator's
// summation code.
namespace cardpath::oracles {

enum class KernelFamily { free, harmonic, euclidean_free };

struct AnalyticKernel {
  KernelFamily family = KernelFamily::free;
  double mass = 1.0;
  double omega = 0.0;
  double hbar = 1.0;
  double duration = 1.0;
};

/// free:      sqrt(m / (2 pi i hbar T)) exp(i m (b-a)^2 / (2 hbar T))
/// harmonic:  Mehler kernel, with the Maslov phase past each caustic
/// euclidean: sqrt(m / (2 pi hbar T)) exp(-m (b-a)^2 / (2 hbar T))
/// Throws CausticSingularity when sin(omega T) vanishes.
Amplitude analytic_propagator(const AnalyticKernel& kernel, double a, double b);

/// Integrates m r'' = -V'(r, t) with RK4 and bisects on the initial velocity
/// until |r(t_b) - b| <= 1e-9, then samples onto the time grid. Throws
/// ShootingFailure when no bracket is found or bisection stalls.
LatticePath shooting_euler_lagrange(const LagrangianSpec& lag, double a, double b, const TimeGrid& grid);

/// The path sum for the sampled rule by recursive descent over interior
/// sites, with its own action arithmetic. Throws TooLarge above 1e5 paths.
Amplitude naive_enumeration(const PropagatorConfig& cfg, std::optional<std::complex<double>> norm = std::nullopt);

/// Kolmogorov-Smirnov distance of draws from Uniform[lo, hi].
double ks_statistic_uniform(std::span<const double> draws, double lo, double hi);

/// Asymptotic 1% critical value 1.628 / sqrt(n).
double ks_critical_value_1pct(std::size_t n);

}  // namespace cardpath::oracles
