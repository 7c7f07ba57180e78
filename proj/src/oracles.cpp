#include "cardpath/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cardpath/error.hpp"

namespace cardpath::oracles {

namespace {

constexpr double kPiLocal = 3.14159265358979323846;
constexpr double kShootingTolerance = 1e-9;
constexpr int kRk4Substeps = 64;

struct Trajectory {
  std::vector<double> r;  // at grid times t_0..t_k
};

Trajectory integrate(const LagrangianSpec& lag, double a, double v0, const TimeGrid& grid) {
  Trajectory out;
  out.r.resize(static_cast<std::size_t>(grid.k()) + 1);
  double r = a;
  double v = v0;
  out.r[0] = r;
  const double h = grid.epsilon() / kRk4Substeps;
  auto accel = [&lag](double x, double t) { return -lag.dV(x, t) / lag.mass; };
  for (int i = 1; i <= grid.k(); ++i) {
    double t = grid.time(i - 1);
    for (int s = 0; s < kRk4Substeps; ++s) {
      const double k1r = v;
      const double k1v = accel(r, t);
      const double k2r = v + 0.5 * h * k1v;
      const double k2v = accel(r + 0.5 * h * k1r, t + 0.5 * h);
      const double k3r = v + 0.5 * h * k2v;
      const double k3v = accel(r + 0.5 * h * k2r, t + 0.5 * h);
      const double k4r = v + h * k3v;
      const double k4v = accel(r + h * k3r, t + h);
      r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      t += h;
    }
    out.r[i] = r;
  }
  return out;
}

}  // namespace

Amplitude analytic_propagator(const AnalyticKernel& kernel, double a, double b) {
  const double m = kernel.mass;
  const double hbar = kernel.hbar;
  const double T = kernel.duration;
  if (!(m > 0.0) || !(hbar > 0.0) || !(T > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "analytic kernel needs positive mass, hbar and duration");
  }
  const double d = b - a;
  switch (kernel.family) {
    case KernelFamily::free: {
      const double modulus = std::sqrt(m / (2.0 * kPiLocal * hbar * T));
      const double phase = m * d * d / (2.0 * hbar * T) - kPiLocal / 4.0;
      return Amplitude(std::polar(modulus, phase));
    }
    case KernelFamily::euclidean_free: {
      const double value = std::sqrt(m / (2.0 * kPiLocal * hbar * T)) * std::exp(-m * d * d / (2.0 * hbar * T));
      return Amplitude(value, 0.0);
    }
    case KernelFamily::harmonic: {
      const double w = kernel.omega;
      const double s = std::sin(w * T);
      const double c = std::cos(w * T);
      if (std::abs(s) < 1e-12) throw Error(ErrorCode::CausticSingularity, "sin(omega T) = 0");
      const double modulus = std::sqrt(m * w / (2.0 * kPiLocal * hbar * std::abs(s)));
      const double maslov = std::floor(w * T / kPiLocal);
      const double phase = m * w * ((a * a + b * b) * c - 2.0 * a * b) / (2.0 * hbar * s) - kPiLocal / 4.0 -
                           kPiLocal / 2.0 * maslov;
      return Amplitude(std::polar(modulus, phase));
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kernel family");
}

LatticePath shooting_euler_lagrange(const LagrangianSpec& lag, double a, double b, const TimeGrid& grid) {
  lag.validate();
  const double T = grid.duration();
  auto miss = [&](double v0) { return integrate(lag, a, v0, grid).r.back() - b; };

  const double guess = (b - a) / T;
  double step = std::max(1.0, std::abs(guess));
  double lo = guess - step;
  double hi = guess + step;
  double f_lo = miss(lo);
  double f_hi = miss(hi);
  int expansions = 0;
  while (f_lo * f_hi > 0.0) {
    if (++expansions > 60) throw Error(ErrorCode::ShootingFailure, "no bracket for the initial velocity");
    step *= 2.0;
    lo = guess - step;
    hi = guess + step;
    f_lo = miss(lo);
    f_hi = miss(hi);
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const auto traj = integrate(lag, a, mid, grid);
    const double f_mid = traj.r.back() - b;
    if (std::abs(f_mid) <= kShootingTolerance) return LatticePath(traj.r);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  throw Error(ErrorCode::ShootingFailure, "bisection did not reach the endpoint tolerance");
}

Amplitude naive_enumeration(const PropagatorConfig& cfg, std::optional<std::complex<double>> norm) {
  const int k = cfg.grid.k();
  const std::size_t n = cfg.space.sites();
  double count = 1.0;
  for (int i = 1; i < k; ++i) {
    count *= static_cast<double>(n);
    if (count > 1e5) throw Error(ErrorCode::TooLarge, "naive enumeration is capped at 1e5 paths");
  }
  const double m = cfg.lag.mass;
  const double hbar = cfg.hbar;
  const double eps = (cfg.grid.t_b() - cfg.grid.t_a()) / k;
  const double dx = (cfg.space.hi() - cfg.space.lo()) / static_cast<double>(n - 1);
  const std::complex<double> c =
      norm.value_or(std::sqrt(std::complex<double>(m, 0.0) / std::complex<double>(0.0, 2.0 * kPiLocal * hbar * eps)));
  auto site = [&](std::size_t j) { return cfg.space.lo() + static_cast<double>(j) * dx; };
  const double a = site(cfg.space.nearest_site(cfg.a));
  const double b = site(cfg.space.nearest_site(cfg.b));

  // Lagrangian increment of the step ending at slice i.
  auto increment = [&](double from, double to, int i) {
    const double v = (to - from) / eps;
    const double t_mid = cfg.grid.t_a() + (static_cast<double>(i) - 0.5) * eps;
    return eps * (0.5 * m * v * v - cfg.lag.potential(0.5 * (from + to), t_mid));
  };

  std::complex<double> total(0.0, 0.0);
  auto descend = [&](auto&& self, int slice, double r_prev, double action) -> void {
    if (slice == k - 1) {
      const double s = action + increment(r_prev, b, k);
      if (std::isfinite(s)) total += std::exp(std::complex<double>(0.0, s / hbar));
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double r = site(j);
      self(self, slice + 1, r, action + increment(r_prev, r, slice + 1));
    }
  };
  descend(descend, 0, a, 0.0);
  // Each of the k steps carries the constant; the k-1 free sites carry dx.
  std::complex<double> measure = 1.0;
  for (int i = 0; i < k; ++i) measure *= c;
  for (int i = 1; i < k; ++i) measure *= dx;
  return Amplitude(total * measure);
}

double ks_statistic_uniform(std::span<const double> draws, double lo, double hi) {
  std::vector<double> x(draws.begin(), draws.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace cardpath::oracles
