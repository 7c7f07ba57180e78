#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cardpath/amplitude.hpp"

namespace cardpath {

/// Uniform partition of (t_a, t_b) into k steps of length epsilon.
class TimeGrid {
 public:
  TimeGrid(double t_a, double t_b, int k);

  double t_a() const noexcept { return t_a_; }
  double t_b() const noexcept { return t_b_; }
  int k() const noexcept { return k_; }
  double epsilon() const noexcept { return epsilon_; }
  double duration() const noexcept { return t_b_ - t_a_; }
  /// t_i = t_a + i*epsilon, i = 0..k.
  double time(int i) const noexcept;
  /// t_{i-1/2} = t_a + (i - 1/2)*epsilon, i = 1..k.
  double midpoint_time(int i) const noexcept;

 private:
  double t_a_;
  double t_b_;
  int k_;
  double epsilon_;
};

/// Sites lo + j*dx, j = 0..sites-1.
class SpaceGrid {
 public:
  SpaceGrid(double lo, double hi, std::size_t sites);
  static SpaceGrid centered(double center, double half_width, std::size_t sites);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t sites() const noexcept { return sites_; }
  double dx() const noexcept { return dx_; }
  double position(std::size_t j) const noexcept;
  /// Index of the site closest to r. Throws GridMismatch if r lies more than
  /// half a spacing outside [lo, hi].
  std::size_t nearest_site(double r) const;

 private:
  double lo_;
  double hi_;
  std::size_t sites_;
  double dx_;
};

/// L(r, rdot, t) = mass*rdot^2/2 - V(r, t).
struct LagrangianSpec {
  double mass = 1.0;
  std::function<double(double r, double t)> potential;
  std::string label;
  /// Optional analytic dV/dr and d2V/dr2; central differences are used otherwise.
  std::function<double(double r, double t)> potential_gradient;
  std::function<double(double r, double t)> potential_curvature;
  /// When false the potential is assumed constant in t and kernels are cached.
  bool time_dependent = false;

  static LagrangianSpec free_particle(double mass);
  static LagrangianSpec harmonic(double mass, double omega);
  /// V = g*r.
  static LagrangianSpec linear(double mass, double g);

  /// Throws InvalidArgument unless mass > 0 and a potential is set.
  void validate() const;
  double V(double r, double t) const { return potential(r, t); }
  double dV(double r, double t) const;
  double d2V(double r, double t) const;
};

/// Site sequence r_0 ... r_k aligned with a TimeGrid.
class LatticePath {
 public:
  LatticePath() = default;
  explicit LatticePath(std::vector<double> sites);
  static LatticePath straight(double a, double b, int k);

  std::size_t size() const noexcept { return sites_.size(); }
  double operator[](std::size_t i) const { return sites_[i]; }
  double& operator[](std::size_t i) { return sites_[i]; }
  double front() const { return sites_.front(); }
  double back() const { return sites_.back(); }
  std::span<const double> sites() const noexcept { return sites_; }

 private:
  std::vector<double> sites_;
};

/// Joins two paths at a shared endpoint (p.back() == q.front()).
LatticePath concatenate(const LatticePath& p, const LatticePath& q);

/// Contribution of step i (r_{i-1} -> r_i) to the midpoint-rule action.
double step_action(double from, double to, int i, const TimeGrid& grid, const LagrangianSpec& lag);

/// S = sum_i [ m/2 ((r_i - r_{i-1})/eps)^2 - V((r_i + r_{i-1})/2, t_{i-1/2}) ] eps.
/// Throws GridMismatch unless the path has k+1 sites.
double discretized_action(std::span<const double> path, const TimeGrid& grid, const LagrangianSpec& lag);
double discretized_action(const LatticePath& path, const TimeGrid& grid, const LagrangianSpec& lag);

/// m = S/h. Throws NonpositiveUnit unless h > 0.
double winding_of(double action, double h);

/// P(next)/P(prev) = (A_next/A_prev)^2; the phases drop out.
/// Throws ZeroDenominator when P(prev) = 0.
double transition_ratio(const WaveSample& prev, const WaveSample& next);

/// Product of successive transition ratios; telescopes to (A_k/A_0)^2.
double path_probability_product(std::span<const WaveSample> samples);

struct PathAmplitude {
  double winding = 0.0;
  double modulus_ratio = 1.0;
  Amplitude value;
};

/// phi[r] = modulus_ratio * exp(2 pi i S/h).
PathAmplitude path_amplitude(const LatticePath& path, const TimeGrid& grid, const LagrangianSpec& lag, double h,
                             double modulus_ratio);

/// CSV rows "t,r" with 17 significant digits and a header.
void write_path_csv(std::ostream& out, const LatticePath& path, const TimeGrid& grid);
LatticePath read_path_csv(std::istream& in);

}  // namespace cardpath
