#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardpath/amplitude.hpp"
#include "cardpath/lattice.hpp"
#include "cardpath/numeric.hpp"

namespace cardpath {

/// How one time step weights a jump between grid sites.
enum class StepRule {
  /// norm * dx * exp(i S_step / hbar), the literal lattice path weight.
  sampled,
  /// Exact hard-wall free step restricted to the grid's band (sine basis)
  /// times exp(-i eps V(midpoint) / hbar). Agrees with `sampled` for jumps the
  /// grid resolves and stays bounded for the ones it cannot.
  band_limited,
};

/// Smooth momentum cutoff applied to a point source:
/// F(k) = erfc((k / sqrt(m / (hbar T)) - cutoff) / width) / 2.
struct MomentumFilter {
  double cutoff = 5.5;
  double width = 1.0;
};

struct PropagatorConfig {
  TimeGrid grid;
  SpaceGrid space;
  LagrangianSpec lag;
  double hbar = 1.0;
  double a = 0.0;
  double b = 0.0;
  StepRule rule = StepRule::sampled;
  std::optional<MomentumFilter> source_filter;

  /// Throws NonpositiveUnit, InvalidArgument or GridMismatch.
  void validate() const;
  std::size_t site_a() const { return space.nearest_site(a); }
  std::size_t site_b() const { return space.nearest_site(b); }
  double snapped_a() const { return space.position(site_a()); }
  double snapped_b() const { return space.position(site_b()); }
};

/// Constants of the documented convergence recipe.
struct Recipe {
  static constexpr int steps = 200;
  static constexpr std::size_t sites = 401;
  static constexpr double half_width_factor = 6.0;
};

/// k = 200, 401 sites spanning (a+b)/2 +- 6 sqrt(hbar T / m), band-limited
/// steps with the default source filter.
PropagatorConfig recipe_config(LagrangianSpec lag, double hbar, double duration, double a, double b);

/// sqrt(m / (2 pi i hbar eps)), principal branch.
Complex norm_per_step(const PropagatorConfig& cfg);

enum class Method { enumeration, transfer_matrix, monte_carlo };
const char* to_string(Method method) noexcept;
const char* to_string(StepRule rule) noexcept;

struct PropagatorResult {
  Amplitude value;
  Method method = Method::transfer_matrix;
  int k = 0;
  std::size_t sites = 0;
  Amplitude norm_per_step;
  /// Present for Monte Carlo results only.
  std::optional<double> standard_error;
  double snapped_a = 0.0;
  double snapped_b = 0.0;
  /// |snapped - requested| for each endpoint.
  double snap_distance_a = 0.0;
  double snap_distance_b = 0.0;
  double runtime_ms = 0.0;

  /// P(b, a) = |K(b, a)|^2.
  double probability() const noexcept { return born_probability(value); }
};

struct TransferOptions {
  /// Drop the action phase (sampled rule only): every jump weighs norm * dx.
  bool phase_free = false;
};

/// One-step kernel matrices T_i[to, from] for a configuration. Applying
/// T_k ... T_1 to the source delta_a / dx evaluates the path sum.
class TransferMatrix {
 public:
  explicit TransferMatrix(const PropagatorConfig& cfg, TransferOptions options = {});

  const PropagatorConfig& config() const noexcept { return cfg_; }
  std::size_t sites() const noexcept { return cfg_.space.sites(); }
  int steps() const noexcept { return cfg_.grid.k(); }

  /// T_step[to, from], step = 1..k.
  Complex weight(int step, std::size_t to, std::size_t from) const;

  /// out = T_step in. Rows are reduced pairwise and independently, so the
  /// result does not depend on the worker count.
  void apply(int step, std::span<const Complex> in, std::span<Complex> out) const;
  /// out = T_step^T in.
  void apply_transpose(int step, std::span<const Complex> in, std::span<Complex> out) const;

  /// delta_site / dx, or its band-limited version when the config carries a
  /// source filter.
  std::vector<Complex> point_source(std::size_t site) const;

 private:
  Complex compute_weight(int step, std::size_t to, std::size_t from) const;

  PropagatorConfig cfg_;
  TransferOptions options_;
  Complex norm_;
  std::vector<Complex> kinetic_;  // band_limited: f(m), m = 0..2N
  std::vector<Complex> cached_;   // time-independent potentials: T[to * N + from]
};

/// Applies steps first..last (inclusive) to psi.
std::vector<Complex> propagate_vector(const TransferMatrix& tm, std::vector<Complex> psi, int first_step,
                                      int last_step);

/// K(b, c) for every site c, for propagation from slice `from_slice` to t_b.
std::vector<Complex> kernel_to_endpoint(const TransferMatrix& tm, std::size_t site_b, int from_slice);

/// K(x_j, a) at t_b for every site j.
std::vector<Complex> transfer_matrix_slice(const PropagatorConfig& cfg);

/// Exact sum over all sites^(k-1) interior assignments. Throws TooLarge when
/// that count exceeds 1e7.
PropagatorResult propagate_enumerate(const PropagatorConfig& cfg);

/// k applications of the one-step kernel; O(k sites^2).
PropagatorResult propagate_transfer_matrix(const PropagatorConfig& cfg);

struct EuclideanOptions {
  /// The proposal bridge has diffusion proposal_scale^2 * hbar / m. At 1 the
  /// free-particle estimator has zero variance.
  double proposal_scale = 1.0;
};

/// Imaginary-time kernel (weights exp(-S_E / hbar)) by importance-weighted
/// Brownian-bridge sampling between a and b. Bitwise reproducible per seed for
/// any worker count. Throws UnboundedPotential when V is not bounded below on
/// the space grid.
PropagatorResult propagate_monte_carlo_euclidean(const PropagatorConfig& cfg, std::size_t samples,
                                                 std::uint64_t seed, EuclideanOptions options = {});

/// sum_c K(b, c) K(c, a) dx.
Amplitude compose(std::span<const Complex> k_ca, std::span<const Complex> k_bc, const SpaceGrid& space);

/// Normalized exp(-(x - c)^2 / (4 width^2) + i p (x - c) / hbar) on the grid.
std::vector<Complex> gaussian_packet(const SpaceGrid& space, double center, double width, double momentum,
                                     double hbar);

/// sum_j |psi_j|^2 dx.
double grid_norm(std::span<const Complex> psi, const SpaceGrid& space);

}  // namespace cardpath
