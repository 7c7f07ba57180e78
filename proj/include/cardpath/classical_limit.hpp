#pragma once

#include <span>
#include <vector>

#include "cardpath/lattice.hpp"
#include "cardpath/propagator.hpp"

namespace cardpath {

struct DescentOptions {
  double gradient_tolerance = 1e-10;
  int max_iterations = 100;
};

struct ClassicalSolution {
  LatticePath path;
  double action = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  /// False when the action Hessian is not positive definite at the solution
  /// (the time span reaches a caustic and other stationary paths may exist).
  bool stable = true;
};

/// Stationary point of the discretized action with pinned endpoints, reached
/// by damped Newton descent from the straight line. Throws NoConvergence if
/// the gradient max-norm is still above tolerance after the iteration cap.
ClassicalSolution solve_classical_path(const PropagatorConfig& cfg, DescentOptions options = {});
LatticePath classical_path(const PropagatorConfig& cfg);

/// dS/dr_i for the interior sites i = 1..k-1, from the potential's derivatives.
std::vector<double> action_gradient(const LatticePath& path, const PropagatorConfig& cfg);

/// Central differences of the discretized action with step 1e-6 dx.
std::vector<double> finite_difference_action_gradient(const LatticePath& path, const PropagatorConfig& cfg);

struct ScanOptions {
  double half_width_factor = Recipe::half_width_factor;
  /// Drop the action phase (sampled rule only).
  bool phase_free = false;
};

/// Per-hbar concentration of the propagated probability around the classical
/// path. For each hbar a packet of width sqrt(hbar T / 2m) carrying the
/// classical initial momentum is propagated twice on a recipe grid: freely,
/// and with every site outside |r_i - r_cl(t_i)| <= delta zeroed after each
/// step. mass_fraction is the ratio of the final Born masses.
struct ConcentrationScan {
  std::vector<double> hbar_values;
  double delta = 0.0;
  std::vector<double> mass_fraction;
  /// argmax_b |psi(b)|^2 minus the classical endpoint.
  std::vector<double> endpoint_offset;
  std::vector<double> dx;
  /// S_cl / h with h = 2 pi hbar.
  std::vector<double> m_scale;
  std::vector<double> runtime_ms;
  LatticePath classical_path;
  double classical_action = 0.0;
};

ConcentrationScan concentration_scan(const PropagatorConfig& cfg, std::span<const double> hbar_values, double delta,
                                     ScanOptions options = {});

}  // namespace cardpath
