#include "cardpath/classical_limit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cardpath/error.hpp"

namespace cardpath {

namespace {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
};

Tridiagonal action_hessian(const LatticePath& path, const PropagatorConfig& cfg) {
  const int k = cfg.grid.k();
  const double eps = cfg.grid.epsilon();
  const double m = cfg.lag.mass;
  const std::size_t interior = static_cast<std::size_t>(k - 1);
  Tridiagonal h{std::vector<double>(interior), std::vector<double>(interior > 0 ? interior - 1 : 0)};
  // Curvature of V at each step midpoint, step i = 1..k.
  std::vector<double> curv(static_cast<std::size_t>(k) + 1);
  for (int i = 1; i <= k; ++i) curv[i] = cfg.lag.d2V(0.5 * (path[i - 1] + path[i]), cfg.grid.midpoint_time(i));
  for (int i = 1; i < k; ++i) {
    h.diag[i - 1] = 2.0 * m / eps - 0.25 * eps * (curv[i] + curv[i + 1]);
    if (i < k - 1) h.off[i - 1] = -m / eps - 0.25 * eps * curv[i + 1];
  }
  return h;
}

// Solves H x = g by the Thomas algorithm; reports whether every pivot was
// positive (H positive definite).
std::vector<double> solve_tridiagonal(const Tridiagonal& h, std::span<const double> g, bool& positive) {
  const std::size_t n = g.size();
  std::vector<double> c(n), d(n), x(n);
  positive = true;
  double pivot = h.diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) pivot = h.diag[i] - h.off[i - 1] * c[i - 1];
    if (!(pivot > 0.0)) positive = false;
    if (pivot == 0.0) throw Error(ErrorCode::NoConvergence, "singular action Hessian");
    c[i] = i + 1 < n ? h.off[i] / pivot : 0.0;
    d[i] = ((i > 0 ? g[i] - h.off[i - 1] * d[i - 1] : g[i])) / pivot;
  }
  for (std::size_t i = n; i-- > 0;) x[i] = d[i] - (i + 1 < n ? c[i] * x[i + 1] : 0.0);
  return x;
}

PropagatorConfig grid_for_hbar(const PropagatorConfig& cfg, double hbar, double factor) {
  PropagatorConfig out = cfg;
  out.hbar = hbar;
  const double half_width = factor * std::sqrt(hbar * cfg.grid.duration() / cfg.lag.mass);
  out.space = SpaceGrid::centered(0.5 * (cfg.a + cfg.b), half_width, cfg.space.sites());
  out.source_filter.reset();
  return out;
}

}  // namespace

std::vector<double> action_gradient(const LatticePath& path, const PropagatorConfig& cfg) {
  const int k = cfg.grid.k();
  if (path.size() != static_cast<std::size_t>(k) + 1) throw Error(ErrorCode::GridMismatch, "path/grid length");
  const double eps = cfg.grid.epsilon();
  const double m = cfg.lag.mass;
  std::vector<double> force(static_cast<std::size_t>(k) + 1);
  for (int i = 1; i <= k; ++i) force[i] = cfg.lag.dV(0.5 * (path[i - 1] + path[i]), cfg.grid.midpoint_time(i));
  std::vector<double> g(static_cast<std::size_t>(k - 1));
  for (int i = 1; i < k; ++i) {
    g[i - 1] = m * (2.0 * path[i] - path[i - 1] - path[i + 1]) / eps - 0.5 * eps * (force[i] + force[i + 1]);
  }
  return g;
}

std::vector<double> finite_difference_action_gradient(const LatticePath& path, const PropagatorConfig& cfg) {
  const int k = cfg.grid.k();
  if (path.size() != static_cast<std::size_t>(k) + 1) throw Error(ErrorCode::GridMismatch, "path/grid length");
  const double h = 1e-6 * cfg.space.dx();
  // Only the two steps touching site i depend on r_i, so the difference of the
  // full action equals the difference of those two terms.
  auto local = [&](int i, double ri) {
    return step_action(path[i - 1], ri, i, cfg.grid, cfg.lag) + step_action(ri, path[i + 1], i + 1, cfg.grid, cfg.lag);
  };
  std::vector<double> g(static_cast<std::size_t>(k - 1));
  for (int i = 1; i < k; ++i) g[i - 1] = (local(i, path[i] + h) - local(i, path[i] - h)) / (2.0 * h);
  return g;
}

ClassicalSolution solve_classical_path(const PropagatorConfig& cfg, DescentOptions options) {
  cfg.validate();
  const int k = cfg.grid.k();
  ClassicalSolution sol;
  sol.path = LatticePath::straight(cfg.snapped_a(), cfg.snapped_b(), k);
  if (k == 1) {
    sol.action = discretized_action(sol.path, cfg.grid, cfg.lag);
    return sol;
  }
  auto g = action_gradient(sol.path, cfg);
  double gnorm = max_norm(g);
  int iter = 0;
  while (gnorm > options.gradient_tolerance) {
    if (iter >= options.max_iterations) {
      throw Error(ErrorCode::NoConvergence, "gradient max-norm " + format_double(gnorm) + " after " +
                                                std::to_string(iter) + " iterations");
    }
    ++iter;
    bool positive = true;
    const auto step = solve_tridiagonal(action_hessian(sol.path, cfg), g, positive);
    // Backtrack on the gradient norm: the target is a stationary point.
    double lambda = 1.0;
    LatticePath trial = sol.path;
    std::vector<double> g_trial;
    for (int tries = 0; tries < 40; ++tries) {
      for (int i = 1; i < k; ++i) trial[i] = sol.path[i] - lambda * step[i - 1];
      g_trial = action_gradient(trial, cfg);
      if (max_norm(g_trial) < gnorm || tries == 39) break;
      lambda *= 0.5;
    }
    sol.path = trial;
    g = std::move(g_trial);
    gnorm = max_norm(g);
  }
  bool positive = true;
  (void)solve_tridiagonal(action_hessian(sol.path, cfg), g, positive);
  sol.stable = positive;
  sol.iterations = iter;
  sol.gradient_norm = gnorm;
  sol.action = discretized_action(sol.path, cfg.grid, cfg.lag);
  return sol;
}

LatticePath classical_path(const PropagatorConfig& cfg) { return solve_classical_path(cfg).path; }

ConcentrationScan concentration_scan(const PropagatorConfig& cfg, std::span<const double> hbar_values, double delta,
                                     ScanOptions options) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "tube half-width must be positive");
  if (hbar_values.empty()) throw Error(ErrorCode::InvalidArgument, "empty hbar sweep");
  for (std::size_t i = 0; i < hbar_values.size(); ++i) {
    if (!(hbar_values[i] > 0.0)) throw Error(ErrorCode::NonpositiveUnit, "hbar values must be positive");
    if (i > 0 && !(hbar_values[i] < hbar_values[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "hbar values must be strictly descending");
    }
  }

  ConcentrationScan scan;
  scan.hbar_values.assign(hbar_values.begin(), hbar_values.end());
  scan.delta = delta;
  const auto solution = solve_classical_path(cfg);
  scan.classical_path = solution.path;
  scan.classical_action = solution.action;

  const int k = cfg.grid.k();
  const auto& cl = scan.classical_path;
  const double eps = cfg.grid.epsilon();
  // One-sided second-order estimate of the classical initial velocity.
  const double v0 = k >= 2 ? (-3.0 * cl[0] + 4.0 * cl[1] - cl[2]) / (2.0 * eps) : (cl[1] - cl[0]) / eps;

  for (double hbar : hbar_values) {
    const auto start = std::chrono::steady_clock::now();
    const auto local = grid_for_hbar(cfg, hbar, options.half_width_factor);
    const TransferMatrix tm(local, TransferOptions{options.phase_free});
    const auto& space = local.space;
    const double width = std::sqrt(hbar * cfg.grid.duration() / (2.0 * cfg.lag.mass));
    auto free = gaussian_packet(space, cl.front(), width, cfg.lag.mass * v0, hbar);
    auto tube = free;
    std::vector<Complex> next(free.size());
    for (int step = 1; step <= k; ++step) {
      tm.apply(step, free, next);
      free.swap(next);
      tm.apply(step, tube, next);
      tube.swap(next);
      for (std::size_t j = 0; j < tube.size(); ++j) {
        if (std::abs(space.position(j) - cl[step]) > delta) tube[j] = 0.0;
      }
    }
    const double total = grid_norm(free, space);
    const double kept = grid_norm(tube, space);
    std::size_t peak = 0;
    for (std::size_t j = 1; j < free.size(); ++j) {
      if (std::norm(free[j]) > std::norm(free[peak])) peak = j;
    }
    scan.mass_fraction.push_back(total > 0.0 ? std::clamp(kept / total, 0.0, 1.0) : 0.0);
    scan.endpoint_offset.push_back(space.position(peak) - cl.back());
    scan.dx.push_back(space.dx());
    scan.m_scale.push_back(solution.action / (kTwoPi * hbar));
    scan.runtime_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return scan;
}

}  // namespace cardpath
