#include "cardpath/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cardpath/error.hpp"
#include "cardpath/numeric.hpp"

namespace cardpath {

TimeGrid::TimeGrid(double t_a, double t_b, int k) : t_a_(t_a), t_b_(t_b), k_(k) {
  if (!std::isfinite(t_a) || !std::isfinite(t_b) || !(t_b > t_a)) {
    throw Error(ErrorCode::InvalidArgument, "time grid needs finite t_a < t_b");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "time grid needs k >= 1");
  epsilon_ = (t_b - t_a) / k;
}

double TimeGrid::time(int i) const noexcept { return i == k_ ? t_b_ : t_a_ + i * epsilon_; }

double TimeGrid::midpoint_time(int i) const noexcept { return t_a_ + (i - 0.5) * epsilon_; }

SpaceGrid::SpaceGrid(double lo, double hi, std::size_t sites) : lo_(lo), hi_(hi), sites_(sites) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw Error(ErrorCode::InvalidArgument, "space grid needs finite lo < hi");
  }
  if (sites < 2) throw Error(ErrorCode::InvalidArgument, "space grid needs at least 2 sites");
  dx_ = (hi - lo) / static_cast<double>(sites - 1);
}

SpaceGrid SpaceGrid::centered(double center, double half_width, std::size_t sites) {
  return SpaceGrid(center - half_width, center + half_width, sites);
}

double SpaceGrid::position(std::size_t j) const noexcept {
  return j + 1 == sites_ ? hi_ : lo_ + static_cast<double>(j) * dx_;
}

std::size_t SpaceGrid::nearest_site(double r) const {
  const double u = (r - lo_) / dx_;
  if (!(u >= -0.5 && u <= static_cast<double>(sites_ - 1) + 0.5)) {
    throw Error(ErrorCode::GridMismatch, "position " + format_double(r) + " lies outside the space grid");
  }
  const double j = std::round(u);
  return static_cast<std::size_t>(std::clamp(j, 0.0, static_cast<double>(sites_ - 1)));
}

LagrangianSpec LagrangianSpec::free_particle(double mass) {
  LagrangianSpec lag;
  lag.mass = mass;
  lag.label = "free";
  lag.potential = [](double, double) { return 0.0; };
  lag.potential_gradient = [](double, double) { return 0.0; };
  lag.potential_curvature = [](double, double) { return 0.0; };
  return lag;
}

LagrangianSpec LagrangianSpec::harmonic(double mass, double omega) {
  LagrangianSpec lag;
  lag.mass = mass;
  lag.label = "harmonic";
  const double stiffness = mass * omega * omega;
  lag.potential = [stiffness](double r, double) { return 0.5 * stiffness * r * r; };
  lag.potential_gradient = [stiffness](double r, double) { return stiffness * r; };
  lag.potential_curvature = [stiffness](double, double) { return stiffness; };
  return lag;
}

LagrangianSpec LagrangianSpec::linear(double mass, double g) {
  LagrangianSpec lag;
  lag.mass = mass;
  lag.label = "linear";
  lag.potential = [g](double r, double) { return g * r; };
  lag.potential_gradient = [g](double, double) { return g; };
  lag.potential_curvature = [](double, double) { return 0.0; };
  return lag;
}

void LagrangianSpec::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  if (!potential) throw Error(ErrorCode::InvalidArgument, "potential is not set");
}

double LagrangianSpec::dV(double r, double t) const {
  if (potential_gradient) return potential_gradient(r, t);
  const double h = 1e-5 * std::max(1.0, std::abs(r));
  return (potential(r + h, t) - potential(r - h, t)) / (2.0 * h);
}

double LagrangianSpec::d2V(double r, double t) const {
  if (potential_curvature) return potential_curvature(r, t);
  const double h = 1e-4 * std::max(1.0, std::abs(r));
  return (potential(r + h, t) - 2.0 * potential(r, t) + potential(r - h, t)) / (h * h);
}

LatticePath::LatticePath(std::vector<double> sites) : sites_(std::move(sites)) {}

LatticePath LatticePath::straight(double a, double b, int k) {
  std::vector<double> r(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) r[i] = a + (b - a) * static_cast<double>(i) / k;
  r.back() = b;
  return LatticePath(std::move(r));
}

LatticePath concatenate(const LatticePath& p, const LatticePath& q) {
  if (p.size() == 0 || q.size() == 0 || p.back() != q.front()) {
    throw Error(ErrorCode::GridMismatch, "paths must share the joining endpoint");
  }
  std::vector<double> r(p.sites().begin(), p.sites().end());
  r.insert(r.end(), q.sites().begin() + 1, q.sites().end());
  return LatticePath(std::move(r));
}

double step_action(double from, double to, int i, const TimeGrid& grid, const LagrangianSpec& lag) {
  const double eps = grid.epsilon();
  const double velocity = (to - from) / eps;
  const double v = lag.potential(0.5 * (from + to), grid.midpoint_time(i));
  return (0.5 * lag.mass * velocity * velocity - v) * eps;
}

double discretized_action(std::span<const double> path, const TimeGrid& grid, const LagrangianSpec& lag) {
  if (path.size() != static_cast<std::size_t>(grid.k()) + 1) {
    throw Error(ErrorCode::GridMismatch, "path has " + std::to_string(path.size()) + " sites, time grid needs " +
                                             std::to_string(grid.k() + 1));
  }
  double s = 0.0;
  for (int i = 1; i <= grid.k(); ++i) s += step_action(path[i - 1], path[i], i, grid, lag);
  return s;
}

double discretized_action(const LatticePath& path, const TimeGrid& grid, const LagrangianSpec& lag) {
  return discretized_action(path.sites(), grid, lag);
}

double winding_of(double action, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonpositiveUnit, "unit h must be positive");
  return action / h;
}

double transition_ratio(const WaveSample& prev, const WaveSample& next) {
  const double p_prev = born_probability(phase_from_count(prev));
  if (p_prev == 0.0) throw Error(ErrorCode::ZeroDenominator, "conditioning on a zero-probability sample");
  return born_probability(phase_from_count(next)) / p_prev;
}

double path_probability_product(std::span<const WaveSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample sequence");
  double product = 1.0;
  for (std::size_t i = 1; i < samples.size(); ++i) product *= transition_ratio(samples[i - 1], samples[i]);
  return product;
}

PathAmplitude path_amplitude(const LatticePath& path, const TimeGrid& grid, const LagrangianSpec& lag, double h,
                             double modulus_ratio) {
  const double m = winding_of(discretized_action(path, grid, lag), h);
  return {m, modulus_ratio, Amplitude(modulus_ratio * unit_phase(m))};
}

void write_path_csv(std::ostream& out, const LatticePath& path, const TimeGrid& grid) {
  if (path.size() != static_cast<std::size_t>(grid.k()) + 1) {
    throw Error(ErrorCode::GridMismatch, "path and time grid disagree in length");
  }
  out << "t,r\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(grid.time(static_cast<int>(i))) << ',' << format_double(path[i]) << '\n';
  }
}

LatticePath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,r") throw Error(ErrorCode::InvalidArgument, "missing t,r header");
  std::vector<double> r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::InvalidArgument, "malformed path row: " + line);
    r.push_back(std::stod(line.substr(comma + 1)));
  }
  return LatticePath(std::move(r));
}

}  // namespace cardpath
