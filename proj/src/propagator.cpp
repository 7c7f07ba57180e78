#include "cardpath/propagator.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "cardpath/error.hpp"

namespace cardpath {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kEnumerationLimit = 1e7;
constexpr std::size_t kEnumerationBlock = 4096;
constexpr std::size_t kMonteCarloChunks = 64;

// cos(pi * m / period) with m reduced exactly modulo 2 * period.
double cos_pi_ratio(std::size_t m, std::size_t period) {
  const std::size_t r = m % (2 * period);
  return std::cos(kPi * static_cast<double>(r) / static_cast<double>(period));
}

// Sine-basis sum h(m) = 1/(N+1) sum_n c_n cos(n pi m / (N+1)), m = 0..2N.
std::vector<Complex> sine_basis_table(std::span<const Complex> coefficients) {
  const std::size_t n_sites = coefficients.size();
  const std::size_t period = n_sites + 1;
  std::vector<Complex> table(2 * n_sites + 1);
  for (std::size_t m = 0; m < table.size(); ++m) {
    table[m] = pairwise_sum<Complex>(n_sites, [&](std::size_t n) {
                 return coefficients[n] * cos_pi_ratio((n + 1) * m, period);
               }) /
               static_cast<double>(period);
  }
  return table;
}

// Wavenumbers n pi / L of the hard-wall box whose walls sit one spacing
// beyond the outermost sites.
std::vector<double> box_wavenumbers(const SpaceGrid& space) {
  const std::size_t n_sites = space.sites();
  const double box = static_cast<double>(n_sites + 1) * space.dx();
  std::vector<double> k(n_sites);
  for (std::size_t n = 0; n < n_sites; ++n) k[n] = static_cast<double>(n + 1) * kPi / box;
  return k;
}

std::size_t checked_path_count(std::size_t sites, int interior, double limit) {
  double count = 1.0;
  for (int i = 0; i < interior; ++i) {
    count *= static_cast<double>(sites);
    if (count > limit) {
      throw Error(ErrorCode::TooLarge, "sites^(k-1) exceeds " + format_double(limit));
    }
  }
  return static_cast<std::size_t>(count);
}

PropagatorResult make_result(const PropagatorConfig& cfg, Method method, Complex value) {
  PropagatorResult r;
  r.value = Amplitude(value);
  r.method = method;
  r.k = cfg.grid.k();
  r.sites = cfg.space.sites();
  r.norm_per_step = Amplitude(norm_per_step(cfg));
  r.snapped_a = cfg.snapped_a();
  r.snapped_b = cfg.snapped_b();
  r.snap_distance_a = std::abs(r.snapped_a - cfg.a);
  r.snap_distance_b = std::abs(r.snapped_b - cfg.b);
  return r;
}

double normal_deviate(std::mt19937_64& engine) {
  // Box-Muller on explicit 53-bit uniforms: identical on every platform.
  const double u1 = 1.0 - unit_interval(engine());
  const double u2 = unit_interval(engine());
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace

void PropagatorConfig::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw Error(ErrorCode::NonpositiveUnit, "hbar must be positive");
  lag.validate();
  (void)site_a();
  (void)site_b();
  if (source_filter && (!(source_filter->cutoff > 0.0) || !(source_filter->width > 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "source filter needs positive cutoff and width");
  }
}

PropagatorConfig recipe_config(LagrangianSpec lag, double hbar, double duration, double a, double b) {
  lag.validate();
  if (!(hbar > 0.0)) throw Error(ErrorCode::NonpositiveUnit, "hbar must be positive");
  const double half_width = Recipe::half_width_factor * std::sqrt(hbar * duration / lag.mass);
  PropagatorConfig cfg{TimeGrid(0.0, duration, Recipe::steps),
                       SpaceGrid::centered(0.5 * (a + b), half_width, Recipe::sites),
                       std::move(lag),
                       hbar,
                       a,
                       b,
                       StepRule::band_limited,
                       MomentumFilter{}};
  cfg.validate();
  return cfg;
}

Complex norm_per_step(const PropagatorConfig& cfg) {
  return std::sqrt(Complex(cfg.lag.mass, 0.0) / (Complex(0.0, kTwoPi) * cfg.hbar * cfg.grid.epsilon()));
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::enumeration: return "enumeration";
    case Method::transfer_matrix: return "transfer_matrix";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

const char* to_string(StepRule rule) noexcept {
  switch (rule) {
    case StepRule::sampled: return "sampled";
    case StepRule::band_limited: return "band_limited";
  }
  return "unknown";
}

TransferMatrix::TransferMatrix(const PropagatorConfig& cfg, TransferOptions options)
    : cfg_(cfg), options_(options), norm_(norm_per_step(cfg)) {
  cfg_.validate();
  if (options_.phase_free && cfg_.rule != StepRule::sampled) {
    throw Error(ErrorCode::InvalidArgument, "phase-free weights are defined for the sampled rule only");
  }
  const std::size_t n = sites();
  if (cfg_.rule == StepRule::band_limited) {
    const auto k = box_wavenumbers(cfg_.space);
    std::vector<Complex> phases(n);
    const double scale = cfg_.grid.epsilon() * cfg_.hbar / (2.0 * cfg_.lag.mass);
    for (std::size_t i = 0; i < n; ++i) phases[i] = std::polar(1.0, -scale * k[i] * k[i]);
    kinetic_ = sine_basis_table(phases);
  }
  if (!cfg_.lag.time_dependent) {
    cached_.resize(n * n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t to = begin; to < end; ++to) {
        for (std::size_t from = 0; from < n; ++from) cached_[to * n + from] = compute_weight(1, to, from);
      }
    });
  }
}

Complex TransferMatrix::compute_weight(int step, std::size_t to, std::size_t from) const {
  const auto& space = cfg_.space;
  const double x_to = space.position(to);
  const double x_from = space.position(from);
  if (cfg_.rule == StepRule::sampled) {
    if (options_.phase_free) return norm_ * space.dx();
    const double s = step_action(x_from, x_to, step, cfg_.grid, cfg_.lag);
    if (!std::isfinite(s)) return {0.0, 0.0};
    return norm_ * space.dx() * std::polar(1.0, s / cfg_.hbar);
  }
  const double v = cfg_.lag.potential(0.5 * (x_from + x_to), cfg_.grid.midpoint_time(step));
  if (!std::isfinite(v)) return {0.0, 0.0};
  const std::size_t diff = to > from ? to - from : from - to;
  const Complex free = kinetic_[diff] - kinetic_[to + from + 2];
  return free * std::polar(1.0, -cfg_.grid.epsilon() * v / cfg_.hbar);
}

Complex TransferMatrix::weight(int step, std::size_t to, std::size_t from) const {
  if (!cached_.empty()) return cached_[to * sites() + from];
  return compute_weight(step, to, from);
}

void TransferMatrix::apply(int step, std::span<const Complex> in, std::span<Complex> out) const {
  const std::size_t n = sites();
  if (in.size() != n || out.size() != n) throw Error(ErrorCode::GridMismatch, "vector length differs from grid");
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t to = begin; to < end; ++to) {
      out[to] = pairwise_sum<Complex>(n, [&](std::size_t from) { return weight(step, to, from) * in[from]; });
    }
  });
}

void TransferMatrix::apply_transpose(int step, std::span<const Complex> in, std::span<Complex> out) const {
  const std::size_t n = sites();
  if (in.size() != n || out.size() != n) throw Error(ErrorCode::GridMismatch, "vector length differs from grid");
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t from = begin; from < end; ++from) {
      out[from] = pairwise_sum<Complex>(n, [&](std::size_t to) { return weight(step, to, from) * in[to]; });
    }
  });
}

std::vector<Complex> TransferMatrix::point_source(std::size_t site) const {
  const std::size_t n = sites();
  if (site >= n) throw Error(ErrorCode::GridMismatch, "source site outside grid");
  const double dx = cfg_.space.dx();
  std::vector<Complex> psi(n, Complex{});
  if (!cfg_.source_filter) {
    psi[site] = 1.0 / dx;
    return psi;
  }
  const auto k = box_wavenumbers(cfg_.space);
  const double k_scale = std::sqrt(cfg_.lag.mass / (cfg_.hbar * cfg_.grid.duration()));
  std::vector<Complex> filter(n);
  for (std::size_t i = 0; i < n; ++i) {
    filter[i] = 0.5 * std::erfc((k[i] / k_scale - cfg_.source_filter->cutoff) / cfg_.source_filter->width);
  }
  const auto h = sine_basis_table(filter);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t diff = j > site ? j - site : site - j;
    psi[j] = (h[diff] - h[j + site + 2]) / dx;
  }
  return psi;
}

std::vector<Complex> propagate_vector(const TransferMatrix& tm, std::vector<Complex> psi, int first_step,
                                      int last_step) {
  std::vector<Complex> next(psi.size());
  for (int step = first_step; step <= last_step; ++step) {
    tm.apply(step, psi, next);
    psi.swap(next);
  }
  return psi;
}

std::vector<Complex> kernel_to_endpoint(const TransferMatrix& tm, std::size_t site_b, int from_slice) {
  const std::size_t n = tm.sites();
  if (site_b >= n) throw Error(ErrorCode::GridMismatch, "endpoint outside grid");
  std::vector<Complex> row(n, Complex{});
  row[site_b] = 1.0;
  std::vector<Complex> next(n);
  for (int step = tm.steps(); step > from_slice; --step) {
    tm.apply_transpose(step, row, next);
    row.swap(next);
  }
  const double dx = tm.config().space.dx();
  for (auto& v : row) v /= dx;
  return row;
}

std::vector<Complex> transfer_matrix_slice(const PropagatorConfig& cfg) {
  const TransferMatrix tm(cfg);
  return propagate_vector(tm, tm.point_source(cfg.site_a()), 1, cfg.grid.k());
}

PropagatorResult propagate_enumerate(const PropagatorConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  if (cfg.source_filter) {
    throw Error(ErrorCode::InvalidArgument, "enumeration pins both endpoints; drop the source filter");
  }
  const int k = cfg.grid.k();
  const std::size_t n = cfg.space.sites();
  const std::size_t paths = checked_path_count(n, k - 1, kEnumerationLimit);
  const std::size_t ia = cfg.site_a();
  const std::size_t ib = cfg.site_b();
  const double dx = cfg.space.dx();
  const Complex norm = norm_per_step(cfg);
  const Complex measure = std::pow(norm, k) * std::pow(dx, k - 1);

  std::optional<TransferMatrix> tm;
  if (cfg.rule == StepRule::band_limited) tm.emplace(cfg);

  auto path_weight = [&](std::size_t index, std::vector<std::size_t>& digits, std::vector<double>& r) -> Complex {
    digits[0] = ia;
    digits[k] = ib;
    for (int i = 1; i < k; ++i) {
      digits[i] = index % n;
      index /= n;
    }
    if (tm) {
      Complex w = 1.0 / dx;
      for (int i = 1; i <= k; ++i) w *= tm->weight(i, digits[i], digits[i - 1]);
      return w;
    }
    for (int i = 0; i <= k; ++i) r[i] = cfg.space.position(digits[i]);
    const double s = discretized_action(r, cfg.grid, cfg.lag);
    if (!std::isfinite(s)) return {0.0, 0.0};
    return measure * std::polar(1.0, s / cfg.hbar);
  };

  const std::size_t blocks = (paths + kEnumerationBlock - 1) / kEnumerationBlock;
  std::vector<Complex> block_sums(blocks);
  parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> digits(static_cast<std::size_t>(k) + 1);
    std::vector<double> r(static_cast<std::size_t>(k) + 1);
    for (std::size_t bi = begin; bi < end; ++bi) {
      const std::size_t first = bi * kEnumerationBlock;
      const std::size_t last = std::min(paths, first + kEnumerationBlock);
      block_sums[bi] =
          pairwise_sum<Complex>(first, last, [&](std::size_t index) { return path_weight(index, digits, r); });
    }
  });
  const Complex total = pairwise_sum<Complex>(blocks, [&](std::size_t i) { return block_sums[i]; });

  auto result = make_result(cfg, Method::enumeration, total);
  result.runtime_ms = elapsed_ms(start);
  return result;
}

PropagatorResult propagate_transfer_matrix(const PropagatorConfig& cfg) {
  const auto start = Clock::now();
  const TransferMatrix tm(cfg);
  const auto psi = propagate_vector(tm, tm.point_source(cfg.site_a()), 1, cfg.grid.k());
  auto result = make_result(cfg, Method::transfer_matrix, psi[cfg.site_b()]);
  result.runtime_ms = elapsed_ms(start);
  return result;
}

PropagatorResult propagate_monte_carlo_euclidean(const PropagatorConfig& cfg, std::size_t samples,
                                                 std::uint64_t seed, EuclideanOptions options) {
  const auto start = Clock::now();
  cfg.validate();
  if (samples < 100) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least 100 samples");
  if (!(options.proposal_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "proposal_scale must be positive");

  const int k = cfg.grid.k();
  const double eps = cfg.grid.epsilon();
  const double duration = cfg.grid.duration();
  const double m = cfg.lag.mass;
  const double hbar = cfg.hbar;
  for (int i = 1; i <= k; ++i) {
    for (std::size_t j = 0; j < cfg.space.sites(); ++j) {
      const double v = cfg.lag.potential(cfg.space.position(j), cfg.grid.midpoint_time(i));
      if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
        throw Error(ErrorCode::UnboundedPotential, "potential is not bounded below on the space grid");
      }
    }
  }

  const double a = cfg.snapped_a();
  const double b = cfg.snapped_b();
  const double s2 = options.proposal_scale * options.proposal_scale;
  // log of the Gaussian transition density with diffusion d over time tau.
  auto log_gauss = [m](double x, double diffusion, double tau) {
    return 0.5 * std::log(m / (kTwoPi * diffusion * tau)) - m * x * x / (2.0 * diffusion * tau);
  };
  const double log_endpoint = log_gauss(b - a, s2 * hbar, duration);

  std::vector<double> weights(samples);
  parallel_for(kMonteCarloChunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      std::mt19937_64 engine(mix_seed(seed, c));
      const std::size_t first = c * samples / kMonteCarloChunks;
      const std::size_t last = (c + 1) * samples / kMonteCarloChunks;
      for (std::size_t s = first; s < last; ++s) {
        double prev = a;
        double log_ratio = 0.0;
        double potential_sum = 0.0;
        for (int i = 1; i <= k; ++i) {
          double next = b;
          if (i < k) {
            const double remaining = static_cast<double>(k - i + 1) * eps;
            const double mean = prev + (b - prev) * eps / remaining;
            const double var = s2 * hbar / m * eps * (remaining - eps) / remaining;
            next = mean + std::sqrt(var) * normal_deviate(engine);
          }
          const double dr = next - prev;
          log_ratio += log_gauss(dr, hbar, eps) - log_gauss(dr, s2 * hbar, eps);
          potential_sum += cfg.lag.potential(0.5 * (prev + next), cfg.grid.midpoint_time(i));
          prev = next;
        }
        weights[s] = std::exp(log_ratio + log_endpoint - eps * potential_sum / hbar);
      }
    }
  });

  const double n = static_cast<double>(samples);
  const double mean = pairwise_sum<double>(samples, [&](std::size_t i) { return weights[i]; }) / n;
  const double ss = pairwise_sum<double>(samples, [&](std::size_t i) {
    const double d = weights[i] - mean;
    return d * d;
  });
  auto result = make_result(cfg, Method::monte_carlo, Complex(mean, 0.0));
  result.norm_per_step = Amplitude(std::sqrt(m / (kTwoPi * hbar * eps)), 0.0);
  result.standard_error = std::sqrt(ss / (n - 1.0) / n);
  result.runtime_ms = elapsed_ms(start);
  return result;
}

Amplitude compose(std::span<const Complex> k_ca, std::span<const Complex> k_bc, const SpaceGrid& space) {
  if (k_ca.size() != space.sites() || k_bc.size() != space.sites()) {
    throw Error(ErrorCode::GridMismatch, "kernels must live on the shared intermediate grid");
  }
  const Complex sum = pairwise_sum<Complex>(space.sites(), [&](std::size_t c) { return k_bc[c] * k_ca[c]; });
  return Amplitude(sum * space.dx());
}

std::vector<Complex> gaussian_packet(const SpaceGrid& space, double center, double width, double momentum,
                                     double hbar) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "packet width must be positive");
  std::vector<Complex> psi(space.sites());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double x = space.position(j) - center;
    psi[j] = std::exp(-x * x / (4.0 * width * width)) * std::polar(1.0, momentum * x / hbar);
  }
  const double norm = std::sqrt(grid_norm(psi, space));
  for (auto& v : psi) v /= norm;
  return psi;
}

double grid_norm(std::span<const Complex> psi, const SpaceGrid& space) {
  return pairwise_sum<double>(psi.size(), [&](std::size_t j) { return std::norm(psi[j]); }) * space.dx();
}

}  // namespace cardpath
