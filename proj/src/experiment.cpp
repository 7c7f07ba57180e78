#include "cardpath/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cardpath/classical_limit.hpp"
#include "cardpath/error.hpp"
#include "cardpath/intermediate_set.hpp"
#include "cardpath/oracles.hpp"
#include "cardpath/propagator.hpp"

namespace cardpath::experiment {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw ValidationError(key + ": expected a finite number, got '" + value + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ValidationError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < -2147483647LL || v > 2147483647LL) throw ValidationError(key + ": integer out of range");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

Kind parse_kind(const std::string& value) {
  if (value == "propagator_convergence") return Kind::propagator_convergence;
  if (value == "interference") return Kind::interference;
  if (value == "concentration_scan") return Kind::concentration_scan;
  if (value == "mapping_demo") return Kind::mapping_demo;
  throw ValidationError("experiment: unknown experiment '" + value + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](auto& c, auto&, auto& v) { c.experiment = parse_kind(v); }},
      {"potential", [](auto& c, auto&, auto& v) { c.potential = v; }},
      {"mass", [](auto& c, auto& k, auto& v) { c.mass = parse_double(k, v); }},
      {"omega", [](auto& c, auto& k, auto& v) { c.omega = parse_double(k, v); }},
      {"force", [](auto& c, auto& k, auto& v) { c.force = parse_double(k, v); }},
      {"duration", [](auto& c, auto& k, auto& v) { c.duration = parse_double(k, v); }},
      {"a", [](auto& c, auto& k, auto& v) { c.a = parse_double(k, v); }},
      {"b", [](auto& c, auto& k, auto& v) { c.b = parse_double(k, v); }},
      {"k", [](auto& c, auto& k, auto& v) { c.k = parse_int(k, v); }},
      {"sites", [](auto& c, auto& k, auto& v) { c.sites = parse_int(k, v); }},
      {"half_width_factor", [](auto& c, auto& k, auto& v) { c.half_width_factor = parse_double(k, v); }},
      {"hbar", [](auto& c, auto& k, auto& v) { c.hbar = parse_double(k, v); }},
      {"hbar_sweep", [](auto& c, auto& k, auto& v) { c.hbar_sweep = parse_list(k, v); }},
      {"delta", [](auto& c, auto& k, auto& v) { c.delta = parse_double(k, v); }},
      {"method", [](auto& c, auto&, auto& v) { c.method = v; }},
      {"step_rule", [](auto& c, auto&, auto& v) { c.step_rule = v; }},
      {"samples", [](auto& c, auto& k, auto& v) { c.samples = parse_int(k, v); }},
      {"proposal_scale", [](auto& c, auto& k, auto& v) { c.proposal_scale = parse_double(k, v); }},
      {"slit_separation", [](auto& c, auto& k, auto& v) { c.slit_separation = parse_double(k, v); }},
      {"points", [](auto& c, auto& k, auto& v) { c.points = parse_int(k, v); }},
      {"distribution", [](auto& c, auto&, auto& v) { c.distribution = v; }},
      {"dist_lo", [](auto& c, auto& k, auto& v) { c.dist_lo = parse_double(k, v); }},
      {"dist_hi", [](auto& c, auto& k, auto& v) { c.dist_hi = parse_double(k, v); }},
      {"dist_at", [](auto& c, auto& k, auto& v) { c.dist_at = parse_double(k, v); }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         const long long s = parse_integer(k, v);
         if (s < 0) throw ValidationError("seed: must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output_path", [](auto& c, auto&, auto& v) { c.output_path = v; }},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

bool fixed_timing() {
  const char* env = std::getenv("CARDPATH_FIXED_TIMING");
  return env != nullptr && std::string(env) == "1";
}

double timing(double ms) { return fixed_timing() ? 0.0 : ms; }

LagrangianSpec make_lagrangian(const ExperimentConfig& cfg) {
  if (cfg.potential == "harmonic") return LagrangianSpec::harmonic(cfg.mass, cfg.omega);
  if (cfg.potential == "linear") return LagrangianSpec::linear(cfg.mass, cfg.force);
  return LagrangianSpec::free_particle(cfg.mass);
}

PropagatorConfig make_propagator_config(const ExperimentConfig& cfg, double hbar, double center,
                                        double extra_half_width = 0.0) {
  const double half_width = cfg.half_width_factor * std::sqrt(hbar * cfg.duration / cfg.mass) + extra_half_width;
  PropagatorConfig pc{TimeGrid(0.0, cfg.duration, cfg.k),
                      SpaceGrid::centered(center, half_width, static_cast<std::size_t>(cfg.sites)),
                      make_lagrangian(cfg),
                      hbar,
                      cfg.a,
                      cfg.b,
                      cfg.step_rule == "sampled" ? StepRule::sampled : StepRule::band_limited,
                      std::nullopt};
  if (pc.rule == StepRule::band_limited) pc.source_filter = MomentumFilter{};
  return pc;
}

Json config_json(const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = to_string(cfg.experiment);
  j["potential"] = cfg.potential;
  j["mass"] = cfg.mass;
  j["omega"] = cfg.omega;
  j["force"] = cfg.force;
  j["duration"] = cfg.duration;
  j["a"] = cfg.a;
  j["b"] = cfg.b;
  j["k"] = cfg.k;
  j["sites"] = cfg.sites;
  j["half_width_factor"] = cfg.half_width_factor;
  j["hbar"] = cfg.hbar;
  j["hbar_sweep"] = cfg.hbar_sweep;
  j["delta"] = cfg.delta;
  j["method"] = cfg.method;
  j["step_rule"] = cfg.step_rule;
  j["samples"] = cfg.samples;
  j["proposal_scale"] = cfg.proposal_scale;
  j["slit_separation"] = cfg.slit_separation;
  j["points"] = cfg.points;
  j["distribution"] = cfg.distribution;
  j["dist_lo"] = cfg.dist_lo;
  j["dist_hi"] = cfg.dist_hi;
  j["dist_at"] = cfg.dist_at;
  j["seed"] = cfg.seed;
  j["output_path"] = cfg.stem();
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("output: cannot write " + path.string());
  out << text;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += format_double(v);
    first = false;
  }
  row += '\n';
  return row;
}

RunOutput run_propagator(const ExperimentConfig& cfg, const fs::path& dir) {
  auto pc = make_propagator_config(cfg, cfg.hbar, 0.5 * (cfg.a + cfg.b));
  PropagatorResult result;
  std::string csv = "x,re,im,probability\n";
  if (cfg.method == "transfer_matrix") {
    result = propagate_transfer_matrix(pc);
    const auto slice = transfer_matrix_slice(pc);
    for (std::size_t j = 0; j < slice.size(); ++j) {
      csv += csv_row({pc.space.position(j), slice[j].real(), slice[j].imag(), std::norm(slice[j])});
    }
  } else {
    if (cfg.method == "enumeration") {
      pc.source_filter.reset();
      result = propagate_enumerate(pc);
    } else {
      result = propagate_monte_carlo_euclidean(pc, static_cast<std::size_t>(cfg.samples), cfg.seed,
                                               EuclideanOptions{cfg.proposal_scale});
    }
    csv += csv_row({result.snapped_b, result.value.re(), result.value.im(), result.probability()});
  }

  Json record;
  record["method"] = to_string(result.method);
  record["k"] = result.k;
  record["sites"] = result.sites;
  record["re"] = result.value.re();
  record["im"] = result.value.im();
  if (result.standard_error) record["stderr"] = *result.standard_error;
  record["runtime_ms"] = timing(result.runtime_ms);
  record["probability"] = result.probability();
  record["step_rule"] = to_string(pc.rule);
  record["norm_per_step"] = {result.norm_per_step.re(), result.norm_per_step.im()};
  record["snapped_a"] = result.snapped_a;
  record["snapped_b"] = result.snapped_b;
  record["snap_distance_a"] = result.snap_distance_a;
  record["snap_distance_b"] = result.snap_distance_b;

  std::optional<oracles::AnalyticKernel> kernel;
  if (cfg.method == "monte_carlo") {
    if (cfg.potential == "free") kernel = oracles::AnalyticKernel{oracles::KernelFamily::euclidean_free, cfg.mass, 0.0,
                                                                  cfg.hbar, cfg.duration};
  } else if (cfg.potential == "free") {
    kernel = oracles::AnalyticKernel{oracles::KernelFamily::free, cfg.mass, 0.0, cfg.hbar, cfg.duration};
  } else if (cfg.potential == "harmonic") {
    kernel = oracles::AnalyticKernel{oracles::KernelFamily::harmonic, cfg.mass, cfg.omega, cfg.hbar, cfg.duration};
  }
  std::string oracle_note = "no closed form for this potential";
  if (kernel) {
    const auto exact = oracles::analytic_propagator(*kernel, result.snapped_a, result.snapped_b);
    const double rel = std::abs(result.value.complex() - exact.complex()) / exact.modulus();
    record["oracle"] = {{"re", exact.re()}, {"im", exact.im()}, {"relative_error", rel}};
    oracle_note = "relative error " + format_double(rel) + " vs closed form";
  }
  record["config"] = config_json(cfg);

  const auto json_path = dir / (cfg.stem() + ".json");
  const auto csv_path = dir / (cfg.stem() + ".csv");
  write_text(json_path, record.dump(2) + "\n");
  write_text(csv_path, csv);
  std::ostringstream summary;
  summary << "propagator_convergence: K = " << format_double(result.value.re()) << " + "
          << format_double(result.value.im()) << "i (" << to_string(result.method) << ", k=" << result.k
          << ", sites=" << result.sites << "), " << oracle_note;
  return {{json_path, csv_path}, summary.str()};
}

RunOutput run_interference(const ExperimentConfig& cfg, const fs::path& dir) {
  const double center = cfg.a;
  const double d = cfg.slit_separation;
  // Observation points sit up to d from the far slit, so the pass band is
  // widened by d and the walls are pushed out to keep reflections away.
  auto pc = make_propagator_config(cfg, cfg.hbar, center, 1.5 * d);
  if (pc.source_filter) {
    pc.source_filter->cutoff += d / std::sqrt(cfg.hbar * cfg.duration / cfg.mass);
  }

  pc.a = center - d / 2.0;
  pc.b = pc.a;
  const auto upper = transfer_matrix_slice(pc);
  pc.a = center + d / 2.0;
  pc.b = pc.a;
  const auto lower = transfer_matrix_slice(pc);
  const auto& space = pc.space;

  std::vector<double> intensity(space.sites());
  std::string csv = "x,intensity,re,im\n";
  for (std::size_t j = 0; j < space.sites(); ++j) {
    const Complex psi = upper[j] + lower[j];
    intensity[j] = std::norm(psi);
    csv += csv_row({space.position(j), intensity[j], psi.real(), psi.imag()});
  }

  // Fringe maxima between the slits, refined by a parabola.
  const double window = d / 2.0;
  std::vector<double> peaks;
  for (std::size_t j = 1; j + 1 < space.sites(); ++j) {
    const double x = space.position(j);
    if (std::abs(x - center) > window) continue;
    if (intensity[j] > intensity[j - 1] && intensity[j] >= intensity[j + 1]) {
      const double denom = intensity[j - 1] - 2.0 * intensity[j] + intensity[j + 1];
      const double shift = denom != 0.0 ? 0.5 * (intensity[j - 1] - intensity[j + 1]) / denom : 0.0;
      peaks.push_back(x + shift * space.dx());
    }
  }
  require(peaks.size() >= 2, "slit_separation: fewer than two fringes fit in the central window");
  const double measured = (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
  const double predicted = kTwoPi * cfg.hbar * cfg.duration / (cfg.mass * d);
  const double deviation = std::abs(measured - predicted) / predicted;

  Json record;
  record["experiment"] = "interference";
  record["slit_separation"] = d;
  record["fringes"] = peaks.size();
  record["predicted_spacing"] = predicted;
  record["measured_spacing"] = measured;
  record["relative_deviation"] = deviation;
  record["config"] = config_json(cfg);

  const auto json_path = dir / (cfg.stem() + ".json");
  const auto csv_path = dir / (cfg.stem() + ".csv");
  write_text(json_path, record.dump(2) + "\n");
  write_text(csv_path, csv);
  std::ostringstream summary;
  summary << "interference: fringe spacing " << format_double(measured) << " vs predicted "
          << format_double(predicted) << " (deviation " << format_double(deviation) << ")";
  return {{json_path, csv_path}, summary.str()};
}

RunOutput run_concentration(const ExperimentConfig& cfg, const fs::path& dir) {
  const auto pc = make_propagator_config(cfg, cfg.hbar_sweep.front(), 0.5 * (cfg.a + cfg.b));
  const auto scan = concentration_scan(pc, cfg.hbar_sweep, cfg.delta, ScanOptions{cfg.half_width_factor, false});

  std::string csv = "hbar,m_scale,mass_fraction,runtime_ms\n";
  bool monotone = true;
  for (std::size_t i = 0; i < scan.hbar_values.size(); ++i) {
    csv += csv_row({scan.hbar_values[i], scan.m_scale[i], scan.mass_fraction[i], timing(scan.runtime_ms[i])});
    if (i > 0 && scan.mass_fraction[i] < scan.mass_fraction[i - 1] - 1e-3) monotone = false;
  }

  Json record;
  record["experiment"] = "concentration_scan";
  record["delta"] = scan.delta;
  record["hbar"] = scan.hbar_values;
  record["mass_fraction"] = scan.mass_fraction;
  record["endpoint_offset"] = scan.endpoint_offset;
  record["dx"] = scan.dx;
  record["m_scale"] = scan.m_scale;
  record["classical_action"] = scan.classical_action;
  record["monotone"] = monotone;
  std::vector<double> runtimes;
  for (double ms : scan.runtime_ms) runtimes.push_back(timing(ms));
  record["runtime_ms"] = runtimes;
  record["config"] = config_json(cfg);

  const auto json_path = dir / (cfg.stem() + ".json");
  const auto csv_path = dir / (cfg.stem() + ".csv");
  write_text(json_path, record.dump(2) + "\n");
  write_text(csv_path, csv);
  std::ostringstream summary;
  summary << "concentration_scan: mass_fraction " << format_double(scan.mass_fraction.front()) << " -> "
          << format_double(scan.mass_fraction.back()) << " over " << scan.hbar_values.size() << " hbar values ("
          << (monotone ? "nondecreasing" : "NOT monotone") << ")";
  return {{json_path, csv_path}, summary.str()};
}

RunOutput run_mapping(const ExperimentConfig& cfg, const fs::path& dir) {
  const auto dist = cfg.distribution == "point" ? MappingDistribution::point_mass(cfg.dist_at)
                                                : MappingDistribution::uniform(cfg.dist_lo, cfg.dist_hi);
  std::string csv = "n,r\n";
  std::vector<double> images;
  images.reserve(static_cast<std::size_t>(cfg.points));
  for (int i = 0; i < cfg.points; ++i) {
    const auto p = realize_mapping(IntermediatePoint(static_cast<double>(i)), dist, cfg.seed);
    images.push_back(*p.image());
    csv += std::to_string(i) + ',' + format_double(*p.image()) + '\n';
  }

  Json record;
  record["experiment"] = "mapping_demo";
  record["points"] = cfg.points;
  std::string ks_note;
  if (!images.empty() && !dist.degenerate()) {
    const double ks = oracles::ks_statistic_uniform(images, cfg.dist_lo, cfg.dist_hi);
    const double crit = oracles::ks_critical_value_1pct(images.size());
    record["ks_statistic"] = ks;
    record["ks_critical_1pct"] = crit;
    ks_note = ", KS " + format_double(ks) + " (1% critical " + format_double(crit) + ")";
  } else {
    record["ks_statistic"] = nullptr;
  }
  record["config"] = config_json(cfg);

  const auto json_path = dir / (cfg.stem() + ".json");
  const auto csv_path = dir / (cfg.stem() + ".csv");
  write_text(json_path, record.dump(2) + "\n");
  write_text(csv_path, csv);
  return {{json_path, csv_path}, "mapping_demo: " + std::to_string(cfg.points) + " points realized" + ks_note};
}

}  // namespace

const char* to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::propagator_convergence: return "propagator_convergence";
    case Kind::interference: return "interference";
    case Kind::concentration_scan: return "concentration_scan";
    case Kind::mapping_demo: return "mapping_demo";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  require(potential == "free" || potential == "harmonic" || potential == "linear",
          "potential: must be free, harmonic or linear");
  require(mass > 0.0, "mass: must be positive");
  require(omega > 0.0, "omega: must be positive");
  require(duration > 0.0, "duration: must be positive");
  require(k >= 1 && k <= 100000, "k: must lie in [1, 100000]");
  require(sites >= 2 && sites <= 20001, "sites: must lie in [2, 20001]");
  require(half_width_factor > 0.0, "half_width_factor: must be positive");
  require(hbar > 0.0, "hbar: must be positive");
  require(!hbar_sweep.empty(), "hbar_sweep: needs at least one value");
  for (std::size_t i = 0; i < hbar_sweep.size(); ++i) {
    require(hbar_sweep[i] > 0.0, "hbar_sweep: values must be positive");
    require(i == 0 || hbar_sweep[i] < hbar_sweep[i - 1], "hbar_sweep: values must be strictly descending");
  }
  require(delta > 0.0, "delta: must be positive");
  require(method == "transfer_matrix" || method == "enumeration" || method == "monte_carlo",
          "method: must be transfer_matrix, enumeration or monte_carlo");
  require(step_rule == "band_limited" || step_rule == "sampled", "step_rule: must be band_limited or sampled");
  require(samples >= 100 && samples <= 100000000, "samples: must lie in [100, 1e8]");
  require(proposal_scale > 0.0, "proposal_scale: must be positive");
  require(slit_separation > 0.0, "slit_separation: must be positive");
  require(points >= 0 && points <= 10000000, "points: must lie in [0, 1e7]");
  require(distribution == "uniform" || distribution == "point", "distribution: must be uniform or point");
  require(dist_lo < dist_hi, "dist_lo: must be below dist_hi");
  require(potential != "harmonic" || std::abs(std::sin(omega * duration)) > 1e-12,
          "omega: omega*duration sits on a caustic");
}

std::string ExperimentConfig::stem() const { return output_path.empty() ? to_string(experiment) : output_path; }

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, bool> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(key + ": unknown key");
    if (seen[key]) throw ValidationError(key + ": duplicate key");
    seen[key] = true;
    it->second(cfg, key, value);
  }
  if (!seen["experiment"]) throw ValidationError("experiment: required key missing");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  return parse_config(in);
}

std::map<std::string, std::string> describe(const ExperimentConfig& cfg) {
  std::string sweep;
  for (std::size_t i = 0; i < cfg.hbar_sweep.size(); ++i) {
    if (i > 0) sweep += ',';
    sweep += format_double(cfg.hbar_sweep[i]);
  }
  return {
      {"experiment", to_string(cfg.experiment)},
      {"potential", cfg.potential},
      {"mass", format_double(cfg.mass)},
      {"omega", format_double(cfg.omega)},
      {"force", format_double(cfg.force)},
      {"duration", format_double(cfg.duration)},
      {"a", format_double(cfg.a)},
      {"b", format_double(cfg.b)},
      {"k", std::to_string(cfg.k)},
      {"sites", std::to_string(cfg.sites)},
      {"half_width_factor", format_double(cfg.half_width_factor)},
      {"hbar", format_double(cfg.hbar)},
      {"hbar_sweep", sweep},
      {"delta", format_double(cfg.delta)},
      {"method", cfg.method},
      {"step_rule", cfg.step_rule},
      {"samples", std::to_string(cfg.samples)},
      {"proposal_scale", format_double(cfg.proposal_scale)},
      {"slit_separation", format_double(cfg.slit_separation)},
      {"points", std::to_string(cfg.points)},
      {"distribution", cfg.distribution},
      {"dist_lo", format_double(cfg.dist_lo)},
      {"dist_hi", format_double(cfg.dist_hi)},
      {"dist_at", format_double(cfg.dist_at)},
      {"seed", std::to_string(cfg.seed)},
      {"output_path", cfg.stem()},
  };
}

RunOutput run(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ValidationError("out: cannot create " + out_dir.string());
  switch (cfg.experiment) {
    case Kind::propagator_convergence: return run_propagator(cfg, out_dir);
    case Kind::interference: return run_interference(cfg, out_dir);
    case Kind::concentration_scan: return run_concentration(cfg, out_dir);
    case Kind::mapping_demo: return run_mapping(cfg, out_dir);
  }
  throw ValidationError("experiment: unknown");
}

Status execute(const CommandLine& cli, std::ostream& out, std::ostream& err) {
  try {
    auto cfg = load_config(cli.config);
    if (cli.seed) cfg.seed = *cli.seed;
    const auto result = run(cfg, cli.out_dir);
    if (!cli.quiet) out << result.summary << '\n';
    return Status::ok;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return Status::validation_error;
  } catch (const Error& e) {
    err << (e.numerical() ? "numerical failure: " : "validation error: ") << e.what() << '\n';
    return e.numerical() ? Status::numerical_failure : Status::validation_error;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return Status::numerical_failure;
  }
}

}  // namespace cardpath::experiment
