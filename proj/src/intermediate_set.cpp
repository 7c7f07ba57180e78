#include "cardpath/intermediate_set.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "cardpath/error.hpp"
#include "cardpath/numeric.hpp"

namespace cardpath {

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                            0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                              0.1012285362903763};

template <class F>
double gauss_legendre(const F& f, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    acc += kGlWeights[i] * (f(mid - half * kGlNodes[i]) + f(mid + half * kGlNodes[i]));
  }
  return acc * half;
}

constexpr std::size_t kPanels = 4096;
constexpr double kUnitMassTolerance = 1e-9;

}  // namespace

struct MappingDistribution::Table {
  std::vector<double> cdf;  // cdf[i] = mass of [lo, lo + i*width]
  double width = 0.0;
};

IntermediatePoint::IntermediatePoint(double countable) : countable_(countable) {
  if (!std::isfinite(countable)) {
    throw Error(ErrorCode::InvalidArgument, "countable coordinate must be finite");
  }
}

MappingDistribution::MappingDistribution(Kind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

MappingDistribution MappingDistribution::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw Error(ErrorCode::InvalidDistribution, "uniform support needs finite lo < hi");
  }
  MappingDistribution d(Kind::Uniform, lo, hi);
  const double height = 1.0 / (hi - lo);
  d.density_ = [height](double) { return height; };
  return d;
}

MappingDistribution MappingDistribution::point_mass(double at) {
  if (!std::isfinite(at)) throw Error(ErrorCode::InvalidDistribution, "point mass location must be finite");
  return MappingDistribution(Kind::PointMass, at, at);
}

MappingDistribution MappingDistribution::from_density(double lo, double hi, std::function<double(double)> density) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo) || !density) {
    throw Error(ErrorCode::InvalidDistribution, "density needs finite lo < hi and a callable");
  }
  auto table = std::make_shared<Table>();
  table->width = (hi - lo) / static_cast<double>(kPanels);
  table->cdf.assign(kPanels + 1, 0.0);
  auto checked = [&density](double r) {
    const double p = density(r);
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::InvalidDistribution, "density must be finite and nonnegative");
    }
    return p;
  };
  for (std::size_t i = 0; i < kPanels; ++i) {
    const double a = lo + static_cast<double>(i) * table->width;
    table->cdf[i + 1] = table->cdf[i] + gauss_legendre(checked, a, a + table->width);
  }
  const double mass = table->cdf.back();
  if (std::abs(mass - 1.0) > kUnitMassTolerance) {
    throw Error(ErrorCode::InvalidDistribution,
                "density integrates to " + format_double(mass) + ", expected 1");
  }
  MappingDistribution d(Kind::Tabulated, lo, hi);
  d.density_ = std::move(density);
  d.table_ = std::move(table);
  return d;
}

double MappingDistribution::density(double r) const {
  if (kind_ == Kind::PointMass) throw Error(ErrorCode::InvalidDistribution, "point mass has no density");
  if (r < lo_ || r > hi_) return 0.0;
  return density_(r);
}

double MappingDistribution::quantile(double u) const {
  switch (kind_) {
    case Kind::PointMass:
      return lo_;
    case Kind::Uniform:
      return lo_ + u * (hi_ - lo_);
    case Kind::Tabulated:
      break;
  }
  const auto& cdf = table_->cdf;
  const double target = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  const std::size_t panel = std::min<std::size_t>(kPanels - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                                                   0, (it - cdf.begin()) - 1)));
  const double a = lo_ + static_cast<double>(panel) * table_->width;
  const double need = target - cdf[panel];
  // Bisection on the within-panel partial mass.
  double left = a;
  double right = a + table_->width;
  for (int iter = 0; iter < 60; ++iter) {
    const double m = 0.5 * (left + right);
    if (gauss_legendre(density_, a, m) < need) {
      left = m;
    } else {
      right = m;
    }
  }
  return 0.5 * (left + right);
}

IntermediatePoint realize_mapping(const IntermediatePoint& point, const MappingDistribution& dist,
                                  std::uint64_t seed, std::optional<double> at_time) {
  if (point.realized()) throw Error(ErrorCode::AlreadyRealized, "point already carries an image");
  std::mt19937_64 engine(mix_seed(seed, std::bit_cast<std::uint64_t>(point.countable())));
  IntermediatePoint out = point;
  out.image_ = dist.quantile(unit_interval(engine()));
  out.realized_at_ = at_time;
  return out;
}

std::int64_t unit_set_of(const IntermediatePoint& point) noexcept {
  return static_cast<std::int64_t>(std::floor(point.countable()));
}

std::vector<UnitSet> partition_into_unit_sets(std::span<const IntermediatePoint> population) {
  std::map<std::int64_t, std::vector<IntermediatePoint>> groups;
  for (const auto& p : population) groups[unit_set_of(p)].push_back(p);
  std::vector<UnitSet> out;
  out.reserve(groups.size());
  for (auto& [index, members] : groups) out.push_back(UnitSet{index, std::move(members)});
  return out;
}

}  // namespace cardpath
