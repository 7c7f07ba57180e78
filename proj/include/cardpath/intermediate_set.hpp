#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace cardpath {

class MappingDistribution;

/// A point with a reliable countable coordinate n and, once a mapping has
/// been performed, a randomly realized continuous image r.
class IntermediatePoint {
 public:
  /// Throws InvalidArgument for non-finite n.
  explicit IntermediatePoint(double countable);

  double countable() const noexcept { return countable_; }
  const std::optional<double>& image() const noexcept { return image_; }
  const std::optional<double>& realized_at() const noexcept { return realized_at_; }
  bool realized() const noexcept { return image_.has_value(); }

 private:
  friend IntermediatePoint realize_mapping(const IntermediatePoint&, const MappingDistribution&,
                                           std::uint64_t, std::optional<double>);

  double countable_;
  std::optional<double> image_;
  std::optional<double> realized_at_;
};

/// Distribution P(r) dr of the image on a support [lo, hi].
class MappingDistribution {
 public:
  static MappingDistribution uniform(double lo, double hi);
  /// Degenerate distribution: every realization lands on `at`.
  static MappingDistribution point_mass(double at);
  /// Caller-supplied density. Throws InvalidDistribution unless it is finite,
  /// nonnegative and integrates to 1 within 1e-9 over [lo, hi].
  static MappingDistribution from_density(double lo, double hi, std::function<double(double)> density);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool degenerate() const noexcept { return kind_ == Kind::PointMass; }

  /// Density at r (zero outside the support). Undefined for a point mass.
  double density(double r) const;
  /// Inverse CDF at u in [0, 1).
  double quantile(double u) const;

 private:
  enum class Kind { Uniform, PointMass, Tabulated };
  struct Table;

  MappingDistribution(Kind kind, double lo, double hi);

  Kind kind_;
  double lo_;
  double hi_;
  std::function<double(double)> density_;
  std::shared_ptr<const Table> table_;
};

/// Draws the image of `point` from `dist`. A pure function of
/// (point, dist, seed): the generator is seeded from seed and the bit pattern
/// of n. Throws AlreadyRealized if the point already has an image.
IntermediatePoint realize_mapping(const IntermediatePoint& point, const MappingDistribution& dist,
                                  std::uint64_t seed, std::optional<double> at_time = std::nullopt);

/// floor(n): points sharing it belong to the same unit set.
std::int64_t unit_set_of(const IntermediatePoint& point) noexcept;

struct UnitSet {
  std::int64_t index = 0;
  std::vector<IntermediatePoint> members;
};

/// Groups a population into disjoint unit sets, ordered by index.
std::vector<UnitSet> partition_into_unit_sets(std::span<const IntermediatePoint> population);

}  // namespace cardpath
