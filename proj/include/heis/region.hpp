#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "heis/point.hpp"

namespace heis {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis box, CC ball, or disjoint union of regions in H^n.
class Region {
 public:
  enum class Kind { box, cc_ball, union_of };

  /// 2n+1 nonempty intervals in coordinate order (ξ₁, η₁, …, t).
  static Region box(std::vector<Interval> intervals);
  /// The unit cube [0, 1]^{2n+1}.
  static Region unit_box(int n = 1);
  static Region cc_ball(HPoint center, double radius);
  /// Members must be pairwise disjoint; boxes are checked exactly, other
  /// combinations by sampling.
  static Region disjoint_union(std::vector<Region> members);

  Kind kind() const { return kind_; }
  int n() const { return n_; }

  const std::vector<Interval>& intervals() const { return intervals_; }
  const HPoint& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Region>& members() const { return members_; }

  bool contains(std::span<const double> p) const;
  bool contains(const HPoint& p) const { return contains(p.coords()); }

  /// Lebesgue volume. Boxes are exact, balls use the quadrature value of the
  /// unit ball scaled by r^{2n+2}.
  double volume() const;

  /// Axis-aligned box containing the region.
  std::vector<Interval> bounding_box() const;

  /// δ_λ applied to the region (boxes stay boxes, balls stay balls).
  Region dilated(double lambda) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  Kind kind_ = Kind::box;
  int n_ = 1;
  std::vector<Interval> intervals_;
  HPoint center_;
  double radius_ = 0.0;
  std::vector<Region> members_;
};

/// N uniform points of `region`, deterministic in (seed, N). Point i depends
/// only on (seed, i), so a prefix of a larger sample equals the smaller one.
/// Balls use rejection from the box [−r, r]^{2n} × [−2r²/π, 2r²/π] around the
/// origin followed by left translation, which preserves Lebesgue measure.
PointCloud sample_uniform(const Region& region, std::size_t count, std::uint64_t seed);

/// Fraction of accepted proposals for CC-ball rejection sampling in H^n.
double ball_acceptance_rate(int n);

}  // namespace heis
