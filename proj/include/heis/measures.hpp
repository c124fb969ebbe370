#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heis/point.hpp"
#include "heis/region.hpp"

namespace heis {

/// Axis-aligned grid anchored at the origin: cell k along a horizontal axis
/// is [k·h_horizontal, (k+1)·h_horizontal), along t it uses h_vertical.
/// Separate vertical spacing lets a grid follow δ_λ (λh, λ²h) exactly.
struct Grid {
  double h_horizontal = 0.1;
  double h_vertical = 0.1;

  static Grid cubic(double h) { return {h, h}; }
  Grid dilated(double lambda) const { return {lambda * h_horizontal, lambda * lambda * h_vertical}; }
  double cell_volume(int n) const;
  double spacing(int axis, int n) const { return axis == 2 * n ? h_vertical : h_horizontal; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Weighted point cloud of unit mass, optionally with density values
/// against Lebesgue (Haar) measure at each point.
struct DiscreteMeasure {
  PointCloud points;
  std::vector<double> weights;
  std::optional<std::vector<double>> density;
  std::optional<Grid> density_grid;  ///< set when density came from a histogram

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int n) : points(n) {}

  int n() const { return points.n(); }
  std::size_t size() const { return points.size(); }

  /// Throws std::invalid_argument unless weights are positive, sum to 1
  /// within 1e−12 and match the point count.
  void validate() const;
};

/// Equal weights on the given points, no density.
DiscreteMeasure empirical_measure(PointCloud points);

/// Uniform sample of A with weights 1/N and exact density 1/vol(A).
DiscreteMeasure normalized_measure(const Region& a, std::size_t count, std::uint64_t seed);

/// Histogram density: ρ̂(x) = mass of the cell of x / cell volume.
DiscreteMeasure estimate_density(const DiscreteMeasure& m, const Grid& grid);
inline DiscreteMeasure estimate_density(const DiscreteMeasure& m, double h) {
  return estimate_density(m, Grid::cubic(h));
}

/// Ent(μ) = −Σ w_i ρ(x_i)^{−1/(2n+1)}. Throws if the density is missing.
double renyi_entropy(const DiscreteMeasure& m);

/// min over sampled pairs of |θ(x, y)|: a sample estimate of Θ_{A,B}.
double theta_deviation(const PointCloud& a, const PointCloud& b);

/// One constant-density piece: a box of the dyadic partition.
struct StepPiece {
  std::vector<Interval> box;
  double level = 0.0;  ///< λ_i = mass / volume
  double mass = 0.0;
};

/// Step measure Σ λ_i L|A_i together with its representation on the input
/// support: each input point keeps its position, carries the share of its
/// piece's mass proportional to w/ρ (uniform within the piece when the
/// input has no density), and gets density λ of its piece.
struct StepMeasure {
  std::vector<StepPiece> pieces;
  DiscreteMeasure on_support;

  double total_mass() const;
};

/// Dyadic partition of K's bounding box: depth d bisects axes cyclically
/// (ξ₁, η₁, …, t, ξ₁, …), giving 2^d boxes. Zero-mass boxes are dropped.
StepMeasure step_approximate(const DiscreteMeasure& m, const Region& k, int depth);

struct VolumeEstimate {
  double volume = 0.0;
  /// Saturation error: |V_extrapolated − V| from a split-half occupancy fit.
  double std_error = 0.0;
  std::size_t occupied_cells = 0;
  bool under_resolved = false;  ///< h > r > 0
  std::string note;
};

/// Occupancy-grid volume of ⋃ B_cc(x_i, r) ∩ bound. A cell counts when it
/// meets some closed ball B_cc(x_i, r) (for r = 0: contains a point) and
/// its center lies in `bound`. Cell–ball intersection is decided exactly by
/// branch and bound over the ball's profile.
VolumeEstimate estimate_volume(const PointCloud& points, double r, const Grid& grid, const Region& bound);
inline VolumeEstimate estimate_volume(const PointCloud& points, double r, double h, const Region& bound) {
  return estimate_volume(points, r, Grid::cubic(h), bound);
}

/// Smallest grid-aligned box containing the points.
Region grid_bounding_box(const PointCloud& points, const Grid& grid);

namespace detail {

/// Height r²·T(ρ/r) of the closed CC ball of radius r above horizontal
/// radius ρ ∈ [0, r].
double ball_profile(double rho, double r);

/// Whether grid cell `cell` meets the closed ball B_cc(x, r).
bool cell_meets_ball(const double* x, int n, double r, const std::int64_t* cell, const Grid& grid);

std::int64_t cell_index(double coord, double h);

}  // namespace detail

}  // namespace heis
