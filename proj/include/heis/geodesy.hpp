#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "heis/point.hpp"

namespace heis {

/// Thrown when a geodesic between two points is not unique (the pair differs
/// by a central element, θ = ±2π) and a caller asked for a single one.
class NonUniqueGeodesic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data (χ, θ) of a geodesic leaving the origin.
/// `chi` is interleaved (Re χ₁, Im χ₁, …, Re χₙ, Im χₙ).
struct GeodesicParam {
  std::vector<double> chi;
  double theta = 0.0;

  int n() const { return static_cast<int>(chi.size() / 2); }
  /// |χ|, which is also the length of the geodesic on [0, 1].
  double chi_norm() const;
};

/// The circle of geodesics reaching a central point (0, t): θ = sign(t)·2π and
/// any χ with |χ| = chi_norm.
struct CenterFamily {
  double theta = 0.0;
  double chi_norm = 0.0;
  int n = 1;

  /// Member of the family whose χ points along `direction` (2n reals,
  /// normalized internally). Throws on a zero direction.
  GeodesicParam member(std::span<const double> direction) const;
};

struct InversionResult {
  /// One parameter when unique; for a center family a single representative
  /// (χ along the first ξ axis) so that round trips stay possible.
  std::vector<GeodesicParam> params;
  bool unique = true;
  double distance = 0.0;
  std::optional<CenterFamily> family;
};

/// Γ_s(χ, θ) = γ_{χ,θ}(s). Evaluated as Γ₁(sχ, sθ).
HPoint gamma(double s, const GeodesicParam& p);

/// Γ₁⁻¹(y).
InversionResult gamma_inverse(const HPoint& y);

/// Carnot–Carathéodory distance.
double cc_distance(const HPoint& x, const HPoint& y);

/// |θ(x, y)| ∈ [0, 2π]; 0 when x == y.
double angle(const HPoint& x, const HPoint& y);

/// Point at fraction s along the unique geodesic from x to y.
/// Throws NonUniqueGeodesic when x⁻¹∗y is a nonzero central element.
HPoint midpoint(double s, const HPoint& x, const HPoint& y);

struct MidpointSet {
  PointCloud points;
  std::size_t skipped_pairs = 0;  ///< pairs with θ = ±2π
  double min_angle = 0.0;         ///< min |θ| over all pairs, skipped ones included
};

/// Z_s(A, B) on samples: every pairwise midpoint, sorted lexicographically
/// and deduplicated with an absolute max-norm tolerance.
MidpointSet midpoint_set(double s, const PointCloud& a, const PointCloud& b, double dedup_tol = 1e-12);

/// Sorts lexicographically and merges points within `tol` (max norm). The
/// optional weights are summed on merge.
void canonicalize(PointCloud& cloud, std::vector<double>* weights, double tol);

/// Lebesgue volume of the CC unit ball of H^n (vol B(x, r) = r^{2n+2}·this).
double unit_ball_volume(int n);

/// Largest |t| reached by B(0, 1): 2/π, attained at |ζ| = 2/π. The ball is
/// dimpled at the center, where it only reaches |t| = 1/π.
inline constexpr double kUnitBallHeight = 0.63661977236758134308;

namespace detail {

/// Geodesic inversion reduced to the two invariants |ζ|² and t of a point.
struct RadialInverse {
  double theta = 0.0;    ///< signed, in [−2π, 2π]
  double stretch = 1.0;  ///< |χ| / |ζ| (unused on the center)
  double cos_half = 1.0; ///< cos(θ/2)
  double sin_half = 0.0; ///< sin(θ/2)
  double distance = 0.0;
  bool central = false;  ///< θ = ±2π, non-unique
};

RadialInverse solve_radial(double zeta_sq, double t);

/// m(θ) = (θ − sin θ) / (2 sin²(θ/2)), the ratio t/|ζ|² reached at Γ₁(χ, θ).
double vertical_ratio(double theta);

double distance_raw(const double* x, const double* y, int n);
double angle_raw(const double* x, const double* y, int n);

/// d(x, y) ≤ r, with cheap bounds before the exact inversion.
bool within_distance(const double* x, const double* y, int n, double r);

/// Writes Γ₁(χ, θ) into out (2n+1 values).
void gamma_unit_raw(const double* chi, double theta, double* out, int n);

/// Writes the s-midpoint of (x, y) into out. Returns false, leaving out
/// untouched, when the pair is central. `theta_abs` receives |θ(x, y)|.
bool midpoint_raw(double s, const double* x, const double* y, double* out, int n, double* theta_abs);

}  // namespace detail

}  // namespace heis
