#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heis {

/// Raised when two points (or a point and a cloud) live in different H^n.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point of the Heisenberg group H^n in exponential coordinates.
///
/// Coordinates are stored interleaved as (ξ₁, η₁, …, ξₙ, ηₙ, t) with
/// ζ_j = ξ_j + iη_j. This is also the serialization order.
class HPoint {
 public:
  /// Origin of H^n.
  explicit HPoint(int n = 1);

  /// Builds a point from its 2n+1 coordinates. Throws on even length or
  /// non-finite values.
  static HPoint from_coords(std::vector<double> coords);

  /// Convenience for H¹: ζ = xi + i·eta.
  static HPoint h1(double xi, double eta, double t);

  int n() const { return static_cast<int>(coords_.size() / 2); }
  std::size_t size() const { return coords_.size(); }

  double xi(int j) const { return coords_[2 * j]; }
  double eta(int j) const { return coords_[2 * j + 1]; }
  double t() const { return coords_.back(); }

  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }

  /// |ζ|² = Σ ξ_j² + η_j².
  double horizontal_norm_sq() const;

  /// True when ζ = 0, i.e. the point lies on the center of the group.
  bool is_central() const;

  bool is_origin() const;

  friend bool operator==(const HPoint& a, const HPoint& b) = default;

 private:
  std::vector<double> coords_;
};

// Group law and friends. All throw DimensionError when n differs.

/// (ζ, t) ∗ (ζ', t') = (ζ + ζ', t + t' + 2 Σ Im ζ_j conj(ζ'_j)).
HPoint group_mul(const HPoint& x, const HPoint& y);

/// (ζ, t)⁻¹ = (−ζ, −t).
HPoint group_inv(const HPoint& x);

/// L_z(x) = z ∗ x.
HPoint left_translate(const HPoint& z, const HPoint& x);

/// R_z(x) = x ∗ z.
HPoint right_translate(const HPoint& z, const HPoint& x);

/// δ_λ(ζ, t) = (λζ, λ²t). Throws std::invalid_argument for λ ≤ 0.
HPoint dilate(double lambda, const HPoint& x);

inline HPoint operator*(const HPoint& x, const HPoint& y) { return group_mul(x, y); }

/// Max-norm distance between coordinate vectors (not a group metric).
double coord_distance_inf(std::span<const double> a, std::span<const double> b);

/// Flat storage for many points of the same H^n.
class PointCloud {
 public:
  explicit PointCloud(int n = 1);

  int n() const { return n_; }
  int stride() const { return 2 * n_ + 1; }
  std::size_t size() const { return data_.size() / static_cast<std::size_t>(stride()); }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(stride()), static_cast<std::size_t>(stride())};
  }
  std::span<double> operator[](std::size_t i) {
    return {data_.data() + i * static_cast<std::size_t>(stride()), static_cast<std::size_t>(stride())};
  }

  HPoint point(std::size_t i) const;

  void push_back(std::span<const double> coords);
  void push_back(const HPoint& p);
  void reserve(std::size_t count) { data_.reserve(count * static_cast<std::size_t>(stride())); }
  void resize(std::size_t count) { data_.resize(count * static_cast<std::size_t>(stride()), 0.0); }
  void clear() { data_.clear(); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const PointCloud& a, const PointCloud& b) = default;

 private:
  int n_;
  std::vector<double> data_;
};

PointCloud dilate(double lambda, const PointCloud& cloud);

namespace kernel {

// Raw-coordinate kernels shared by the bulk paths. `n` is the complex dimension.

inline double im_pairing(const double* x, const double* y, int n) {
  // Σ Im(ζ_j conj ζ'_j) = Σ η_j ξ'_j − ξ_j η'_j
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += x[2 * j + 1] * y[2 * j] - x[2 * j] * y[2 * j + 1];
  return acc;
}

inline void mul(const double* x, const double* y, double* out, int n) {
  const double tw = 2.0 * im_pairing(x, y, n);
  for (int k = 0; k < 2 * n; ++k) out[k] = x[k] + y[k];
  out[2 * n] = x[2 * n] + y[2 * n] + tw;
}

/// x⁻¹ ∗ y written to out.
inline void relative(const double* x, const double* y, double* out, int n) {
  const double tw = -2.0 * im_pairing(x, y, n);
  for (int k = 0; k < 2 * n; ++k) out[k] = y[k] - x[k];
  out[2 * n] = (y[2 * n] - x[2 * n]) + tw;
}

/// Only |ζ|² and t of x⁻¹ ∗ y, without materializing the point.
inline void relative_radial(const double* x, const double* y, int n, double& zeta_sq, double& t) {
  double z2 = 0.0;
  for (int k = 0; k < 2 * n; ++k) {
    const double d = y[k] - x[k];
    z2 += d * d;
  }
  zeta_sq = z2;
  t = (y[2 * n] - x[2 * n]) - 2.0 * im_pairing(x, y, n);
}

}  // namespace kernel

}  // namespace heis
