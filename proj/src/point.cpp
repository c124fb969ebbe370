#include "heis/point.hpp"

#include <algorithm>
#include <cmath>

namespace heis {

namespace {

void require_same_dim(const HPoint& a, const HPoint& b) {
  if (a.size() != b.size()) {
    throw DimensionError("points belong to different Heisenberg groups: n=" + std::to_string(a.n()) +
                         " vs n=" + std::to_string(b.n()));
  }
}

}  // namespace

HPoint::HPoint(int n) {
  if (n < 1) throw std::invalid_argument("Heisenberg dimension n must be >= 1");
  coords_.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
}

HPoint HPoint::from_coords(std::vector<double> coords) {
  if (coords.size() < 3 || coords.size() % 2 == 0) {
    throw DimensionError("a point of H^n needs 2n+1 coordinates, got " + std::to_string(coords.size()));
  }
  for (double c : coords) {
    if (!std::isfinite(c)) throw std::invalid_argument("point coordinates must be finite");
  }
  HPoint p(static_cast<int>(coords.size() / 2));
  p.coords_ = std::move(coords);
  return p;
}

HPoint HPoint::h1(double xi, double eta, double t) { return from_coords({xi, eta, t}); }

double HPoint::horizontal_norm_sq() const {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < coords_.size(); ++k) acc += coords_[k] * coords_[k];
  return acc;
}

bool HPoint::is_central() const {
  return std::all_of(coords_.begin(), coords_.end() - 1, [](double c) { return c == 0.0; });
}

bool HPoint::is_origin() const {
  return std::all_of(coords_.begin(), coords_.end(), [](double c) { return c == 0.0; });
}

HPoint group_mul(const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  HPoint out(x.n());
  kernel::mul(x.coords().data(), y.coords().data(), out.coords().data(), x.n());
  return out;
}

HPoint group_inv(const HPoint& x) {
  HPoint out(x.n());
  auto src = x.coords();
  auto dst = out.coords();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = -src[k];
  return out;
}

HPoint left_translate(const HPoint& z, const HPoint& x) { return group_mul(z, x); }

HPoint right_translate(const HPoint& z, const HPoint& x) { return group_mul(x, z); }

HPoint dilate(double lambda, const HPoint& x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("dilation factor must be a positive finite number");
  }
  HPoint out = x;
  auto c = out.coords();
  for (std::size_t k = 0; k + 1 < c.size(); ++k) c[k] *= lambda;
  c.back() *= lambda * lambda;
  return out;
}

double coord_distance_inf(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("coordinate vectors differ in length");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

PointCloud::PointCloud(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("Heisenberg dimension n must be >= 1");
}

HPoint PointCloud::point(std::size_t i) const {
  auto row = (*this)[i];
  return HPoint::from_coords(std::vector<double>(row.begin(), row.end()));
}

void PointCloud::push_back(std::span<const double> coords) {
  if (coords.size() != static_cast<std::size_t>(stride())) {
    throw DimensionError("point does not match the cloud dimension n=" + std::to_string(n_));
  }
  data_.insert(data_.end(), coords.begin(), coords.end());
}

void PointCloud::push_back(const HPoint& p) { push_back(p.coords()); }

PointCloud dilate(double lambda, const PointCloud& cloud) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("dilation factor must be a positive finite number");
  }
  PointCloud out = cloud;
  const int s = cloud.stride();
  auto& d = out.data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] *= (static_cast<int>(k % static_cast<std::size_t>(s)) == s - 1) ? lambda * lambda : lambda;
  }
  return out;
}

}  // namespace heis
