#include "heis/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <numbers>

#include "heis/parallel.hpp"

namespace heis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// |ζ|² < kCenterRatio·|t| is treated as a central element: the inversion is
// ill-conditioned there while the θ = ±2π formula is exact.
constexpr double kCenterRatio = 1e-20;

double sinc(double a) {
  if (std::abs(a) < 1e-4) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
  }
  return std::sin(a) / a;
}

// (a − sin a) / a²
double sine_defect(double a) {
  if (std::abs(a) < 0.1) {
    const double a2 = a * a;
    return a * (1.0 / 6.0 +
                a2 * (-1.0 / 120.0 +
                      a2 * (1.0 / 5040.0 + a2 * (-1.0 / 362880.0 + a2 * (1.0 / 39916800.0 - a2 / 6227020800.0)))));
  }
  return (a - std::sin(a)) / (a * a);
}

double vertical_ratio_derivative(double theta) {
  if (std::abs(theta) < 0.1) {
    const double x2 = theta * theta;
    return 1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (1.0 / 504.0 + x2 * (1.0 / 10800.0 + x2 / 266112.0)));
  }
  const double h = std::sin(0.5 * theta);
  const double denom = 2.0 * h * h;
  return 1.0 - (theta - std::sin(theta)) * std::sin(theta) / (denom * denom);
}

// Root of m(θ) = c on [0, π], c ∈ (0, π/2]. Bracket [2c, 3c] follows from
// θ/3 ≤ m(θ) ≤ θ/2 on [0, π] (m is convex with m(π) = π/2).
double solve_low_branch(double c) {
  double lo = std::min(2.0 * c, kPi);
  double hi = std::min(3.0 * c, kPi);
  const double guess = 3.0 * c - 0.9 * c * c * c;  // inverse series θ ≈ 3c − (3c)³/30
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  const double tol = 1e-14 * c;
  for (int it = 0; it < 200; ++it) {
    const double f = detail::vertical_ratio(x) - c;
    if (std::abs(f) <= tol) break;
    if (f < 0.0) lo = x; else hi = x;
    double next = x - f / vertical_ratio_derivative(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// With θ = 2π − 2w, w ∈ (0, π/2]: G(w) = 2c sin²w − (2π − 2w + sin 2w) is
// increasing and vanishes at the root. Working in w keeps full precision when
// θ is close to 2π.
double solve_high_branch(double c) {
  double lo = 0.0;
  double hi = 0.5 * kPi;
  const double guess = std::sqrt(kPi / c);
  double w = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  const double tol = 1e-14 * kTwoPi;
  for (int it = 0; it < 200; ++it) {
    const double s = std::sin(w);
    const double g = 2.0 * c * s * s - (kTwoPi - 2.0 * w + std::sin(2.0 * w));
    if (std::abs(g) <= tol) break;
    if (g < 0.0) lo = w; else hi = w;
    const double dg = 2.0 * c * std::sin(2.0 * w) + 4.0 * s * s;
    double next = w - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 1e-16 * w) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

void require_same_dim(const HPoint& a, const HPoint& b) {
  if (a.size() != b.size()) throw DimensionError("points belong to different Heisenberg groups");
}

}  // namespace

double GeodesicParam::chi_norm() const {
  double acc = 0.0;
  for (double c : chi) acc += c * c;
  return std::sqrt(acc);
}

GeodesicParam CenterFamily::member(std::span<const double> direction) const {
  if (direction.size() != static_cast<std::size_t>(2 * n)) {
    throw DimensionError("direction must have 2n components");
  }
  double norm = 0.0;
  for (double d : direction) norm += d * d;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw std::invalid_argument("direction must be nonzero");
  GeodesicParam p;
  p.theta = theta;
  p.chi.resize(direction.size());
  for (std::size_t k = 0; k < direction.size(); ++k) p.chi[k] = chi_norm * direction[k] / norm;
  return p;
}

namespace detail {

double vertical_ratio(double theta) {
  if (std::abs(theta) < 0.1) {
    const double x2 = theta * theta;
    return theta * (1.0 / 3.0 +
                    x2 * (1.0 / 90.0 +
                          x2 * (1.0 / 2520.0 + x2 * (1.0 / 75600.0 + x2 * (1.0 / 2395008.0 + x2 * 691.0 / 54486432000.0)))));
  }
  const double h = std::sin(0.5 * theta);
  return (theta - std::sin(theta)) / (2.0 * h * h);
}

RadialInverse solve_radial(double zeta_sq, double t) {
  RadialInverse r;
  if (zeta_sq == 0.0 && t == 0.0) return r;
  const double abs_t = std::abs(t);
  if (zeta_sq < kCenterRatio * abs_t) {
    r.central = true;
    r.theta = t > 0.0 ? kTwoPi : -kTwoPi;
    r.cos_half = -1.0;
    r.sin_half = 0.0;
    r.stretch = 0.0;
    r.distance = std::sqrt(kPi * abs_t);
    return r;
  }
  const double c = abs_t / zeta_sq;
  double theta = 0.0;
  if (c == 0.0) {
    r.stretch = 1.0;
  } else if (c <= 0.5 * kPi) {
    theta = solve_low_branch(c);
    const double half = 0.5 * theta;
    r.stretch = 1.0 / sinc(half);
    r.cos_half = std::cos(half);
    r.sin_half = std::sin(half);
  } else {
    const double w = solve_high_branch(c);
    theta = kTwoPi - 2.0 * w;
    r.stretch = (kPi - w) / std::sin(w);
    r.cos_half = -std::cos(w);
    r.sin_half = std::sin(w);
  }
  if (t < 0.0) {
    theta = -theta;
    r.sin_half = -r.sin_half;
  }
  r.theta = theta;
  r.distance = r.stretch * std::sqrt(zeta_sq);
  return r;
}

double distance_raw(const double* x, const double* y, int n) {
  double z2 = 0.0;
  double t = 0.0;
  kernel::relative_radial(x, y, n, z2, t);
  if (t == 0.0) return std::sqrt(z2);
  return solve_radial(z2, t).distance;
}

double angle_raw(const double* x, const double* y, int n) {
  double z2 = 0.0;
  double t = 0.0;
  kernel::relative_radial(x, y, n, z2, t);
  if (t == 0.0) return 0.0;
  return std::abs(solve_radial(z2, t).theta);
}

bool within_distance(const double* x, const double* y, int n, double r) {
  double z2 = 0.0;
  double t = 0.0;
  kernel::relative_radial(x, y, n, z2, t);
  const double r2 = r * r;
  if (z2 > r2) return false;
  const double abs_t = std::abs(t);
  // d² ≥ (π/2)|t| (the minimum of d²/|t| over geodesics is attained at θ = π)
  if (0.5 * kPi * abs_t > r2) return false;
  // (ζ, t) = (ζ, 0) ∗ (0, t) gives d ≤ |ζ| + √(π|t|)
  if (std::sqrt(z2) + std::sqrt(kPi * abs_t) <= r) return true;
  return solve_radial(z2, t).distance <= r;
}

void gamma_unit_raw(const double* chi, double theta, double* out, int n) {
  const double half = 0.5 * theta;
  const double f = sinc(half);
  const double c = std::cos(half);
  const double s = std::sin(half);
  double chi_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const double re = chi[2 * j];
    const double im = chi[2 * j + 1];
    chi_sq += re * re + im * im;
    // χ · sinc(θ/2) · e^{−iθ/2}
    out[2 * j] = f * (re * c + im * s);
    out[2 * j + 1] = f * (im * c - re * s);
  }
  out[2 * n] = 2.0 * chi_sq * sine_defect(theta);
}

bool midpoint_raw(double s, const double* x, const double* y, double* out, int n, double* theta_abs) {
  const int stride = 2 * n + 1;
  double z2 = 0.0;
  double t = 0.0;
  kernel::relative_radial(x, y, n, z2, t);
  if (z2 == 0.0 && t == 0.0) {
    if (theta_abs) *theta_abs = 0.0;
    std::copy(x, x + stride, out);
    return true;
  }
  const RadialInverse r = (t == 0.0) ? RadialInverse{} : solve_radial(z2, t);
  if (theta_abs) *theta_abs = std::abs(r.theta);
  if (r.central) return false;
  if (s == 0.0) {
    std::copy(x, x + stride, out);
    return true;
  }
  if (s == 1.0) {
    std::copy(y, y + stride, out);
    return true;
  }
  // ζ_s = s·sinc(sθ/2)·e^{−isθ/2}·χ with χ = stretch·e^{iθ/2}·Δζ.
  const double theta_s = s * r.theta;
  const double mag = s * sinc(0.5 * theta_s) * r.stretch;
  const double phase = 0.5 * r.theta - 0.5 * theta_s;
  const double kc = mag * std::cos(phase);
  const double ks = mag * std::sin(phase);
  double pair = 0.0;
  for (int j = 0; j < n; ++j) {
    const double dre = y[2 * j] - x[2 * j];
    const double dim = y[2 * j + 1] - x[2 * j + 1];
    const double zre = kc * dre - ks * dim;
    const double zim = ks * dre + kc * dim;
    pair += x[2 * j + 1] * zre - x[2 * j] * zim;
    out[2 * j] = x[2 * j] + zre;
    out[2 * j + 1] = x[2 * j + 1] + zim;
  }
  const double chi_sq = r.stretch * r.stretch * z2;
  const double ts = 2.0 * chi_sq * s * s * sine_defect(theta_s);
  out[2 * n] = x[2 * n] + ts + 2.0 * pair;
  return true;
}

}  // namespace detail

HPoint gamma(double s, const GeodesicParam& p) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("geodesic time s must lie in [0, 1]");
  if (!(std::abs(p.theta) <= kTwoPi)) throw std::invalid_argument("geodesic angle must satisfy |θ| ≤ 2π");
  if (p.chi.empty() || p.chi.size() % 2 != 0) throw DimensionError("χ must hold 2n reals");
  std::vector<double> scaled(p.chi.size());
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = s * p.chi[k];
  HPoint out(p.n());
  detail::gamma_unit_raw(scaled.data(), s * p.theta, out.coords().data(), p.n());
  return out;
}

InversionResult gamma_inverse(const HPoint& y) {
  const int n = y.n();
  InversionResult res;
  const double z2 = y.horizontal_norm_sq();
  const double t = y.t();
  const auto r = detail::solve_radial(z2, t);
  res.distance = r.distance;
  GeodesicParam p;
  p.theta = r.theta;
  p.chi.assign(static_cast<std::size_t>(2 * n), 0.0);
  if (r.central) {
    CenterFamily fam{r.theta, r.distance, n};
    std::vector<double> dir(static_cast<std::size_t>(2 * n), 0.0);
    dir[0] = 1.0;
    res.params.push_back(fam.member(dir));
    res.family = fam;
    res.unique = false;
    return res;
  }
  for (int j = 0; j < n; ++j) {
    const double xi = y.xi(j);
    const double eta = y.eta(j);
    p.chi[2 * j] = r.stretch * (xi * r.cos_half - eta * r.sin_half);
    p.chi[2 * j + 1] = r.stretch * (xi * r.sin_half + eta * r.cos_half);
  }
  res.params.push_back(std::move(p));
  return res;
}

double cc_distance(const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  return detail::distance_raw(x.coords().data(), y.coords().data(), x.n());
}

double angle(const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  return detail::angle_raw(x.coords().data(), y.coords().data(), x.n());
}

HPoint midpoint(double s, const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("midpoint fraction s must lie in [0, 1]");
  HPoint out(x.n());
  if (!detail::midpoint_raw(s, x.coords().data(), y.coords().data(), out.coords().data(), x.n(), nullptr)) {
    throw NonUniqueGeodesic("points differ by a central element (θ = ±2π); the geodesic is not unique");
  }
  return out;
}

void canonicalize(PointCloud& cloud, std::vector<double>* weights, double tol) {
  const std::size_t count = cloud.size();
  if (count == 0) return;
  const int stride = cloud.stride();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto pa = cloud[a];
    auto pb = cloud[b];
    for (int k = 0; k < stride; ++k) {
      if (pa[k] != pb[k]) return pa[k] < pb[k];
    }
    return a < b;
  });
  PointCloud out(cloud.n());
  out.reserve(count);
  std::vector<double> out_w;
  std::size_t last = count;
  for (std::size_t idx : order) {
    if (last != count && coord_distance_inf(cloud[last], cloud[idx]) <= tol) {
      if (weights) out_w.back() += (*weights)[idx];
      continue;
    }
    out.push_back(cloud[idx]);
    if (weights) out_w.push_back((*weights)[idx]);
    last = idx;
  }
  cloud = std::move(out);
  if (weights) *weights = std::move(out_w);
}

MidpointSet midpoint_set(double s, const PointCloud& a, const PointCloud& b, double dedup_tol) {
  if (a.n() != b.n()) throw DimensionError("midpoint_set: clouds live in different groups");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("midpoint fraction s must lie in [0, 1]");
  const int n = a.n();
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  MidpointSet res{PointCloud(n), 0, 0.0};
  if (na == 0 || nb == 0) return res;

  PointCloud all(n);
  all.resize(na * nb);
  std::vector<unsigned char> ok(na * nb, 0);
  std::vector<double> row_min(na, kTwoPi);
  parallel_for(na, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double local_min = kTwoPi;
      for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t k = i * nb + j;
        double th = 0.0;
        ok[k] = detail::midpoint_raw(s, a[i].data(), b[j].data(), all[k].data(), n, &th) ? 1 : 0;
        local_min = std::min(local_min, th);
      }
      row_min[i] = local_min;
    }
  }, 8);

  res.min_angle = *std::min_element(row_min.begin(), row_min.end());
  PointCloud kept(n);
  kept.reserve(na * nb);
  for (std::size_t k = 0; k < na * nb; ++k) {
    if (ok[k]) kept.push_back(all[k]);
    else ++res.skipped_pairs;
  }
  all = PointCloud(n);
  canonicalize(kept, nullptr, dedup_tol);
  res.points = std::move(kept);
  return res;
}

double unit_ball_volume(int n) {
  if (n < 1) throw std::invalid_argument("Heisenberg dimension n must be >= 1");
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  // The sphere of radius 1 is {Γ₁(χ, θ): |χ| = 1}; with φ = θ/2 ∈ [0, π] its
  // profile is |ζ| = sinc φ, t = ±2·g(2φ). The ball is the solid of revolution
  // |t| ≤ T(|ζ|) over the 2n-dimensional horizontal disk.
  double sphere = 2.0 * std::pow(kPi, n);
  for (int k = 2; k < n; ++k) sphere /= k;  // 2π^n / (n−1)!
  auto integrand = [n, sphere](double phi) {
    const double rho = sinc(phi);
    double drho;
    if (phi < 1e-3) {
      drho = phi / 3.0 - phi * phi * phi / 30.0;
    } else {
      drho = (std::sin(phi) - phi * std::cos(phi)) / (phi * phi);
    }
    const double height = 2.0 * 2.0 * sine_defect(2.0 * phi);  // full height 2T
    return height * sphere * std::pow(rho, 2 * n - 1) * drho;
  };
  const int panels = 20000;
  const double h = kPi / panels;
  double acc = integrand(0.0) + integrand(kPi);
  for (int i = 1; i < panels; ++i) acc += integrand(i * h) * ((i % 2) ? 4.0 : 2.0);
  const double vol = acc * h / 3.0;
  cache.emplace(n, vol);
  return vol;
}

}  // namespace heis
