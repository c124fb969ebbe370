#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <mutex>
#include <stdexcept>

#include "heis/geodesy.hpp"
#include "heis/measures.hpp"
#include "heis/parallel.hpp"

namespace heis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxAxes = 16;  // 2n ≤ 16 on the branch-and-bound path
constexpr int kNodeBudget = 1 << 14;
constexpr std::size_t kMaxCells = 400'000'000;

// 1 − sin φ / φ
double sinc_defect(double phi) {
  if (phi < 0.5) {
    const double p2 = phi * phi;
    return p2 * (1.0 / 6.0 + p2 * (-1.0 / 120.0 + p2 * (1.0 / 5040.0 + p2 * (-1.0 / 362880.0 + p2 * (1.0 / 39916800.0 - p2 / 6227020800.0)))));
  }
  return 1.0 - std::sin(phi) / phi;
}

// d/dφ (1 − sinc φ) = (sin φ − φ cos φ) / φ²
double sinc_defect_derivative(double phi) {
  if (phi < 0.5) {
    const double p2 = phi * phi;
    return phi * (1.0 / 3.0 + p2 * (-1.0 / 30.0 + p2 * (1.0 / 840.0 + p2 * (-1.0 / 45360.0 + p2 / 3991680.0))));
  }
  return (std::sin(phi) - phi * std::cos(phi)) / (phi * phi);
}

// (a − sin a) / a²
double sine_defect(double a) {
  if (a < 0.1) {
    const double a2 = a * a;
    return a * (1.0 / 6.0 + a2 * (-1.0 / 120.0 + a2 * (1.0 / 5040.0 + a2 * (-1.0 / 362880.0))));
  }
  return (a - std::sin(a)) / (a * a);
}

// φ ∈ [0, π] with 1 − sinc φ = q, q ∈ [0, 1].
double invert_sinc_defect(double q) {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return kPi;
  double lo = 0.0;
  double hi = kPi;
  double x = std::min(std::sqrt(6.0 * q), 0.5 * (lo + hi) + 0.5 * kPi * q);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = sinc_defect(x) - q;
    if (f == 0.0) break;
    if (f < 0.0) lo = x; else hi = x;
    double next = x - f / sinc_defect_derivative(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// Max and min of the profile over horizontal radii in [a, b]. The profile
// rises from r²/π at ρ = 0 to 2r²/π at ρ = 2r/π, then falls to 0 at ρ = r.
double profile_max(double a, double b, double r) {
  return detail::ball_profile(std::clamp(2.0 * r / kPi, a, b), r);
}

double profile_min(double a, double b, double r) {
  return std::min(detail::ball_profile(a, r), detail::ball_profile(b, r));
}

struct Rect {
  std::array<double, kMaxAxes> lo;
  std::array<double, kMaxAxes> hi;
};

}  // namespace

namespace detail {

double ball_profile(double rho, double r) {
  if (rho >= r) return 0.0;
  // On the unit sphere |ζ| = sinc φ and |t| = (2φ − sin 2φ)/(2φ²) = 2·g(2φ).
  const double phi = invert_sinc_defect(1.0 - rho / r);
  return r * r * 2.0 * sine_defect(2.0 * phi);
}

bool cell_meets_ball(const double* x, int n, double r, const std::int64_t* cell, const Grid& grid) {
  const int axes = 2 * n;
  if (axes > kMaxAxes) throw std::invalid_argument("cell_meets_ball: n too large for the occupancy test");
  const double hh = grid.h_horizontal;
  Rect root;
  for (int k = 0; k < axes; ++k) {
    const double lo = static_cast<double>(cell[k]) * hh - x[k];
    const double hi = static_cast<double>(cell[k] + 1) * hh - x[k];
    root.lo[k] = std::max(lo, -r);
    root.hi[k] = std::min(hi, r);
    if (root.lo[k] > root.hi[k]) return false;
  }
  // τ + L(u) must land in [t0, t1], L(u) = 2 Σ η_j u_ξj − ξ_j u_ηj.
  const double t0 = static_cast<double>(cell[axes]) * grid.h_vertical - x[axes];
  const double t1 = static_cast<double>(cell[axes] + 1) * grid.h_vertical - x[axes];
  std::array<double, kMaxAxes> coef{};
  for (int j = 0; j < n; ++j) {
    coef[2 * j] = 2.0 * x[2 * j + 1];
    coef[2 * j + 1] = -2.0 * x[2 * j];
  }
  const double r2 = r * r;

  std::vector<Rect> stack{root};
  int visited = 0;
  while (!stack.empty()) {
    Rect s = stack.back();
    stack.pop_back();
    if (++visited > kNodeBudget) return false;
    double rmin2 = 0.0;
    double rmax2 = 0.0;
    double lmin = 0.0;
    double lmax = 0.0;
    double lc = 0.0;
    double rc2 = 0.0;
    int widest = 0;
    double width = -1.0;
    for (int k = 0; k < axes; ++k) {
      const double lo = s.lo[k];
      const double hi = s.hi[k];
      const double near = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
      const double far = std::max(std::abs(lo), std::abs(hi));
      rmin2 += near * near;
      rmax2 += far * far;
      const double a = coef[k] * lo;
      const double b = coef[k] * hi;
      lmin += std::min(a, b);
      lmax += std::max(a, b);
      const double c = 0.5 * (lo + hi);
      lc += coef[k] * c;
      rc2 += c * c;
      if (hi - lo > width) {
        width = hi - lo;
        widest = k;
      }
    }
    if (rmin2 > r2) continue;
    const double bmax = profile_max(std::sqrt(rmin2), std::sqrt(rmax2), r);
    if (t0 - lmax > bmax || t1 - lmin < -bmax) continue;
    if (rc2 <= r2) {
      const double bc = ball_profile(std::sqrt(rc2), r);
      if (t0 - lc <= bc && t1 - lc >= -bc) return true;
    }
    if (rmax2 <= r2) {
      const double bmin = profile_min(std::sqrt(rmin2), std::sqrt(rmax2), r);
      if (t0 - lmin <= bmin && t1 - lmax >= -bmin) return true;
    }
    if (width <= 0.0) continue;
    const double mid = 0.5 * (s.lo[widest] + s.hi[widest]);
    if (!(mid > s.lo[widest] && mid < s.hi[widest])) continue;
    Rect a = s;
    Rect b = s;
    a.hi[widest] = mid;
    b.lo[widest] = mid;
    stack.push_back(b);
    stack.push_back(a);
  }
  return false;
}

}  // namespace detail

namespace {

struct DenseGrid {
  int stride = 0;
  std::vector<std::int64_t> lo;    // first cell index per axis
  std::vector<std::int64_t> dims;  // cells per axis
  std::size_t total = 1;

  bool index_of(const std::int64_t* key, std::size_t& idx) const {
    std::size_t acc = 0;
    for (int k = 0; k < stride; ++k) {
      const std::int64_t off = key[k] - lo[k];
      if (off < 0 || off >= dims[k]) return false;
      acc = acc * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(off);
    }
    idx = acc;
    return true;
  }
};

// Marks every cell of `g` that meets some ball of radius r centered at the
// points with index ≡ 0 mod `step`.
std::vector<unsigned char> occupancy(const PointCloud& pts, std::size_t step, double r, const Grid& grid,
                                     const DenseGrid& g) {
  const int n = pts.n();
  const int stride = pts.stride();
  std::vector<unsigned char> occ(g.total, 0);
  std::vector<std::int64_t> key(static_cast<std::size_t>(stride));
  for (std::size_t i = 0; i < pts.size(); i += step) {
    auto p = pts[i];
    for (int k = 0; k < stride; ++k) key[k] = detail::cell_index(p[k], grid.spacing(k, n));
    std::size_t idx;
    if (g.index_of(key.data(), idx)) occ[idx] = 1;
  }
  if (r == 0.0) return occ;

  const std::size_t picks = (pts.size() + step - 1) / step;
  const double hh = grid.h_horizontal;
  const double hv = grid.h_vertical;
  const double cap = r * r * kUnitBallHeight;
  std::vector<std::vector<std::size_t>> found_per_chunk;
  std::mutex mu;
  parallel_for(picks, [&](std::size_t begin, std::size_t end) {
    std::vector<unsigned char> local(g.total, 0);
    std::vector<std::size_t> found;
    std::vector<std::int64_t> cur(static_cast<std::size_t>(stride));
    std::vector<std::int64_t> first(static_cast<std::size_t>(stride));
    std::vector<std::int64_t> last(static_cast<std::size_t>(stride));
    for (std::size_t q = begin; q < end; ++q) {
      const double* x = pts[q * step].data();
      bool empty = false;
      for (int k = 0; k < 2 * n; ++k) {
        first[k] = std::max(detail::cell_index(x[k] - r, hh), g.lo[k]);
        last[k] = std::min(detail::cell_index(x[k] + r, hh), g.lo[k] + g.dims[k] - 1);
        if (first[k] > last[k]) empty = true;
      }
      if (empty) continue;
      for (int k = 0; k < 2 * n; ++k) cur[k] = first[k];
      while (true) {
        double lmin = 0.0;
        double lmax = 0.0;
        double rmin2 = 0.0;
        for (int k = 0; k < 2 * n; ++k) {
          const double lo = std::max(static_cast<double>(cur[k]) * hh - x[k], -r);
          const double hi = std::min(static_cast<double>(cur[k] + 1) * hh - x[k], r);
          const double near = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
          rmin2 += near * near;
          const double c = (k % 2 == 0) ? 2.0 * x[k + 1] : -2.0 * x[k - 1];
          lmin += std::min(c * lo, c * hi);
          lmax += std::max(c * lo, c * hi);
        }
        if (rmin2 <= r * r) {
          const std::int64_t t_first =
              std::max(detail::cell_index(x[2 * n] + lmin - cap, hv), g.lo[2 * n]);
          const std::int64_t t_last =
              std::min(detail::cell_index(x[2 * n] + lmax + cap, hv), g.lo[2 * n] + g.dims[2 * n] - 1);
          for (std::int64_t ct = t_first; ct <= t_last; ++ct) {
            cur[2 * n] = ct;
            std::size_t idx;
            if (!g.index_of(cur.data(), idx) || occ[idx] || local[idx]) continue;
            if (detail::cell_meets_ball(x, n, r, cur.data(), grid)) {
              local[idx] = 1;
              found.push_back(idx);
            }
          }
        }
        int k = 2 * n - 1;
        while (k >= 0 && cur[k] == last[k]) {
          cur[k] = first[k];
          --k;
        }
        if (k < 0) break;
        ++cur[k];
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    found_per_chunk.push_back(std::move(found));
  }, 64);
  for (const auto& f : found_per_chunk) {
    for (std::size_t idx : f) occ[idx] = 1;
  }
  return occ;
}

double counted_volume(const std::vector<unsigned char>& occ, const DenseGrid& g, const Grid& grid, int n,
                      const Region& bound, bool bound_is_grid_box, std::size_t& cells) {
  cells = 0;
  std::vector<double> center(static_cast<std::size_t>(g.stride));
  for (std::size_t idx = 0; idx < occ.size(); ++idx) {
    if (!occ[idx]) continue;
    if (!bound_is_grid_box) {
      std::size_t rem = idx;
      for (int k = g.stride - 1; k >= 0; --k) {
        const auto d = static_cast<std::size_t>(g.dims[k]);
        const auto c = g.lo[k] + static_cast<std::int64_t>(rem % d);
        rem /= d;
        center[k] = (static_cast<double>(c) + 0.5) * grid.spacing(k, n);
      }
      if (!bound.contains(center)) continue;
    }
    ++cells;
  }
  return static_cast<double>(cells) * grid.cell_volume(n);
}

}  // namespace

VolumeEstimate estimate_volume(const PointCloud& points, double r, const Grid& grid, const Region& bound) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("estimate_volume: r must be >= 0");
  if (!(grid.h_horizontal > 0.0) || !(grid.h_vertical > 0.0)) {
    throw std::invalid_argument("estimate_volume: cell size must be positive");
  }
  if (points.n() != bound.n()) throw DimensionError("estimate_volume: points and bound live in different groups");
  VolumeEstimate est;
  if (r > 0.0 && grid.h_horizontal > r) {
    est.under_resolved = true;
    est.note = "warning: cell size exceeds the thickening radius";
  }
  if (points.empty()) return est;

  const int n = points.n();
  DenseGrid g;
  g.stride = points.stride();
  const auto bb = bound.bounding_box();
  for (int k = 0; k < g.stride; ++k) {
    const double h = grid.spacing(k, n);
    const auto lo = detail::cell_index(bb[k].lo, h);
    // a cell counts only if its center is inside the bound
    std::int64_t first = lo;
    if ((static_cast<double>(lo) + 0.5) * h < bb[k].lo) ++first;
    std::int64_t last = detail::cell_index(bb[k].hi, h);
    if ((static_cast<double>(last) + 0.5) * h > bb[k].hi) --last;
    if (last < first) return est;
    g.lo.push_back(first);
    g.dims.push_back(last - first + 1);
    if (static_cast<double>(g.total) * static_cast<double>(last - first + 1) > static_cast<double>(kMaxCells)) {
      throw std::invalid_argument("estimate_volume: grid too fine for the bound (more than 4e8 cells)");
    }
    g.total *= static_cast<std::size_t>(last - first + 1);
  }
  // Box bounds: every cell of the dense grid has its center in the box.
  const bool centers_inside = bound.kind() == Region::Kind::box;

  const auto full = occupancy(points, 1, r, grid, g);
  est.volume = counted_volume(full, g, grid, n, bound, centers_inside, est.occupied_cells);

  // Saturation fit: if a fraction f of the target is still uncovered, a
  // half sample leaves about √f uncovered, so V = V_∞(1 − u²) and
  // V_half = V_∞(1 − u) with u = V / V_half − 1.
  if (points.size() >= 2) {
    std::size_t half_cells = 0;
    const auto half = occupancy(points, 2, r, grid, g);
    const double v_half = counted_volume(half, g, grid, n, bound, centers_inside, half_cells);
    if (v_half > 0.0) {
      const double u = std::clamp(est.volume / v_half - 1.0, 0.0, 0.999);
      const double v_inf = v_half / (1.0 - u);
      est.std_error = std::abs(v_inf - est.volume);
    } else {
      est.std_error = est.volume;
    }
  }
  return est;
}

}  // namespace heis
