#pragma once

// Hand-rolled generators and independent oracles shared by the test files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "heis/point.hpp"
#include "heis/rng.hpp"

namespace testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed, 0xC0FFEE) {}
  double uniform() { return rng_.uniform(next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * n)); }

  std::vector<double> coords(int n, double scale = 2.0) {
    std::vector<double> c(static_cast<std::size_t>(2 * n + 1));
    for (auto& v : c) v = uniform(-scale, scale);
    return c;
  }
  heis::HPoint point(int n, double scale = 2.0) { return heis::HPoint::from_coords(coords(n, scale)); }

 private:
  heis::CounterRng rng_;
  std::uint64_t next_ = 0;
};

// Group law written out directly: t'' = t + t' + 2 Σ (η_j ξ'_j − ξ_j η'_j).
inline std::vector<long double> mul_ld(const std::vector<long double>& x, const std::vector<long double>& y) {
  std::vector<long double> z(x.size());
  long double cross = 0;
  for (std::size_t k = 0; k + 1 < x.size(); k += 2) {
    z[k] = x[k] + y[k];
    z[k + 1] = x[k + 1] + y[k + 1];
    cross += x[k + 1] * y[k] - x[k] * y[k + 1];
  }
  z.back() = x.back() + y.back() + 2 * cross;
  return z;
}

// d(0, (ζ, t)) by bisection on (θ − sin θ)/(2 sin²(θ/2)) = |t|/|ζ|² in long
// double, then |χ| = |ζ|·(θ/2)/sin(θ/2).
inline long double oracle_norm(long double zeta_sq, long double t) {
  const long double pi = std::numbers::pi_v<long double>;
  t = std::fabs(t);
  if (zeta_sq == 0) return std::sqrt(pi * t);
  if (t == 0) return std::sqrt(zeta_sq);
  const long double target = t / zeta_sq;
  long double lo = 0, hi = 2 * pi;
  for (int it = 0; it < 72; ++it) {
    const long double mid = 0.5L * (lo + hi);
    const long double half = std::sin(mid / 2);
    const long double m = (mid - std::sin(mid)) / (2 * half * half);
    (m < target ? lo : hi) = mid;
  }
  const long double th = 0.5L * (lo + hi);
  return std::sqrt(zeta_sq) * (th / 2) / std::sin(th / 2);
}

inline double oracle_distance(const heis::HPoint& x, const heis::HPoint& y) {
  std::vector<long double> xi(x.coords().begin(), x.coords().end());
  std::vector<long double> yi(y.coords().begin(), y.coords().end());
  for (auto& v : xi) v = -v;
  const auto rel = mul_ld(xi, yi);
  long double zs = 0;
  for (std::size_t k = 0; k + 1 < rel.size(); ++k) zs += rel[k] * rel[k];
  return static_cast<double>(oracle_norm(zs, rel.back()));
}

// Brute-force assignment minimum over all permutations.
inline double brute_assignment(const std::vector<double>& cost, int m) {
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) perm[static_cast<std::size_t>(k)] = k;
  double best = INFINITY;
  do {
    double acc = 0;
    for (int k = 0; k < m; ++k) acc += cost[static_cast<std::size_t>(k * m + perm[static_cast<std::size_t>(k)])];
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / m;
}

}  // namespace testing
