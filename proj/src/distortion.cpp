#include "heis/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace heis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double a) {
  if (std::abs(a) < 1e-4) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
  }
  return std::sin(a) / a;
}

// (sin a − a cos a) / a³ = Σ_{k≥1} (−1)^{k+1} 2k/(2k+1)! a^{2k−2}
double shear_over_cube(double a) {
  const double a2 = a * a;
  double term = 1.0;  // a^{2k−2}
  double fact = 6.0;  // (2k+1)!
  double acc = 0.0;
  for (int k = 1; k <= 12; ++k) {
    const double c = 2.0 * k / fact;
    acc += (k % 2 ? c : -c) * term;
    term *= a2;
    fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
  }
  return acc;
}

void check_args(int n, double s, double theta) {
  if (n < 1) throw std::invalid_argument("tau: n must be >= 1");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("tau: s must lie in [0, 1]");
  if (!(theta >= 0.0 && theta <= kTwoPi)) throw std::invalid_argument("tau: theta must lie in [0, 2π]");
}

}  // namespace

double tau(int n, double s, double theta) {
  check_args(n, s, theta);
  if (theta == kTwoPi) return std::numeric_limits<double>::infinity();
  if (s == 0.0) return 0.0;
  if (s == 1.0) return 1.0;  // every ratio factor is 1
  const double dim = 2.0 * n + 1.0;
  if (theta == 0.0) return std::pow(s, (2.0 * n + 3.0) / dim);

  const double a = 0.5 * theta;
  const double as = s * a;
  // sin(as)/sin(a) written through sinc to stay accurate for small a.
  const double r_sin = s * sinc(as) / sinc(a);
  double r_shear;
  if (a < 0.5) {
    r_shear = s * s * s * shear_over_cube(as) / shear_over_cube(a);
  } else {
    const double num = as < 0.5 ? as * as * as * shear_over_cube(as) : std::sin(as) - as * std::cos(as);
    r_shear = num / (std::sin(a) - a * std::cos(a));
  }
  return std::pow(s, 1.0 / dim) * std::pow(r_sin, (2.0 * n - 1.0) / dim) * std::pow(r_shear, 1.0 / dim);
}

double tau_tilde(int n, double s, double theta) {
  check_args(n, s, theta);
  if (s == 0.0) throw std::invalid_argument("tau_tilde: undefined at s = 0");
  return tau(n, s, theta) / s;
}

double p_mean(double p, double s, double a, double b) {
  if (!(a >= 0.0 && b >= 0.0)) throw std::invalid_argument("p_mean: arguments must be nonnegative");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("p_mean: s must lie in [0, 1]");
  if (std::isnan(p)) throw std::invalid_argument("p_mean: p is NaN");
  if (a * b == 0.0) return 0.0;
  if (p == std::numeric_limits<double>::infinity()) return std::max(a, b);
  if (p == -std::numeric_limits<double>::infinity()) return std::min(a, b);
  if (p == 0.0) return std::pow(a, 1.0 - s) * std::pow(b, s);
  return std::pow((1.0 - s) * std::pow(a, p) + s * std::pow(b, p), 1.0 / p);
}

}  // namespace heis
