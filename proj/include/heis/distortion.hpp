#pragma once

namespace heis {

/// Heisenberg distortion coefficient τ^n_s(θ) for s ∈ [0, 1], θ ∈ [0, 2π].
/// Returns +infinity at θ = 2π. Throws std::invalid_argument out of range.
double tau(int n, double s, double theta);

/// τ̃^n_s(θ) = τ^n_s(θ) / s, defined for s ∈ (0, 1].
double tau_tilde(int n, double s, double theta);

/// Weighted p-mean M_s^p(a, b) for a, b ≥ 0; p may be ±infinity.
/// M = 0 whenever ab = 0; p = 0 is the geometric mean, p = +∞ the max and
/// p = −∞ the min.
double p_mean(double p, double s, double a, double b);

}  // namespace heis
