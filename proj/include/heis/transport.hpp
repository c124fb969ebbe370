#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heis/geodesy.hpp"
#include "heis/measures.hpp"

namespace heis {

/// Squared CC distances d(x_i, y_j)² and angles |θ(x_i, y_j)|, row-major.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;
  std::vector<double> angle;

  double at(std::size_t i, std::size_t j) const { return cost[i * cols + j]; }
  double angle_at(std::size_t i, std::size_t j) const { return angle[i * cols + j]; }
  CostMatrix transposed() const;
};

CostMatrix cost_matrix(const PointCloud& src, const PointCloud& tgt);
inline CostMatrix cost_matrix(const DiscreteMeasure& src, const DiscreteMeasure& tgt) {
  return cost_matrix(src.points, tgt.points);
}

/// Median of the cost entries.
double median_cost(const CostMatrix& c);

enum class Method { exact_lp, sinkhorn };

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct TransportPlan {
  std::vector<PlanEntry> pairs;  ///< sorted by (i, j), all masses > 0
  double cost = 0.0;             ///< Σ π_ij C_ij
  double regularized_cost = 0.0; ///< cost − ε·H(π) for Sinkhorn, equals cost otherwise
  Method method = Method::exact_lp;
  double epsilon = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  /// Largest absolute deviation of row or column sums from the marginals.
  double marginal_violation(std::span<const double> a, std::span<const double> b) const;
};

class InfeasibleMarginals : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SinkhornNotConverged : public std::runtime_error {
 public:
  SinkhornNotConverged(const std::string& what, double violation) : std::runtime_error(what), violation(violation) {}
  double violation;
};

/// Exact minimizer by network simplex. Throws InfeasibleMarginals when the
/// totals differ by more than 1e−9.
TransportPlan solve_exact(const CostMatrix& c, std::span<const double> a, std::span<const double> b);

struct SinkhornOptions {
  /// Absolute ε; when ≤ 0, epsilon_factor·median(C) is used.
  double epsilon = 0.0;
  double epsilon_factor = 0.05;
  std::size_t max_iter = 200000;
  double tol = 1e-6;  // L1 row violation
  double prune = 1e-15;
};

/// Log-domain Sinkhorn iterations until the row-marginal L1 violation is
/// ≤ tol (columns are exact after each sweep).
TransportPlan solve_sinkhorn(const CostMatrix& c, std::span<const double> a, std::span<const double> b,
                             const SinkhornOptions& opt = {});

/// W₂ between two discrete measures: square root of the plan cost.
double w2(const DiscreteMeasure& src, const DiscreteMeasure& tgt, Method method = Method::exact_lp,
          const SinkhornOptions& opt = {});

/// Thrown when a plan couples pairs that differ by a central element.
class CenterPairError : public NonUniqueGeodesic {
 public:
  CenterPairError(const std::string& what, std::vector<std::pair<std::size_t, std::size_t>> pairs)
      : NonUniqueGeodesic(what), pairs(std::move(pairs)) {}
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Discrete optimal geodesic plan: the coupling plus its two marginals.
/// Construction checks that every supported pair is interpolable.
class GeodesicPlan {
 public:
  GeodesicPlan(TransportPlan plan, DiscreteMeasure source, DiscreteMeasure target);

  const TransportPlan& plan() const { return plan_; }
  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }

  /// T_s of the k-th supported geodesic.
  HPoint evaluate(double s, std::size_t k) const;
  /// |θ| of the k-th supported pair.
  double pair_angle(std::size_t k) const;

 private:
  TransportPlan plan_;
  DiscreteMeasure source_;
  DiscreteMeasure target_;
};

/// Exact (or Sinkhorn) plan between two measures wrapped as a GeodesicPlan.
GeodesicPlan optimal_geodesic_plan(const DiscreteMeasure& src, const DiscreteMeasure& tgt,
                                   Method method = Method::exact_lp, const SinkhornOptions& opt = {});

/// (T_s)♯η: midpoints of the supported pairs weighted by π_ij, coincident
/// points (within `merge_tol`) merged by adding weights.
DiscreteMeasure interpolate(const GeodesicPlan& gp, double s, double merge_tol = 1e-12);

/// estimate_volume of the interpolant's support.
VolumeEstimate interpolant_support_volume(const GeodesicPlan& gp, double s, double r, const Grid& grid,
                                          const Region& bound);

}  // namespace heis
