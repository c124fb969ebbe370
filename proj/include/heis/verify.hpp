#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heis/measures.hpp"
#include "heis/region.hpp"
#include "heis/transport.hpp"

namespace heis {

enum class Verdict { holds, fails, inconclusive };

const char* to_string(Verdict v);

/// One inequality instance. margin = rhs − lhs for "lhs ≤ rhs" forms and
/// lhs − rhs for "lhs ≥ rhs" forms, so margin ≥ 0 always means "holds".
struct InequalityReport {
  std::string name;  ///< CD, BMI, SBMI, BBL or JENSEN
  double s = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double mc_stderr = 0.0;
  std::string discretization_note;
  Verdict holds = Verdict::inconclusive;
  std::map<std::string, double> extras;  ///< Θ, volumes, containment, Jensen terms
};

/// inconclusive when |margin| < k·se, otherwise holds/fails by the sign of
/// the margin. se gets a floor of 1e−12·(1 + |lhs| + |rhs|) for round-off.
Verdict classify(double margin, double se, double lhs, double rhs, double k = 3.0);

/// F^n_s = −Σ π_ij [τ_{1−s}(θ_ij) ρ₀(x_i)^{−1/(2n+1)} + τ_s(θ_ij) ρ₁(y_j)^{−1/(2n+1)}].
/// Returns −∞ when a supported pair has θ = 2π and a nonzero coefficient.
double cd_functional(const TransportPlan& plan, const DiscreteMeasure& src, const DiscreteMeasure& tgt, double s);

/// Samples of two regions with their exact volumes. B uses seed + 1.
struct SetSample {
  PointCloud a;
  PointCloud b;
  double vol_a = 0.0;
  double vol_b = 0.0;
};

SetSample sample_sets(const Region& a, const Region& b, std::size_t count, std::uint64_t seed);
SetSample dilated(const SetSample& x, double lambda);

/// τ_{1−s}(Θ)·vol(A)^{1/(2n+1)} + τ_s(Θ)·vol(B)^{1/(2n+1)}.
double brunn_minkowski_rhs(int n, double s, double theta, double vol_a, double vol_b);

struct CdOptions {
  Grid grid = Grid::cubic(0.1);
  Method method = Method::exact_lp;
  SinkhornOptions sinkhorn{};
};

/// CD inequality on normalized measures of the two samples, sharing one
/// exact plan across all s. Marginal and interpolant densities all come
/// from the same histogram grid. Each report also carries the Jensen terms
/// (extras "jensen_lhs", "jensen_rhs", "jensen_margin").
std::vector<InequalityReport> verify_cd_samples(const SetSample& x, std::span<const double> s_values,
                                                const CdOptions& opt);
InequalityReport verify_cd(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                           double h);

struct BmOptions {
  double r = 0.05;
  Grid grid = Grid::cubic(0.05);
  bool with_sbmi = true;
};

struct BmReports {
  InequalityReport bmi;
  std::optional<InequalityReport> sbmi;
};

/// BMI (and SBMI) on the samples. Z_s is the full midpoint set; its volume
/// is estimated inside its grid-aligned bounding box, and the interpolant
/// support of the exact plan uses the same box.
std::vector<BmReports> verify_bm_samples(const SetSample& x, std::span<const double> s_values, const BmOptions& opt);
InequalityReport verify_bmi(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                            double r, double h);
InequalityReport verify_sbmi(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                             double r, double h);

/// Piecewise-constant function on a block of the origin-anchored grid:
/// axis k covers global cells first[k], …, first[k] + dims[k] − 1 of width
/// spacing[k]. The function is 0 outside the block.
struct GridFunction {
  std::vector<double> spacing;
  std::vector<std::int64_t> first;
  std::vector<std::size_t> dims;
  std::vector<double> values;  ///< row-major, last axis fastest

  static GridFunction zeros(std::vector<double> spacing, std::vector<std::int64_t> first,
                            std::vector<std::size_t> dims);
  /// c·1_A on A's own cells; A must be a box aligned with the spacing.
  static GridFunction box_indicator(const Region& a, std::vector<double> spacing, double c = 1.0);

  int n() const { return static_cast<int>(spacing.size() / 2); }
  std::vector<Interval> box() const;
  double cell_volume() const;
  double integral() const;
  double value_at(std::span<const double> p) const;
  /// Row-major index of the cell containing p; false outside the block.
  bool locate(std::span<const double> p, std::size_t& index) const;
  /// Global cell key of a row-major index.
  std::vector<std::int64_t> cell_key(std::size_t index) const;
  /// The same function on a larger block (must contain this one).
  GridFunction embedded(std::vector<std::int64_t> first, std::vector<std::size_t> dims) const;
  GridFunction scaled(double c) const;
};

class HypothesisViolated : public std::runtime_error {
 public:
  HypothesisViolated(const std::string& what, std::vector<double> x, std::vector<double> y, std::vector<double> z)
      : std::runtime_error(what), x(std::move(x)), y(std::move(y)), z(std::move(z)) {}
  std::vector<double> x, y, z;
};

/// The pairs (x, y) on which the BBL hypothesis is checked: a uniform cell of
/// each support, then a uniform point inside it. Support cells are ordered by
/// global key, so the draw does not depend on the block a function lives on.
std::vector<std::pair<std::vector<double>, std::vector<double>>> bbl_sample_pairs(
    const GridFunction& f, const GridFunction& g, std::size_t count, std::uint64_t seed);

/// Checks the pointwise hypothesis on sampled triples (x, y, Z_s(x, y)),
/// throws HypothesisViolated with a witness when it fails, then compares
/// ∫h with M_s^{p/(1+(2n+1)p)}(∫f, ∫g). s must lie in (0, 1).
InequalityReport verify_bbl(const GridFunction& f, const GridFunction& g, const GridFunction& h, double s, double p,
                            std::size_t samples, std::uint64_t seed);

/// f = c₁^{2n+1}·1_A, g = c₂^{2n+1}·1_B and h = indicator of the cells hit
/// by midpoints of the sampled pairs, where c₁ = τ̃_{1−s}(Θ), c₂ = τ̃_s(Θ)
/// and Θ is the sampled deviation. A and B must be boxes aligned with the
/// cubic grid of spacing h_cell.
struct BblInstance {
  GridFunction f, g, h;
  double theta = 0.0;
};
BblInstance bbl_set_instance(const Region& a, const Region& b, double s, double h_cell, std::size_t samples,
                             std::uint64_t seed);

struct StepLimitRow {
  int depth = -1;  ///< −1 for the un-approximated row
  double w2_source = 0.0;
  double w2_target = 0.0;
  double functional = 0.0;
};

/// Step approximation of both marginals at each depth, exact transport
/// between the approximations and F^n_s of that plan; the last row is F of
/// the exact plan between the original measures.
std::vector<StepLimitRow> step_limit_experiment(const DiscreteMeasure& mu, const Region& k_mu,
                                                const DiscreteMeasure& nu, const Region& k_nu,
                                                std::span<const int> depths, double s);

/// Two-level density pair in H¹ on an m×m×m lattice of cell centers:
/// μ on [0,1]³ with density 1.6 for ξ < 1/4 and 0.8 elsewhere, ν on
/// [2,3]×[0,1]² with density 1.5 for t ≥ 1/2 and 0.5 elsewhere. Weights are
/// ρ/m³. With m a multiple of 4 the step approximation is exact from depth
/// 4 on.
struct StepLimitInstance {
  DiscreteMeasure mu, nu;
  Region k_mu = Region::unit_box(1);
  Region k_nu = Region::unit_box(1);
};
StepLimitInstance two_level_instance(int per_axis = 8);

}  // namespace heis
