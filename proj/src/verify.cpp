#include "heis/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "heis/distortion.hpp"
#include "heis/geodesy.hpp"
#include "heis/rng.hpp"

namespace heis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard error of a weighted mean Σ w v with Σ w = 1, treating the
// weighted terms as independent.
double weighted_mean_se(const std::vector<double>& v, const std::vector<double>& w) {
  double mean = 0.0;
  double w2 = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    mean += w[k] * v[k];
    w2 += w[k] * w[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) var += w[k] * (v[k] - mean) * (v[k] - mean);
  return std::sqrt(std::max(0.0, var * w2));
}

InequalityReport finish(InequalityReport rep) {
  rep.holds = classify(rep.margin, rep.mc_stderr, rep.lhs, rep.rhs);
  return rep;
}

double root_volume_se(double volume, double std_error, int dim) {
  if (volume > 0.0) return std::pow(volume, 1.0 / dim - 1.0) * std_error / dim;
  return std::pow(std_error, 1.0 / dim);
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict classify(double margin, double se, double lhs, double rhs, double k) {
  if (std::isnan(margin)) return Verdict::inconclusive;
  const double floor = 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
  const double band = k * std::max(se, std::isfinite(floor) ? floor : 0.0);
  if (std::abs(margin) < band) return Verdict::inconclusive;
  return margin > 0.0 ? Verdict::holds : Verdict::fails;
}

double cd_functional(const TransportPlan& plan, const DiscreteMeasure& src, const DiscreteMeasure& tgt, double s) {
  if (!src.density || !tgt.density) {
    throw std::invalid_argument("cd_functional: both marginals need densities; call estimate_density first");
  }
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("cd_functional: s must lie in [0, 1]");
  const int n = src.n();
  const double expo = -1.0 / (2.0 * n + 1.0);
  double acc = 0.0;
  for (const auto& p : plan.pairs) {
    const double th = detail::angle_raw(src.points[p.i].data(), tgt.points[p.j].data(), n);
    if (th == kTwoPi) return -kInf;
    const double a = tau(n, 1.0 - s, th);
    const double b = tau(n, s, th);
    double term = 0.0;
    if (a != 0.0) term += a * std::pow((*src.density)[p.i], expo);
    if (b != 0.0) term += b * std::pow((*tgt.density)[p.j], expo);
    acc += p.mass * term;
  }
  return -acc;
}

SetSample sample_sets(const Region& a, const Region& b, std::size_t count, std::uint64_t seed) {
  if (a.n() != b.n()) throw DimensionError("regions live in different groups");
  SetSample x{sample_uniform(a, count, seed), sample_uniform(b, count, seed + 1), a.volume(), b.volume()};
  return x;
}

SetSample dilated(const SetSample& x, double lambda) {
  const int n = x.a.n();
  const double f = std::pow(lambda, 2 * n + 2);
  return {dilate(lambda, x.a), dilate(lambda, x.b), x.vol_a * f, x.vol_b * f};
}

double brunn_minkowski_rhs(int n, double s, double theta, double vol_a, double vol_b) {
  const double d = 2.0 * n + 1.0;
  const double a = tau(n, 1.0 - s, theta);
  const double b = tau(n, s, theta);
  double acc = 0.0;
  if (a != 0.0) acc += a * std::pow(vol_a, 1.0 / d);
  if (b != 0.0) acc += b * std::pow(vol_b, 1.0 / d);
  return acc;
}

std::vector<InequalityReport> verify_cd_samples(const SetSample& x, std::span<const double> s_values,
                                                const CdOptions& opt) {
  const int n = x.a.n();
  const int dim = 2 * n + 1;
  const auto mu0 = estimate_density(empirical_measure(x.a), opt.grid);
  const auto mu1 = estimate_density(empirical_measure(x.b), opt.grid);
  const auto c = cost_matrix(mu0, mu1);
  const double theta = *std::min_element(c.angle.begin(), c.angle.end());
  auto plan = opt.method == Method::exact_lp ? solve_exact(c, mu0.weights, mu1.weights)
                                             : solve_sinkhorn(c, mu0.weights, mu1.weights, opt.sinkhorn);
  const std::string note = "marginal and interpolant densities: histogram, cells " +
                           std::to_string(opt.grid.h_horizontal) + " x " + std::to_string(opt.grid.h_vertical);

  std::vector<InequalityReport> out;
  std::optional<GeodesicPlan> gp;
  std::string center_note;
  try {
    gp.emplace(plan, mu0, mu1);
  } catch (const CenterPairError& e) {
    center_note = e.what();
  }
  for (double s : s_values) {
    InequalityReport rep;
    rep.name = "CD";
    rep.s = s;
    rep.discretization_note = note;
    rep.extras["theta"] = theta;
    if (!gp) {
      rep.discretization_note += "; " + center_note;
      rep.lhs = rep.rhs = rep.margin = std::numeric_limits<double>::quiet_NaN();
      rep.holds = Verdict::inconclusive;
      out.push_back(rep);
      continue;
    }
    const auto mus = estimate_density(interpolate(*gp, s), opt.grid);
    rep.lhs = renyi_entropy(mus);
    rep.rhs = cd_functional(plan, mu0, mu1, s);
    rep.margin = rep.rhs - rep.lhs;

    std::vector<double> lv(mus.size());
    for (std::size_t i = 0; i < mus.size(); ++i) lv[i] = std::pow((*mus.density)[i], -1.0 / dim);
    std::vector<double> rv, rw;
    for (const auto& p : plan.pairs) {
      const double th = c.angle_at(p.i, p.j);
      double v = 0.0;
      const double ta = tau(n, 1.0 - s, th);
      const double tb = tau(n, s, th);
      if (ta != 0.0) v += ta * std::pow((*mu0.density)[p.i], -1.0 / dim);
      if (tb != 0.0) v += tb * std::pow((*mu1.density)[p.j], -1.0 / dim);
      rv.push_back(v);
      rw.push_back(p.mass);
    }
    const double se_l = weighted_mean_se(lv, mus.weights);
    const double se_r = std::isfinite(rep.rhs) ? weighted_mean_se(rv, rw) : 0.0;
    rep.mc_stderr = std::sqrt(se_l * se_l + se_r * se_r);

    const auto bound = grid_bounding_box(mus.points, opt.grid);
    const auto vol = estimate_volume(mus.points, 0.0, opt.grid, bound);
    rep.extras["support_volume"] = vol.volume;
    rep.extras["jensen_lhs"] = rep.lhs;
    rep.extras["jensen_rhs"] = -std::pow(vol.volume, 1.0 / dim);
    rep.extras["jensen_margin"] = rep.lhs + std::pow(vol.volume, 1.0 / dim);
    rep.extras["interpolant_points"] = static_cast<double>(mus.size());

    if (!std::isfinite(rep.rhs)) {
      rep.discretization_note += "; infinite distortion coefficient on a supported pair, not compared";
      rep.holds = Verdict::inconclusive;
      out.push_back(rep);
      continue;
    }
    out.push_back(finish(rep));
  }
  return out;
}

InequalityReport verify_cd(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                           double h) {
  const double sv[] = {s};
  CdOptions opt;
  opt.grid = Grid::cubic(h);
  return verify_cd_samples(sample_sets(a, b, count, seed), sv, opt).front();
}

std::vector<BmReports> verify_bm_samples(const SetSample& x, std::span<const double> s_values, const BmOptions& opt) {
  const int n = x.a.n();
  const int dim = 2 * n + 1;
  std::optional<GeodesicPlan> gp;
  std::string center_note;
  if (opt.with_sbmi) {
    const auto mu0 = empirical_measure(x.a);
    const auto mu1 = empirical_measure(x.b);
    const auto c = cost_matrix(mu0, mu1);
    try {
      gp.emplace(solve_exact(c, mu0.weights, mu1.weights), mu0, mu1);
    } catch (const CenterPairError& e) {
      center_note = e.what();
    }
  }
  const std::string note = "occupancy grid " + std::to_string(opt.grid.h_horizontal) + " x " +
                           std::to_string(opt.grid.h_vertical) + ", CC thickening r=" + std::to_string(opt.r) +
                           ", bound = grid box of Z_s";

  std::vector<BmReports> out;
  for (double s : s_values) {
    const auto z = midpoint_set(s, x.a, x.b);
    const double theta = z.min_angle;
    const auto bound = grid_bounding_box(z.points, opt.grid);
    const auto vz = estimate_volume(z.points, opt.r, opt.grid, bound);

    InequalityReport bmi;
    bmi.name = "BMI";
    bmi.s = s;
    bmi.discretization_note = note + (vz.note.empty() ? "" : "; " + vz.note);
    bmi.lhs = std::pow(vz.volume, 1.0 / dim);
    bmi.rhs = brunn_minkowski_rhs(n, s, theta, x.vol_a, x.vol_b);
    bmi.margin = bmi.lhs - bmi.rhs;
    bmi.mc_stderr = root_volume_se(vz.volume, vz.std_error, dim);
    bmi.extras["theta"] = theta;
    bmi.extras["volume"] = vz.volume;
    bmi.extras["volume_std_error"] = vz.std_error;
    bmi.extras["midpoints"] = static_cast<double>(z.points.size());
    bmi.extras["skipped_pairs"] = static_cast<double>(z.skipped_pairs);
    if (theta == kTwoPi) {
      bmi.discretization_note += "; Θ = 2π on the samples, which forces vol(A) = vol(B) = 0 for true sets";
      bmi.holds = Verdict::inconclusive;
    } else {
      bmi = finish(bmi);
    }

    BmReports rep{bmi, std::nullopt};
    if (opt.with_sbmi) {
      InequalityReport sb;
      sb.name = "SBMI";
      sb.s = s;
      sb.discretization_note = note;
      sb.extras["theta"] = theta;
      if (!gp) {
        sb.discretization_note += "; " + center_note;
        sb.lhs = sb.rhs = sb.margin = std::numeric_limits<double>::quiet_NaN();
        sb.holds = Verdict::inconclusive;
      } else {
        const auto mus = interpolate(*gp, s);
        const auto vs = estimate_volume(mus.points, opt.r, opt.grid, bound);
        sb.lhs = std::pow(vs.volume, 1.0 / dim);
        sb.rhs = bmi.rhs;
        sb.margin = sb.lhs - sb.rhs;
        sb.mc_stderr = root_volume_se(vs.volume, vs.std_error, dim);
        sb.extras["volume"] = vs.volume;
        sb.extras["volume_std_error"] = vs.std_error;
        sb.extras["support_points"] = static_cast<double>(mus.size());
        sb.extras["lhs_bmi"] = bmi.lhs;
        const double se_c = std::hypot(sb.mc_stderr, bmi.mc_stderr);
        sb.extras["containment_margin"] = bmi.lhs - sb.lhs;
        sb.extras["containment_stderr"] = se_c;
        sb.extras["containment_holds"] = (sb.lhs <= bmi.lhs + 3.0 * se_c) ? 1.0 : 0.0;
        if (theta == kTwoPi) {
          sb.holds = Verdict::inconclusive;
        } else {
          sb = finish(sb);
        }
      }
      rep.sbmi = sb;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

InequalityReport verify_bmi(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                            double r, double h) {
  const double sv[] = {s};
  BmOptions opt;
  opt.r = r;
  opt.grid = Grid::cubic(h);
  opt.with_sbmi = false;
  return verify_bm_samples(sample_sets(a, b, count, seed), sv, opt).front().bmi;
}

InequalityReport verify_sbmi(const Region& a, const Region& b, double s, std::size_t count, std::uint64_t seed,
                             double r, double h) {
  const double sv[] = {s};
  BmOptions opt;
  opt.r = r;
  opt.grid = Grid::cubic(h);
  return *verify_bm_samples(sample_sets(a, b, count, seed), sv, opt).front().sbmi;
}

// ---- grid functions and BBL ----

GridFunction GridFunction::zeros(std::vector<double> spacing, std::vector<std::int64_t> first,
                                 std::vector<std::size_t> dims) {
  if (spacing.size() != first.size() || spacing.size() != dims.size() || spacing.size() < 3 ||
      spacing.size() % 2 == 0) {
    throw DimensionError("grid function needs 2n+1 axes");
  }
  GridFunction g;
  std::size_t total = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (!(spacing[k] > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (dims[k] == 0) throw std::invalid_argument("grid function needs at least one cell per axis");
    total *= dims[k];
  }
  g.spacing = std::move(spacing);
  g.first = std::move(first);
  g.dims = std::move(dims);
  g.values.assign(total, 0.0);
  return g;
}

GridFunction GridFunction::box_indicator(const Region& a, std::vector<double> spacing, double c) {
  if (a.kind() != Region::Kind::box) throw std::invalid_argument("box_indicator: region must be a box");
  const auto& iv = a.intervals();
  if (spacing.size() != iv.size()) throw DimensionError("box_indicator: spacing has the wrong length");
  std::vector<std::int64_t> first;
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < iv.size(); ++k) {
    const double lo = iv[k].lo / spacing[k];
    const double hi = iv[k].hi / spacing[k];
    const double rlo = std::round(lo);
    const double rhi = std::round(hi);
    if (std::abs(lo - rlo) > 1e-9 * std::max(1.0, std::abs(lo)) || std::abs(hi - rhi) > 1e-9 * std::max(1.0, std::abs(hi))) {
      throw std::invalid_argument("box_indicator: box is not aligned with the grid");
    }
    first.push_back(static_cast<std::int64_t>(rlo));
    dims.push_back(static_cast<std::size_t>(rhi - rlo));
  }
  auto g = zeros(std::move(spacing), std::move(first), std::move(dims));
  std::fill(g.values.begin(), g.values.end(), c);
  return g;
}

std::vector<Interval> GridFunction::box() const {
  std::vector<Interval> out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out.push_back({static_cast<double>(first[k]) * spacing[k],
                   static_cast<double>(first[k] + static_cast<std::int64_t>(dims[k])) * spacing[k]});
  }
  return out;
}

double GridFunction::cell_volume() const {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

double GridFunction::integral() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * cell_volume();
}

bool GridFunction::locate(std::span<const double> p, std::size_t& index) const {
  if (p.size() != dims.size()) throw DimensionError("grid function: point dimension differs");
  std::size_t acc = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const std::int64_t c = detail::cell_index(p[k], spacing[k]) - first[k];
    if (c < 0 || c >= static_cast<std::int64_t>(dims[k])) return false;
    acc = acc * dims[k] + static_cast<std::size_t>(c);
  }
  index = acc;
  return true;
}

double GridFunction::value_at(std::span<const double> p) const {
  std::size_t idx;
  return locate(p, idx) ? values[idx] : 0.0;
}

std::vector<std::int64_t> GridFunction::cell_key(std::size_t index) const {
  std::vector<std::int64_t> key(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    key[k] = first[k] + static_cast<std::int64_t>(index % dims[k]);
    index /= dims[k];
  }
  return key;
}

GridFunction GridFunction::embedded(std::vector<std::int64_t> new_first, std::vector<std::size_t> new_dims) const {
  auto g = zeros(spacing, std::move(new_first), std::move(new_dims));
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (first[k] < g.first[k] ||
        first[k] + static_cast<std::int64_t>(dims[k]) > g.first[k] + static_cast<std::int64_t>(g.dims[k])) {
      throw std::invalid_argument("embedded: target block does not contain the function's block");
    }
  }
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (values[idx] == 0.0) continue;
    const auto key = cell_key(idx);
    std::size_t acc = 0;
    for (std::size_t k = 0; k < key.size(); ++k) acc = acc * g.dims[k] + static_cast<std::size_t>(key[k] - g.first[k]);
    g.values[acc] = values[idx];
  }
  return g;
}

GridFunction GridFunction::scaled(double c) const {
  GridFunction g = *this;
  for (double& v : g.values) v *= c;
  return g;
}

std::vector<std::pair<std::vector<double>, std::vector<double>>> bbl_sample_pairs(
    const GridFunction& f, const GridFunction& g, std::size_t count, std::uint64_t seed) {
  auto support = [](const GridFunction& fn) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < fn.values.size(); ++i) {
      if (fn.values[i] > 0.0) s.push_back(i);
    }
    return s;
  };
  const auto sf = support(f);
  const auto sg = support(g);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  if (sf.empty() || sg.empty()) return out;
  const std::size_t stride = f.dims.size();
  auto draw = [&](const GridFunction& fn, const std::vector<std::size_t>& sup, const CounterRng& rng,
                  std::uint64_t& next) {
    auto pick = static_cast<std::size_t>(rng.uniform(next++) * static_cast<double>(sup.size()));
    pick = std::min(pick, sup.size() - 1);
    const auto key = fn.cell_key(sup[pick]);
    std::vector<double> p(stride);
    for (std::size_t k = 0; k < stride; ++k) {
      p[k] = (static_cast<double>(key[k]) + rng.uniform(next++)) * fn.spacing[k];
    }
    return p;
  };
  for (std::size_t q = 0; q < count; ++q) {
    const CounterRng rng(seed, q);
    std::uint64_t next = 0;
    auto x = draw(f, sf, rng, next);
    auto y = draw(g, sg, rng, next);
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

InequalityReport verify_bbl(const GridFunction& f, const GridFunction& g, const GridFunction& h, double s, double p,
                            std::size_t samples, std::uint64_t seed) {
  const int n = f.n();
  if (g.n() != n || h.n() != n) throw DimensionError("verify_bbl: grid functions live in different groups");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("verify_bbl: s must lie in (0, 1)");
  const double d = 2.0 * n + 1.0;
  if (!(p >= -1.0 / d)) throw std::invalid_argument("verify_bbl: p must be >= -1/(2n+1)");
  for (const auto* fn : {&f, &g, &h}) {
    for (double v : fn->values) {
      if (!(v >= 0.0)) throw std::invalid_argument("verify_bbl: grid functions must be nonnegative");
    }
  }

  std::vector<double> z(static_cast<std::size_t>(2 * n + 1));
  std::size_t checked = 0;
  for (const auto& [x, y] : bbl_sample_pairs(f, g, samples, seed)) {
    double th = 0.0;
    if (!detail::midpoint_raw(s, x.data(), y.data(), z.data(), n, &th)) continue;  // τ̃ = ∞: bound is 0
    const double ta = tau_tilde(n, 1.0 - s, th);
    const double tb = tau_tilde(n, s, th);
    const double need = p_mean(p, s, f.value_at(x) / std::pow(ta, d), g.value_at(y) / std::pow(tb, d));
    const double have = h.value_at(z);
    ++checked;
    if (have < need * (1.0 - 1e-12)) {
      throw HypothesisViolated("BBL hypothesis fails: h(z) = " + std::to_string(have) + " < " + std::to_string(need),
                               x, y, z);
    }
  }

  double q;
  if (std::isinf(p)) q = p > 0.0 ? 1.0 / d : -1.0 / d;
  else if (1.0 + d * p == 0.0) q = -kInf;
  else q = p / (1.0 + d * p);

  InequalityReport rep;
  rep.name = "BBL";
  rep.s = s;
  rep.lhs = h.integral();
  rep.rhs = p_mean(q, s, f.integral(), g.integral());
  rep.margin = rep.lhs - rep.rhs;
  rep.mc_stderr = 0.0;
  rep.discretization_note = "grid integrals; hypothesis checked on " + std::to_string(checked) + " sampled triples";
  rep.extras["p"] = p;
  rep.extras["mean_exponent"] = q;
  rep.extras["triples_checked"] = static_cast<double>(checked);
  return finish(rep);
}

BblInstance bbl_set_instance(const Region& a, const Region& b, double s, double h_cell, std::size_t samples,
                             std::uint64_t seed) {
  if (a.n() != b.n()) throw DimensionError("bbl_set_instance: regions live in different groups");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("bbl_set_instance: s must lie in (0, 1)");
  const int n = a.n();
  const double d = 2.0 * n + 1.0;
  const std::vector<double> spacing(static_cast<std::size_t>(2 * n + 1), h_cell);
  auto fa = GridFunction::box_indicator(a, spacing);
  auto gb = GridFunction::box_indicator(b, spacing);
  const auto pairs = bbl_sample_pairs(fa, gb, samples, seed);

  BblInstance inst;
  inst.theta = kTwoPi;
  PointCloud mids(n);
  std::vector<double> z(static_cast<std::size_t>(2 * n + 1));
  for (const auto& [x, y] : pairs) {
    double th = 0.0;
    if (detail::midpoint_raw(s, x.data(), y.data(), z.data(), n, &th)) mids.push_back(z);
    inst.theta = std::min(inst.theta, th);
  }
  if (mids.empty()) throw std::invalid_argument("bbl_set_instance: every sampled pair is central");

  // Block covering A, B and all midpoints.
  std::vector<std::int64_t> lo(spacing.size()), hi(spacing.size());
  for (std::size_t k = 0; k < spacing.size(); ++k) {
    lo[k] = std::min(fa.first[k], gb.first[k]);
    hi[k] = std::max(fa.first[k] + static_cast<std::int64_t>(fa.dims[k]),
                     gb.first[k] + static_cast<std::int64_t>(gb.dims[k]));
    for (std::size_t i = 0; i < mids.size(); ++i) {
      const auto c = detail::cell_index(mids[i][k], h_cell);
      lo[k] = std::min(lo[k], c);
      hi[k] = std::max(hi[k], c + 1);
    }
  }
  std::vector<std::size_t> dims(spacing.size());
  for (std::size_t k = 0; k < spacing.size(); ++k) dims[k] = static_cast<std::size_t>(hi[k] - lo[k]);

  const double c1 = tau_tilde(n, 1.0 - s, inst.theta);
  const double c2 = tau_tilde(n, s, inst.theta);
  inst.f = fa.embedded(lo, dims).scaled(std::pow(c1, d));
  inst.g = gb.embedded(lo, dims).scaled(std::pow(c2, d));
  inst.h = GridFunction::zeros(spacing, lo, dims);
  for (std::size_t i = 0; i < mids.size(); ++i) {
    std::size_t idx;
    if (inst.h.locate(mids[i], idx)) inst.h.values[idx] = 1.0;
  }
  return inst;
}

std::vector<StepLimitRow> step_limit_experiment(const DiscreteMeasure& mu, const Region& k_mu,
                                                const DiscreteMeasure& nu, const Region& k_nu,
                                                std::span<const int> depths, double s) {
  std::vector<StepLimitRow> rows;
  const auto self_mu = cost_matrix(mu, mu);
  const auto self_nu = cost_matrix(nu, nu);
  const auto cross = cost_matrix(mu, nu);
  for (int depth : depths) {
    const auto sm = step_approximate(mu, k_mu, depth);
    const auto sn = step_approximate(nu, k_nu, depth);
    StepLimitRow row;
    row.depth = depth;
    row.w2_source = std::sqrt(std::max(0.0, solve_exact(self_mu, sm.on_support.weights, mu.weights).cost));
    row.w2_target = std::sqrt(std::max(0.0, solve_exact(self_nu, sn.on_support.weights, nu.weights).cost));
    const auto plan = solve_exact(cross, sm.on_support.weights, sn.on_support.weights);
    row.functional = cd_functional(plan, sm.on_support, sn.on_support, s);
    rows.push_back(row);
  }
  if (!mu.density || !nu.density) {
    throw std::invalid_argument("step_limit_experiment: marginals need densities for the exact functional");
  }
  StepLimitRow exact;
  exact.functional = cd_functional(solve_exact(cross, mu.weights, nu.weights), mu, nu, s);
  rows.push_back(exact);
  return rows;
}

StepLimitInstance two_level_instance(int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("two_level_instance: per_axis must be positive");
  const double m = per_axis;
  const double cell = 1.0 / (m * m * m);
  StepLimitInstance inst;
  inst.mu = DiscreteMeasure(1);
  inst.nu = DiscreteMeasure(1);
  inst.mu.density.emplace();
  inst.nu.density.emplace();
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      for (int k = 0; k < per_axis; ++k) {
        const double xi = (i + 0.5) / m, eta = (j + 0.5) / m, t = (k + 0.5) / m;
        const double rm = xi < 0.25 ? 1.6 : 0.8;
        const double rn = t >= 0.5 ? 1.5 : 0.5;
        const double p[] = {xi, eta, t};
        const double q[] = {xi + 2.0, eta, t};
        inst.mu.points.push_back(p);
        inst.mu.weights.push_back(rm * cell);
        inst.mu.density->push_back(rm);
        inst.nu.points.push_back(q);
        inst.nu.weights.push_back(rn * cell);
        inst.nu.density->push_back(rn);
      }
    }
  }
  inst.k_nu = Region::box({{2.0, 3.0}, {0.0, 1.0}, {0.0, 1.0}});
  return inst;
}

}  // namespace heis
