#include "heis/transport.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numbers>

#include "heis/network_simplex.hpp"
#include "heis/parallel.hpp"

namespace heis {

namespace {

void check_marginals(const CostMatrix& c, std::span<const double> a, std::span<const double> b) {
  if (a.size() != c.rows || b.size() != c.cols) throw std::invalid_argument("marginal sizes differ from cost matrix");
  double sa = 0.0;
  double sb = 0.0;
  for (double x : a) {
    if (!(x >= 0.0)) throw InfeasibleMarginals("marginal weights must be nonnegative");
    sa += x;
  }
  for (double x : b) {
    if (!(x >= 0.0)) throw InfeasibleMarginals("marginal weights must be nonnegative");
    sb += x;
  }
  if (std::abs(sa - sb) > 1e-9) {
    throw InfeasibleMarginals("marginal totals differ: " + std::to_string(sa) + " vs " + std::to_string(sb));
  }
}

double plan_cost(const CostMatrix& c, const std::vector<PlanEntry>& pairs) {
  double acc = 0.0;
  for (const auto& p : pairs) acc += p.mass * c.at(p.i, p.j);
  return acc;
}

double log_sum_exp(const double* v, std::size_t count) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) m = std::max(m, v[k]);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (std::size_t k = 0; k < count; ++k) acc += std::exp(v[k] - m);
  return m + std::log(acc);
}

}  // namespace

CostMatrix CostMatrix::transposed() const {
  CostMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.cost.resize(cost.size());
  t.angle.resize(angle.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      t.cost[j * rows + i] = cost[i * cols + j];
      t.angle[j * rows + i] = angle[i * cols + j];
    }
  }
  return t;
}

CostMatrix cost_matrix(const PointCloud& src, const PointCloud& tgt) {
  if (src.n() != tgt.n()) throw DimensionError("cost_matrix: clouds live in different groups");
  CostMatrix c;
  c.rows = src.size();
  c.cols = tgt.size();
  c.cost.resize(c.rows * c.cols);
  c.angle.resize(c.rows * c.cols);
  const int n = src.n();
  parallel_for(c.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < c.cols; ++j) {
        double z2 = 0.0;
        double t = 0.0;
        kernel::relative_radial(src[i].data(), tgt[j].data(), n, z2, t);
        double d = 0.0;
        double th = 0.0;
        if (t == 0.0) {
          d = std::sqrt(z2);
        } else {
          const auto r = detail::solve_radial(z2, t);
          d = r.distance;
          th = std::abs(r.theta);
        }
        c.cost[i * c.cols + j] = d * d;
        c.angle[i * c.cols + j] = th;
      }
    }
  }, 4);
  return c;
}

double median_cost(const CostMatrix& c) {
  if (c.cost.empty()) return 0.0;
  std::vector<double> v = c.cost;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double TransportPlan::marginal_violation(std::span<const double> a, std::span<const double> b) const {
  std::vector<double> ra(a.size(), 0.0);
  std::vector<double> cb(b.size(), 0.0);
  for (const auto& p : pairs) {
    ra.at(p.i) += p.mass;
    cb.at(p.j) += p.mass;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(ra[i] - a[i]));
  for (std::size_t j = 0; j < b.size(); ++j) worst = std::max(worst, std::abs(cb[j] - b[j]));
  return worst;
}

TransportPlan solve_exact(const CostMatrix& c, std::span<const double> a, std::span<const double> b) {
  check_marginals(c, a, b);
  TransportPlan plan;
  plan.method = Method::exact_lp;
  plan.rows = c.rows;
  plan.cols = c.cols;
  for (const auto& f : detail::network_simplex(c.cost.data(), c.rows, c.cols, a.data(), b.data())) {
    plan.pairs.push_back({f.i, f.j, f.mass});
  }
  plan.cost = plan_cost(c, plan.pairs);
  plan.regularized_cost = plan.cost;
  return plan;
}

namespace {
std::string short_double(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}
}  // namespace

TransportPlan solve_sinkhorn(const CostMatrix& c, std::span<const double> a, std::span<const double> b,
                             const SinkhornOptions& opt) {
  check_marginals(c, a, b);
  double eps = opt.epsilon;
  if (!(eps > 0.0)) eps = opt.epsilon_factor * median_cost(c);
  if (!(eps > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive (median cost is zero?)");
  const std::size_t m = c.rows;
  const std::size_t n = c.cols;
  std::vector<double> log_a(m), log_b(n);
  for (std::size_t i = 0; i < m; ++i) log_a[i] = a[i] > 0.0 ? std::log(a[i]) : -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) log_b[j] = b[j] > 0.0 ? std::log(b[j]) : -std::numeric_limits<double>::infinity();

  // Dual potentials f, g; π_ij = exp((f_i + g_j − C_ij)/ε). ε is annealed
  // from the largest cost down to the target, warm starting each stage.
  std::vector<double> f(m, 0.0), g(n, 0.0), buf(std::max(m, n));
  const double cmax = *std::max_element(c.cost.begin(), c.cost.end());
  std::vector<double> stages;
  for (double e = cmax; e > eps; e *= 0.5) stages.push_back(e);
  stages.push_back(eps);

  auto sweep = [&](double e) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) buf[j] = (g[j] - c.at(i, j)) / e;
      f[i] = e * (log_a[i] - log_sum_exp(buf.data(), n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) buf[i] = (f[i] - c.at(i, j)) / e;
      g[j] = e * (log_b[j] - log_sum_exp(buf.data(), m));
    }
  };
  auto row_violation = [&](double e) {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += std::exp((f[i] + g[j] - c.at(i, j)) / e);
      v += std::abs(row - a[i]);
    }
    return v;
  };

  double violation = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const bool last = k + 1 == stages.size();
    const double e = stages[k];
    const double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-4);
    violation = std::numeric_limits<double>::infinity();
    for (; it < opt.max_iter; ++it) {
      sweep(e);
      if (it % 10 == 9 || it + 1 == opt.max_iter) {
        violation = row_violation(e);
        if (violation <= stage_tol) {
          ++it;
          break;
        }
      }
    }
    if (it >= opt.max_iter) {
      if (!last) violation = std::numeric_limits<double>::infinity();
      break;
    }
  }
  if (!(violation <= opt.tol)) {
    throw SinkhornNotConverged("sinkhorn did not converge; last marginal violation " + short_double(violation),
                               violation);
  }
  TransportPlan plan;
  plan.method = Method::sinkhorn;
  plan.epsilon = eps;
  plan.rows = m;
  plan.cols = n;
  double entropy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp((f[i] + g[j] - c.at(i, j)) / eps);
      if (p > 0.0) entropy -= p * (std::log(p) - 1.0);
      if (p > opt.prune) plan.pairs.push_back({i, j, p});
    }
  }
  plan.cost = plan_cost(c, plan.pairs);
  plan.regularized_cost = plan.cost - eps * entropy;
  return plan;
}

double w2(const DiscreteMeasure& src, const DiscreteMeasure& tgt, Method method, const SinkhornOptions& opt) {
  const auto c = cost_matrix(src, tgt);
  const auto plan = method == Method::exact_lp ? solve_exact(c, src.weights, tgt.weights)
                                               : solve_sinkhorn(c, src.weights, tgt.weights, opt);
  return std::sqrt(std::max(0.0, plan.cost));
}

GeodesicPlan::GeodesicPlan(TransportPlan plan, DiscreteMeasure source, DiscreteMeasure target)
    : plan_(std::move(plan)), source_(std::move(source)), target_(std::move(target)) {
  if (source_.n() != target_.n()) throw DimensionError("geodesic plan: marginals live in different groups");
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  for (const auto& p : plan_.pairs) {
    if (p.i >= source_.size() || p.j >= target_.size()) throw std::invalid_argument("geodesic plan: index out of range");
    if (pair_angle(static_cast<std::size_t>(&p - plan_.pairs.data())) == 2.0 * std::numbers::pi) bad.emplace_back(p.i, p.j);
  }
  if (!bad.empty()) {
    std::string msg = "plan couples pairs differing by a central element:";
    for (std::size_t k = 0; k < bad.size() && k < 10; ++k) {
      msg += " (" + std::to_string(bad[k].first) + "," + std::to_string(bad[k].second) + ")";
    }
    throw CenterPairError(msg, std::move(bad));
  }
}

HPoint GeodesicPlan::evaluate(double s, std::size_t k) const {
  const auto& p = plan_.pairs.at(k);
  return midpoint(s, source_.points.point(p.i), target_.points.point(p.j));
}

double GeodesicPlan::pair_angle(std::size_t k) const {
  const auto& p = plan_.pairs.at(k);
  return detail::angle_raw(source_.points[p.i].data(), target_.points[p.j].data(), source_.n());
}

GeodesicPlan optimal_geodesic_plan(const DiscreteMeasure& src, const DiscreteMeasure& tgt, Method method,
                                   const SinkhornOptions& opt) {
  const auto c = cost_matrix(src, tgt);
  auto plan = method == Method::exact_lp ? solve_exact(c, src.weights, tgt.weights)
                                         : solve_sinkhorn(c, src.weights, tgt.weights, opt);
  return GeodesicPlan(std::move(plan), src, tgt);
}

DiscreteMeasure interpolate(const GeodesicPlan& gp, double s, double merge_tol) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("interpolate: s must lie in [0, 1]");
  const int n = gp.source().n();
  const auto& pairs = gp.plan().pairs;
  DiscreteMeasure out(n);
  out.points.resize(pairs.size());
  out.weights.resize(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    if (!detail::midpoint_raw(s, gp.source().points[p.i].data(), gp.target().points[p.j].data(),
                              out.points[k].data(), n, nullptr)) {
      throw CenterPairError("interpolate: central pair in plan", {{p.i, p.j}});
    }
    out.weights[k] = p.mass;
  }
  canonicalize(out.points, &out.weights, merge_tol);
  return out;
}

VolumeEstimate interpolant_support_volume(const GeodesicPlan& gp, double s, double r, const Grid& grid,
                                          const Region& bound) {
  return estimate_volume(interpolate(gp, s).points, r, grid, bound);
}

}  // namespace heis
