#include "heis/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <stdexcept>

#include "heis/geodesy.hpp"
#include "heis/parallel.hpp"

namespace heis {

double Grid::cell_volume(int n) const { return std::pow(h_horizontal, 2 * n) * h_vertical; }

void DiscreteMeasure::validate() const {
  if (weights.size() != points.size()) throw std::invalid_argument("measure: weight count differs from point count");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("measure: weights must be positive and finite");
    total += w;
  }
  if (!points.empty() && std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("measure: weights must sum to 1 (got " + std::to_string(total) + ")");
  }
  if (density && density->size() != points.size()) throw std::invalid_argument("measure: density count differs");
}

DiscreteMeasure empirical_measure(PointCloud points) {
  DiscreteMeasure m(points.n());
  const std::size_t count = points.size();
  m.points = std::move(points);
  m.weights.assign(count, count ? 1.0 / static_cast<double>(count) : 0.0);
  return m;
}

DiscreteMeasure normalized_measure(const Region& a, std::size_t count, std::uint64_t seed) {
  DiscreteMeasure m = empirical_measure(sample_uniform(a, count, seed));
  m.density = std::vector<double>(count, 1.0 / a.volume());
  return m;
}

namespace detail {

std::int64_t cell_index(double coord, double h) { return static_cast<std::int64_t>(std::floor(coord / h)); }

}  // namespace detail

namespace {

// Point indices grouped by grid cell, cells in lexicographic key order and
// points by index inside a cell.
std::vector<std::vector<std::size_t>> group_by_cell(const PointCloud& pts, const Grid& grid) {
  const int n = pts.n();
  const int stride = pts.stride();
  const std::size_t count = pts.size();
  std::vector<std::int64_t> keys(count * static_cast<std::size_t>(stride));
  for (std::size_t i = 0; i < count; ++i) {
    auto p = pts[i];
    for (int k = 0; k < stride; ++k) keys[i * stride + k] = detail::cell_index(p[k], grid.spacing(k, n));
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (int k = 0; k < stride; ++k) {
      const auto ka = keys[a * stride + k];
      const auto kb = keys[b * stride + k];
      if (ka != kb) return ka < kb;
    }
    return a < b;
  });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t pos = 0; pos < count; ++pos) {
    const std::size_t i = order[pos];
    bool same = pos > 0;
    if (same) {
      const std::size_t j = order[pos - 1];
      for (int k = 0; k < stride; ++k) {
        if (keys[i * stride + k] != keys[j * stride + k]) {
          same = false;
          break;
        }
      }
    }
    if (!same) groups.emplace_back();
    groups.back().push_back(i);
  }
  return groups;
}

}  // namespace

DiscreteMeasure estimate_density(const DiscreteMeasure& m, const Grid& grid) {
  if (!(grid.h_horizontal > 0.0) || !(grid.h_vertical > 0.0)) {
    throw std::invalid_argument("estimate_density: cell size must be positive");
  }
  if (m.weights.size() != m.points.size()) throw std::invalid_argument("measure: weight count differs from point count");
  DiscreteMeasure out = m;
  const double cell = grid.cell_volume(m.n());
  std::vector<double> rho(m.size(), 0.0);
  for (const auto& g : group_by_cell(m.points, grid)) {
    double mass = 0.0;
    for (std::size_t i : g) mass += m.weights[i];
    for (std::size_t i : g) rho[i] = mass / cell;
  }
  out.density = std::move(rho);
  out.density_grid = grid;
  return out;
}

double renyi_entropy(const DiscreteMeasure& m) {
  if (!m.density) throw std::invalid_argument("renyi_entropy: measure has no density; call estimate_density first");
  const double expo = -1.0 / (2.0 * m.n() + 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rho = (*m.density)[i];
    if (!(rho > 0.0)) throw std::invalid_argument("renyi_entropy: density must be positive where mass sits");
    acc += m.weights[i] * std::pow(rho, expo);
  }
  return -acc;
}

double theta_deviation(const PointCloud& a, const PointCloud& b) {
  if (a.n() != b.n()) throw DimensionError("theta_deviation: clouds live in different groups");
  if (a.empty() || b.empty()) throw std::invalid_argument("theta_deviation: both samples must be nonempty");
  const int n = a.n();
  std::vector<double> row_min(a.size(), 2.0 * std::numbers::pi);
  parallel_for(a.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = row_min[i];
      for (std::size_t j = 0; j < b.size() && best > 0.0; ++j) {
        best = std::min(best, detail::angle_raw(a[i].data(), b[j].data(), n));
      }
      row_min[i] = best;
    }
  }, 8);
  return *std::min_element(row_min.begin(), row_min.end());
}

double StepMeasure::total_mass() const {
  double acc = 0.0;
  for (const auto& p : pieces) acc += p.mass;
  return acc;
}

StepMeasure step_approximate(const DiscreteMeasure& m, const Region& k, int depth) {
  if (depth < 0 || depth > 60) throw std::invalid_argument("step_approximate: depth must lie in [0, 60]");
  if (m.n() != k.n()) throw DimensionError("step_approximate: measure and region live in different groups");
  m.validate();
  const auto root = k.bounding_box();
  const int stride = m.points.stride();
  const std::size_t count = m.size();

  // Leaf path of each point: bit l set when the point lies in the upper half
  // at level l.
  std::vector<std::uint64_t> leaf(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    auto p = m.points[i];
    auto box = root;
    for (int k2 = 0; k2 < stride; ++k2) {
      if (p[k2] < box[k2].lo || p[k2] > box[k2].hi) {
        throw std::invalid_argument("step_approximate: measure is not supported in the region's bounding box");
      }
    }
    std::uint64_t path = 0;
    for (int l = 0; l < depth; ++l) {
      const int axis = l % stride;
      const double mid = 0.5 * (box[axis].lo + box[axis].hi);
      if (p[axis] >= mid) {
        path |= std::uint64_t{1} << l;
        box[axis].lo = mid;
      } else {
        box[axis].hi = mid;
      }
    }
    leaf[i] = path;
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return leaf[a] < leaf[b]; });

  StepMeasure out;
  out.on_support = m;
  out.on_support.density = std::vector<double>(count, 0.0);
  out.on_support.density_grid.reset();
  for (std::size_t pos = 0; pos < count;) {
    std::size_t end = pos;
    while (end < count && leaf[order[end]] == leaf[order[pos]]) ++end;
    StepPiece piece;
    piece.box = root;
    for (int l = 0; l < depth; ++l) {
      const int axis = l % stride;
      const double mid = 0.5 * (piece.box[axis].lo + piece.box[axis].hi);
      if ((leaf[order[pos]] >> l) & 1U) piece.box[axis].lo = mid;
      else piece.box[axis].hi = mid;
    }
    double vol = 1.0;
    for (const auto& iv : piece.box) vol *= iv.width();
    double share_total = 0.0;
    for (std::size_t q = pos; q < end; ++q) {
      const std::size_t i = order[q];
      piece.mass += m.weights[i];
      share_total += m.density ? m.weights[i] / (*m.density)[i] : 1.0;
    }
    piece.level = piece.mass / vol;
    for (std::size_t q = pos; q < end; ++q) {
      const std::size_t i = order[q];
      const double share = m.density ? m.weights[i] / (*m.density)[i] : 1.0;
      out.on_support.weights[i] = piece.mass * share / share_total;
      (*out.on_support.density)[i] = piece.level;
    }
    out.pieces.push_back(std::move(piece));
    pos = end;
  }
  return out;
}

Region grid_bounding_box(const PointCloud& points, const Grid& grid) {
  if (points.empty()) throw std::invalid_argument("grid_bounding_box: no points");
  const int n = points.n();
  const int stride = points.stride();
  std::vector<Interval> iv(static_cast<std::size_t>(stride));
  for (int k = 0; k < stride; ++k) {
    double lo = points[0][k];
    double hi = lo;
    for (std::size_t i = 1; i < points.size(); ++i) {
      lo = std::min(lo, points[i][k]);
      hi = std::max(hi, points[i][k]);
    }
    const double h = grid.spacing(k, n);
    iv[k] = {static_cast<double>(detail::cell_index(lo, h)) * h, static_cast<double>(detail::cell_index(hi, h) + 1) * h};
  }
  return Region::box(std::move(iv));
}

}  // namespace heis
