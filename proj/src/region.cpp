#include "heis/region.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "heis/geodesy.hpp"
#include "heis/parallel.hpp"
#include "heis/rng.hpp"

namespace heis {

namespace {

constexpr std::uint64_t kMaxRejections = 10'000'000;

bool boxes_overlap(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].hi <= b[k].lo || b[k].hi <= a[k].lo) return false;
  }
  return true;
}

// Draws one point of `region` into out, consuming rng indices from `next`.
void draw(const Region& region, const CounterRng& rng, std::uint64_t& next, double* out) {
  const int n = region.n();
  const int stride = 2 * n + 1;
  switch (region.kind()) {
    case Region::Kind::box: {
      const auto& iv = region.intervals();
      for (int k = 0; k < stride; ++k) out[k] = iv[k].lo + rng.uniform(next++) * iv[k].width();
      return;
    }
    case Region::Kind::cc_ball: {
      const double r = region.radius();
      const double hv = r * r * kUnitBallHeight;
      double u[64];
      std::vector<double> big;
      double* rel = u;
      if (stride > 64) {
        big.resize(static_cast<std::size_t>(stride));
        rel = big.data();
      }
      for (std::uint64_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        for (int k = 0; k < 2 * n; ++k) rel[k] = (2.0 * rng.uniform(next++) - 1.0) * r;
        rel[2 * n] = (2.0 * rng.uniform(next++) - 1.0) * hv;
        double z2 = 0.0;
        for (int k = 0; k < 2 * n; ++k) z2 += rel[k] * rel[k];
        if (z2 > r * r) continue;
        const double d = rel[2 * n] == 0.0 ? std::sqrt(z2) : detail::solve_radial(z2, rel[2 * n]).distance;
        if (d > r) continue;
        kernel::mul(region.center().coords().data(), rel, out, n);
        return;
      }
      throw std::runtime_error("cc_ball sampling exceeded the rejection budget");
    }
    case Region::Kind::union_of: {
      const auto& mem = region.members();
      const double total = region.volume();
      double u = rng.uniform(next++) * total;
      std::size_t pick = mem.size() - 1;
      for (std::size_t i = 0; i < mem.size(); ++i) {
        const double v = mem[i].volume();
        if (u < v) {
          pick = i;
          break;
        }
        u -= v;
      }
      draw(mem[pick], rng, next, out);
      return;
    }
  }
}

void check_balls(const Region& r) {
  if (r.kind() == Region::Kind::cc_ball && ball_acceptance_rate(r.n()) < 1e-4) {
    throw std::runtime_error("cc_ball rejection acceptance below 1e-4 in dimension n=" + std::to_string(r.n()) +
                             "; sample through a tighter bounding region");
  }
  for (const auto& m : r.members()) check_balls(m);
}

}  // namespace

Region Region::box(std::vector<Interval> intervals) {
  if (intervals.size() < 3 || intervals.size() % 2 == 0) {
    throw DimensionError("a box in H^n needs 2n+1 intervals, got " + std::to_string(intervals.size()));
  }
  for (const auto& iv : intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo)) {
      throw std::invalid_argument("box intervals must be finite and nonempty");
    }
  }
  Region r;
  r.kind_ = Kind::box;
  r.n_ = static_cast<int>(intervals.size() / 2);
  r.intervals_ = std::move(intervals);
  r.center_ = HPoint(r.n_);
  return r;
}

Region Region::unit_box(int n) {
  return box(std::vector<Interval>(static_cast<std::size_t>(2 * n + 1), Interval{0.0, 1.0}));
}

Region Region::cc_ball(HPoint center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be positive");
  Region r;
  r.kind_ = Kind::cc_ball;
  r.n_ = center.n();
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

Region Region::disjoint_union(std::vector<Region> members) {
  if (members.empty()) throw std::invalid_argument("union needs at least one member");
  const int n = members.front().n();
  for (const auto& m : members) {
    if (m.n() != n) throw DimensionError("union members live in different groups");
  }
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const auto& ma = members[a];
      const auto& mb = members[b];
      if (!boxes_overlap(ma.bounding_box(), mb.bounding_box())) continue;
      if (ma.kind() == Kind::box && mb.kind() == Kind::box) {
        throw std::invalid_argument("union members overlap");
      }
      // Non-box pairs whose bounding boxes meet: look for a common sample.
      const auto probe = sample_uniform(ma, 4096, 0x5eedULL + a * 131 + b);
      for (std::size_t i = 0; i < probe.size(); ++i) {
        if (mb.contains(probe[i])) throw std::invalid_argument("union members overlap");
      }
    }
  }
  Region r;
  r.kind_ = Kind::union_of;
  r.n_ = n;
  r.center_ = HPoint(n);
  r.members_ = std::move(members);
  return r;
}

bool Region::contains(std::span<const double> p) const {
  if (p.size() != static_cast<std::size_t>(2 * n_ + 1)) throw DimensionError("point dimension differs from region");
  switch (kind_) {
    case Kind::box:
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < intervals_[k].lo || p[k] > intervals_[k].hi) return false;
      }
      return true;
    case Kind::cc_ball:
      return detail::within_distance(center_.coords().data(), p.data(), n_, radius_);
    case Kind::union_of:
      return std::any_of(members_.begin(), members_.end(), [&](const Region& m) { return m.contains(p); });
  }
  return false;
}

double Region::volume() const {
  switch (kind_) {
    case Kind::box: {
      double v = 1.0;
      for (const auto& iv : intervals_) v *= iv.width();
      return v;
    }
    case Kind::cc_ball:
      return std::pow(radius_, 2 * n_ + 2) * unit_ball_volume(n_);
    case Kind::union_of: {
      double v = 0.0;
      for (const auto& m : members_) v += m.volume();
      return v;
    }
  }
  return 0.0;
}

std::vector<Interval> Region::bounding_box() const {
  switch (kind_) {
    case Kind::box:
      return intervals_;
    case Kind::cc_ball: {
      // x ∗ (u, τ) with |u| ≤ r, |τ| ≤ 2r²/π moves t by at most 2|ζ_x|r + 2r²/π.
      std::vector<Interval> out;
      auto c = center_.coords();
      for (int k = 0; k < 2 * n_; ++k) out.push_back({c[k] - radius_, c[k] + radius_});
      const double dt = 2.0 * std::sqrt(center_.horizontal_norm_sq()) * radius_ + radius_ * radius_ * kUnitBallHeight;
      out.push_back({c[2 * n_] - dt, c[2 * n_] + dt});
      return out;
    }
    case Kind::union_of: {
      auto out = members_.front().bounding_box();
      for (const auto& m : members_) {
        const auto bb = m.bounding_box();
        for (std::size_t k = 0; k < out.size(); ++k) {
          out[k].lo = std::min(out[k].lo, bb[k].lo);
          out[k].hi = std::max(out[k].hi, bb[k].hi);
        }
      }
      return out;
    }
  }
  return {};
}

Region Region::dilated(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("dilation factor must be positive");
  switch (kind_) {
    case Kind::box: {
      auto iv = intervals_;
      for (std::size_t k = 0; k < iv.size(); ++k) {
        const double f = (k + 1 == iv.size()) ? lambda * lambda : lambda;
        iv[k] = {iv[k].lo * f, iv[k].hi * f};
      }
      return box(std::move(iv));
    }
    case Kind::cc_ball:
      return cc_ball(dilate(lambda, center_), lambda * radius_);
    case Kind::union_of: {
      std::vector<Region> m;
      for (const auto& x : members_) m.push_back(x.dilated(lambda));
      Region r;
      r.kind_ = Kind::union_of;
      r.n_ = n_;
      r.center_ = HPoint(n_);
      r.members_ = std::move(m);
      return r;
    }
  }
  return *this;
}

double ball_acceptance_rate(int n) {
  // proposal volume (2r)^{2n} · 4r²/π at r = 1
  return unit_ball_volume(n) / (std::pow(2.0, 2 * n) * 2.0 * kUnitBallHeight);
}

PointCloud sample_uniform(const Region& region, std::size_t count, std::uint64_t seed) {
  check_balls(region);
  if (!(region.volume() > 0.0)) throw std::invalid_argument("cannot sample a region of zero volume");
  const int n = region.n();
  PointCloud out(n);
  out.resize(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CounterRng rng(seed, i);
      std::uint64_t next = 0;
      draw(region, rng, next, out[i].data());
    }
  });
  return out;
}

}  // namespace heis
