// Acceptance gate: one pass/fail line per criterion. With arguments, runs
// only the criteria whose number or slug is listed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "heis/distortion.hpp"
#include "heis/geodesy.hpp"
#include "heis/verify.hpp"
#include "support.hpp"

using namespace heis;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int number;
  std::string slug;
  std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Region box3(double a, double b, double c, double d, double e, double f) { return Region::box({{a, b}, {c, d}, {e, f}}); }

struct Pair {
  const char* label;
  Region a, b;
};

std::vector<Pair> region_pairs() {
  return {{"identical", Region::unit_box(1), Region::unit_box(1)},
          {"offset", Region::unit_box(1), box3(2, 3, 0, 1, 0, 1)}};
}

const std::vector<double> kSValues{0.0, 0.25, 0.5, 0.75, 1.0};
constexpr std::uint64_t kSeed = 2024;

bool endpoint(double s) { return s == 0.0 || s == 1.0; }

Outcome round_trip() {
  testing::Gen g(101);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  int done = 0;
  while (done < 1000) {
    auto y = g.point(1, 2.0);
    if (angle(HPoint(1), y) > 2 * kPi - 0.1) continue;
    auto inv = gamma_inverse(y);
    worst = std::max(worst, coord_distance_inf(gamma(1.0, inv.params[0]).coords(), y.coords()));
    ++done;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 2.0, fmt("max error %.3g", worst) + fmt(", %.3f s", secs)};
}

Outcome metric_suite() {
  testing::Gen g(102);
  bool sym = true;
  double tri = 0, left = 0, dil = 0;
  for (int k = 0; k < 10000; ++k) {
    auto x = g.point(1), y = g.point(1), z = g.point(1);
    const double dxy = cc_distance(x, y);
    sym = sym && dxy == cc_distance(y, x);
    tri = std::max(tri, dxy - cc_distance(x, z) - cc_distance(z, y));
    left = std::max(left, std::abs(cc_distance(z * x, z * y) - dxy));
    const double lambda = g.uniform(0.1, 10.0);
    dil = std::max(dil, std::abs(cc_distance(dilate(lambda, x), dilate(lambda, y)) - lambda * dxy) /
                            std::max(1.0, lambda));
  }
  std::string d = std::string("symmetry ") + (sym ? "exact" : "BROKEN") + fmt(", triangle excess %.3g", tri) +
                  fmt(", left-invariance %.3g", left) + fmt(", dilation %.3g", dil);
  return {sym && tri <= 1e-9 && left <= 1e-9 && dil <= 1e-9, d};
}

Outcome center_distance() {
  double worst = 0;
  for (double t : {0.1, 1.0, 10.0}) {
    worst = std::max(worst, std::abs(cc_distance(HPoint(1), HPoint::h1(0, 0, t)) - std::sqrt(kPi * t)));
  }
  return {worst <= 1e-9, fmt("max error %.3g", worst)};
}

Outcome distortion_suite() {
  double closed = 0;
  for (int k = 0; k < 100; ++k) {
    const double s = (k + 0.5) / 100.0;
    closed = std::max(closed, std::abs(tau(1, s, 0.0) - std::pow(s, 5.0 / 3.0)));
  }
  bool monotone = true, floor_ok = true;
  for (double s : {0.05, 0.25, 0.5, 0.75, 0.95, 1.0}) {
    double prev = -1;
    const double floor = std::pow(s, 5.0 / 3.0);
    for (int k = 0; k < 10000; ++k) {
      const double th = (2 * kPi - 1e-6) * k / 9999.0;
      const double v = tau(1, s, th);
      monotone = monotone && v >= prev;
      floor_ok = floor_ok && v >= floor * (1 - 1e-15);
      prev = v;
    }
  }
  const double blow = tau(1, 0.5, 2 * kPi - 1e-6);
  std::string d = fmt("closed form error %.3g", closed) + ", monotone " + (monotone ? "yes" : "NO") + ", lower bound " +
                  (floor_ok ? "yes" : "NO") + fmt(", tau(2pi-1e-6) = %.6g (needs > 1000)", blow);
  return {closed <= 1e-12 && monotone && floor_ok && blow > 1e3, d};
}

Outcome exact_ot_oracle() {
  testing::Gen g(105);
  int mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 1 + static_cast<std::size_t>(k % 6);
    PointCloud a(1), b(1);
    for (std::size_t i = 0; i < m; ++i) {
      a.push_back(g.point(1, 1.5));
      b.push_back(g.point(1, 1.5));
    }
    auto c = cost_matrix(a, b);
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const double got = solve_exact(c, w, w).cost;
    const double want = testing::brute_assignment(c.cost, static_cast<int>(m));
    if (std::llround(got / 1e-12) != std::llround(want / 1e-12)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 50 instances differ after rounding at 1e-12"};
}

Outcome sinkhorn_accuracy() {
  double worst = 0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto x = sample_sets(Region::unit_box(1), box3(1, 2, 0, 1, 0, 1), 50, 600 + 2 * k);
    auto c = cost_matrix(x.a, x.b);
    std::vector<double> w(50, 1.0 / 50);
    const double exact = std::sqrt(solve_exact(c, w, w).cost);
    SinkhornOptions opt;
    opt.epsilon = 0.01 * median_cost(c);
    const double sk = std::sqrt(solve_sinkhorn(c, w, w, opt).cost);
    worst = std::max(worst, std::abs(sk - exact) / exact);
  }
  return {worst <= 0.02, fmt("max relative W2 error %.4g over 5 instances", worst)};
}

Outcome wasserstein_geodesic() {
  double worst = 0;
  for (const auto& p : region_pairs()) {
    auto x = sample_sets(p.a, p.b, 64, kSeed);
    auto mu0 = empirical_measure(x.a), mu1 = empirical_measure(x.b);
    auto gp = optimal_geodesic_plan(mu0, mu1);
    const double d = std::sqrt(gp.plan().cost);
    for (double s : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, std::abs(w2(mu0, interpolate(gp, s)) - s * d) / d);
    }
  }
  return {worst <= 1e-3, fmt("max |W2(mu0,mu_s) - s W2| / W2 = %.3g", worst)};
}

struct CdRun {
  std::vector<InequalityReport> reports;
  double seconds = 0;
};

std::vector<CdRun> cd_runs() {
  std::vector<CdRun> out;
  for (const auto& p : region_pairs()) {
    const auto t0 = std::chrono::steady_clock::now();
    CdRun r;
    r.reports = verify_cd_samples(sample_sets(p.a, p.b, 400, kSeed), kSValues, CdOptions{});
    r.seconds = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

std::string line(const char* label, const InequalityReport& r) {
  std::ostringstream os;
  os << "\n      " << label << " " << r.name << " s=" << r.s << " margin=" << r.margin << " se=" << r.mc_stderr << " "
     << to_string(r.holds);
  return os.str();
}

Outcome cd_inequality() {
  bool ok = true;
  std::string d;
  const auto runs = cd_runs();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    ok = ok && run.seconds < 60.0;
    for (const auto& r : run.reports) {
      const double band = 3 * r.mc_stderr;
      if (endpoint(r.s)) {
        ok = ok && std::abs(r.margin) <= band;
      } else {
        ok = ok && r.holds != Verdict::fails && r.margin >= -band;
      }
      d += line(region_pairs()[k].label, r);
    }
    d += fmt("\n      runtime %.2f s", run.seconds);
  }
  return {ok, d};
}

Outcome bmi() {
  bool ok = true;
  std::string d;
  BmOptions opt;
  opt.r = 0.05;
  opt.grid = Grid::cubic(0.05);
  opt.with_sbmi = false;
  for (const auto& p : region_pairs()) {
    for (const auto& rep : verify_bm_samples(sample_sets(p.a, p.b, 2000, kSeed), kSValues, opt)) {
      const auto& r = rep.bmi;
      if (endpoint(r.s)) ok = ok && std::abs(r.margin) <= 3 * r.mc_stderr;
      else ok = ok && r.holds == Verdict::holds;
      d += line(p.label, r);
    }
  }
  return {ok, d};
}

Outcome sbmi() {
  bool ok = true;
  std::string d;
  BmOptions opt;
  opt.r = 0.05;
  opt.grid = Grid::cubic(0.05);
  for (const auto& p : region_pairs()) {
    for (const auto& rep : verify_bm_samples(sample_sets(p.a, p.b, 2000, kSeed), kSValues, opt)) {
      const auto& r = *rep.sbmi;
      if (!endpoint(r.s)) ok = ok && r.holds == Verdict::holds;
      const bool contained = r.lhs <= rep.bmi.lhs + 3 * r.mc_stderr;
      ok = ok && contained;
      d += line(p.label, r) + fmt(" lhs_BMI=%.6g", rep.bmi.lhs) + (contained ? " contained" : " NOT contained");
    }
  }
  return {ok, d};
}

Outcome jensen() {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& run : cd_runs()) {
    for (const auto& r : run.reports) {
      worst = std::min(worst, r.lhs + std::cbrt(r.extras.at("support_volume")) + 0.05);
    }
  }
  return {worst >= 0.0, fmt("min of Ent + V^(1/3) + 0.05 over all runs: %.4g", worst)};
}

Outcome dilation_invariance() {
  bool ok = true;
  int compared = 0;
  const std::vector<double> sv{0.25, 0.5, 0.75};
  for (const auto& p : region_pairs()) {
    const auto base = sample_sets(p.a, p.b, 400, kSeed);
    CdOptions cd;
    BmOptions bm;
    bm.r = 0.05;
    bm.grid = Grid::cubic(0.05);
    auto collect = [&](const SetSample& x, double lambda) {
      CdOptions c = cd;
      c.grid = cd.grid.dilated(lambda);
      BmOptions b = bm;
      b.grid = bm.grid.dilated(lambda);
      b.r = bm.r * lambda;
      auto reps = verify_cd_samples(x, sv, c);
      for (auto& r : verify_bm_samples(x, sv, b)) {
        reps.push_back(r.bmi);
        reps.push_back(*r.sbmi);
      }
      return reps;
    };
    const auto ref = collect(base, 1.0);
    for (double lambda : {2.0, 4.0}) {
      const auto reps = collect(dilated(base, lambda), lambda);
      for (std::size_t k = 0; k < reps.size(); ++k) {
        ok = ok && reps[k].extras.at("theta") == ref[k].extras.at("theta") && reps[k].holds == ref[k].holds;
        ++compared;
      }
    }
  }
  return {ok, std::to_string(compared) + " dilated reports compared (CD, BMI, SBMI; lambda = 2, 4)"};
}

Outcome step_limit() {
  const auto inst = two_level_instance(8);
  const int depths[] = {0, 1, 2, 3, 4, 5};
  const auto rows = step_limit_experiment(inst.mu, inst.k_mu, inst.nu, inst.k_nu, depths, 0.5);
  bool monotone = true;
  std::string d;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (k > 0 && r.depth > 0) {
      monotone = monotone && r.w2_source <= rows[k - 1].w2_source + 1e-9 && r.w2_target <= rows[k - 1].w2_target + 1e-9;
    }
    std::ostringstream os;
    os << "\n      depth " << (r.depth < 0 ? std::string("exact") : std::to_string(r.depth)) << ": W2 source "
       << r.w2_source << ", W2 target " << r.w2_target << ", F " << r.functional;
    d += os.str();
  }
  const double f5 = rows[rows.size() - 2].functional, fx = rows.back().functional;
  const double rel = std::abs(f5 - fx) / std::abs(fx);
  d += fmt("\n      |F(5) - F(exact)| / |F(exact)| = %.3g", rel);
  return {monotone && rel <= 0.02, d};
}

Outcome entropy_closed_forms() {
  const double h = 0.05;
  auto uniform = estimate_density(empirical_measure(sample_uniform(Region::unit_box(1), 10000, kSeed)), h);
  const double e1 = renyi_entropy(uniform);
  const Region two = Region::disjoint_union({Region::unit_box(1), box3(2, 3, 0, 1, 0, 1)});
  auto pair = estimate_density(empirical_measure(sample_uniform(two, 10000, kSeed)), h);
  const double e2 = renyi_entropy(pair);
  const double x1 = renyi_entropy(normalized_measure(Region::unit_box(1), 10000, kSeed));
  const double x2 = renyi_entropy(normalized_measure(two, 10000, kSeed));
  const bool ok = std::abs(e1 + 1.0) <= 0.02 && std::abs(e2 + std::cbrt(2.0)) <= 0.03;
  return {ok, fmt("histogram: box %.4f (target -1 +- 0.02)", e1) + fmt(", two boxes %.4f", e2) +
                  fmt(" (target %.4f +- 0.03)", -std::cbrt(2.0)) + fmt("; exact density: %.4f", x1) +
                  fmt(", %.4f", x2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "geodesic-round-trip", round_trip},      {2, "metric-suite", metric_suite},
      {3, "center-distance", center_distance},     {4, "distortion-suite", distortion_suite},
      {5, "exact-ot-oracle", exact_ot_oracle},     {6, "sinkhorn-accuracy", sinkhorn_accuracy},
      {7, "wasserstein-geodesic", wasserstein_geodesic}, {8, "cd-inequality", cd_inequality},
      {9, "bmi", bmi},                             {10, "sbmi", sbmi},
      {11, "jensen-bound", jensen},                {12, "dilation-invariance", dilation_invariance},
      {13, "step-limit", step_limit},              {14, "entropy-closed-forms", entropy_closed_forms},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  auto selected = [&](const Criterion& c) {
    if (wanted.empty()) return true;
    for (const auto& w : wanted) {
      if (w == c.slug || w == std::to_string(c.number)) return true;
    }
    return false;
  };
  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!selected(c)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", c.number, c.slug.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matches the arguments\n");
    return 1;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
