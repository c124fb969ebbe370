#include <doctest.h>

#include <cmath>
#include <limits>

#include "heis/distortion.hpp"
#include "heis/verify.hpp"
#include "support.hpp"

using namespace heis;

namespace {
Region box3(double a, double b, double c, double d, double e, double f) { return Region::box({{a, b}, {c, d}, {e, f}}); }
}  // namespace

TEST_CASE("tri-state classification") {
  CHECK(classify(1.0, 0.1, 0, 0) == Verdict::holds);
  CHECK(classify(-1.0, 0.1, 0, 0) == Verdict::fails);
  CHECK(classify(0.2, 0.1, 0, 0) == Verdict::inconclusive);
  CHECK(classify(-0.2, 0.1, 0, 0) == Verdict::inconclusive);
  CHECK(classify(0.0, 0.0, 1, 1) == Verdict::inconclusive);
  CHECK(classify(1e-15, 0.0, 1, 1) == Verdict::inconclusive);
  CHECK(classify(1e-9, 0.0, 1, 1) == Verdict::holds);
  CHECK(classify(std::numeric_limits<double>::quiet_NaN(), 0.0, 0, 0) == Verdict::inconclusive);
  CHECK(std::string(to_string(Verdict::fails)) == "fails");
}

TEST_CASE("CD functional collapses to the entropies at the endpoints") {
  auto mu0 = normalized_measure(Region::unit_box(1), 50, 1);
  auto mu1 = normalized_measure(box3(2, 3, 0, 1, 0, 1), 50, 2);
  auto plan = solve_exact(cost_matrix(mu0, mu1), mu0.weights, mu1.weights);
  CHECK(cd_functional(plan, mu0, mu1, 0.0) == doctest::Approx(renyi_entropy(mu0)).epsilon(1e-12));
  CHECK(cd_functional(plan, mu0, mu1, 1.0) == doctest::Approx(renyi_entropy(mu1)).epsilon(1e-12));
  CHECK_THROWS(cd_functional(plan, empirical_measure(mu0.points), mu1, 0.5));
}

TEST_CASE("Brunn-Minkowski right-hand side") {
  CHECK(brunn_minkowski_rhs(1, 0.5, 0.0, 1.0, 1.0) == doctest::Approx(2 * std::pow(0.5, 5.0 / 3)));
  CHECK(brunn_minkowski_rhs(1, 0.0, 1.0, 8.0, 1.0) == doctest::Approx(2.0));
  CHECK(brunn_minkowski_rhs(1, 1.0, 1.0, 8.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("sample sets and dilation") {
  auto x = sample_sets(Region::unit_box(1), box3(2, 3, 0, 1, 0, 1), 20, 5);
  CHECK(x.a == sample_uniform(Region::unit_box(1), 20, 5));
  CHECK(x.b == sample_uniform(box3(2, 3, 0, 1, 0, 1), 20, 6));
  auto d = dilated(x, 2.0);
  CHECK(d.vol_a == 16.0);
  CHECK(d.a == dilate(2.0, x.a));
}

TEST_CASE("verify_cd endpoints and Jensen terms") {
  const double sv[] = {0.0, 0.5, 1.0};
  auto reps = verify_cd_samples(sample_sets(Region::unit_box(1), box3(2, 3, 0, 1, 0, 1), 100, 3), sv, CdOptions{});
  REQUIRE(reps.size() == 3);
  CHECK(std::abs(reps[0].margin) <= 1e-12);
  CHECK(std::abs(reps[2].margin) <= 1e-12);
  for (const auto& r : reps) {
    CHECK(r.name == "CD");
    CHECK(r.extras.at("jensen_margin") >= -1e-12);
    CHECK(r.mc_stderr > 0);
  }
}

TEST_CASE("verify_bm small run") {
  const double sv[] = {0.0, 0.5};
  BmOptions opt;
  opt.r = 0.1;
  opt.grid = Grid::cubic(0.1);
  auto reps = verify_bm_samples(sample_sets(Region::unit_box(1), Region::unit_box(1), 200, 3), sv, opt);
  REQUIRE(reps.size() == 2);
  REQUIRE(reps[1].sbmi);
  CHECK(reps[1].bmi.holds == Verdict::holds);
  CHECK(reps[1].sbmi->extras.at("containment_holds") == 1.0);
  CHECK(reps[0].sbmi->lhs == reps[0].bmi.lhs);
}

TEST_CASE("grid functions") {
  auto f = GridFunction::box_indicator(box3(0, 1, 0.5, 1, 0, 0.5), {0.25, 0.25, 0.25}, 2.0);
  CHECK(f.dims == std::vector<std::size_t>{4, 2, 2});
  CHECK(f.first == std::vector<std::int64_t>{0, 2, 0});
  CHECK(f.integral() == doctest::Approx(2.0 * 0.25));
  const double in[] = {0.3, 0.6, 0.1}, out[] = {0.3, 0.4, 0.1};
  CHECK(f.value_at(in) == 2.0);
  CHECK(f.value_at(out) == 0.0);
  auto e = f.embedded({-1, 0, 0}, {6, 4, 3});
  CHECK(e.integral() == doctest::Approx(f.integral()));
  CHECK(e.value_at(in) == 2.0);
  CHECK(f.scaled(0.5).integral() == doctest::Approx(0.25));
  CHECK_THROWS(GridFunction::box_indicator(box3(0, 0.9, 0, 1, 0, 1), {0.25, 0.25, 0.25}));
  CHECK_THROWS(e.embedded({0, 0, 0}, {1, 1, 1}));
}

TEST_CASE("BBL sample pairs do not depend on the block") {
  auto f = GridFunction::box_indicator(Region::unit_box(1), {0.25, 0.25, 0.25});
  auto g = GridFunction::box_indicator(box3(2, 3, 0, 1, 0, 1), {0.25, 0.25, 0.25});
  auto p1 = bbl_sample_pairs(f, g, 50, 9);
  auto p2 = bbl_sample_pairs(f.embedded({-4, -4, -4}, {20, 12, 12}), g.embedded({0, -1, 0}, {14, 6, 5}), 50, 9);
  CHECK(p1 == p2);
}

TEST_CASE("BBL on an indicator instance") {
  auto inst = bbl_set_instance(Region::unit_box(1), box3(2, 3, 0, 1, 0, 1), 0.5, 0.25, 2000, 4);
  auto rep = verify_bbl(inst.f, inst.g, inst.h, 0.5, std::numeric_limits<double>::infinity(), 2000, 4);
  CHECK(rep.holds == Verdict::holds);
  CHECK(rep.extras.at("mean_exponent") == doctest::Approx(1.0 / 3));
  // a too-small h violates the hypothesis with a witness
  auto bad = inst.h.scaled(0.0);
  CHECK_THROWS_AS(verify_bbl(inst.f, inst.g, bad, 0.5, 1.0, 200, 4), HypothesisViolated);
  CHECK_THROWS(verify_bbl(inst.f, inst.g, inst.h, 0.0, 1.0, 10, 4));
  CHECK_THROWS(verify_bbl(inst.f, inst.g, inst.h, 0.5, -1.0, 10, 4));
}

TEST_CASE("two-level instance is normalized") {
  auto inst = two_level_instance(8);
  double a = 0, b = 0;
  for (double w : inst.mu.weights) a += w;
  for (double w : inst.nu.weights) b += w;
  CHECK(a == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_NOTHROW(inst.mu.validate());
}
