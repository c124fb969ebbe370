#include <doctest.h>

#include <cmath>
#include <limits>

#include "heis/io.hpp"
#include "support.hpp"

using namespace heis;

TEST_CASE("points and regions round trip") {
  auto p = HPoint::h1(0.1, -2.5, 1e-300);
  CHECK(point_from_json(json::parse(to_json(p).dump())) == p);
  const std::vector<Region> regs{Region::unit_box(1), Region::cc_ball(HPoint::h1(1, 2, 3), 0.3),
                                 Region::disjoint_union({Region::unit_box(1),
                                                         Region::cc_ball(HPoint::h1(5, 0, 0), 1.0)})};
  for (const auto& r : regs) CHECK(region_from_json(json::parse(to_json(r).dump())) == r);
  CHECK_THROWS(region_from_json(json::parse(R"({"kind":"torus"})")));
}

TEST_CASE("plans and reports round trip") {
  TransportPlan plan;
  plan.pairs = {{0, 1, 0.5}, {1, 0, 0.5}};
  plan.cost = 0.1 + 0.2;
  plan.rows = plan.cols = 2;
  auto back = plan_from_json(json::parse(to_json(plan).dump()));
  CHECK(back.pairs == plan.pairs);
  CHECK(back.cost == plan.cost);

  InequalityReport r;
  r.name = "CD";
  r.s = 0.25;
  r.lhs = -1.0 / 3;
  r.rhs = -std::numeric_limits<double>::infinity();
  r.margin = std::numeric_limits<double>::quiet_NaN();
  r.holds = Verdict::inconclusive;
  r.extras["theta"] = 0.1;
  auto rb = report_from_json(json::parse(to_json(r).dump()));
  CHECK(rb.lhs == r.lhs);
  CHECK(std::isinf(rb.rhs));
  CHECK(std::isnan(rb.margin));
  CHECK(rb.extras == r.extras);
}

TEST_CASE("csv formatting is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3) == "0.3333333333333333");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
  InequalityReport r;
  r.name = "BMI";
  r.s = 0.5;
  r.lhs = 1;
  r.rhs = 0.5;
  r.margin = 0.5;
  r.holds = Verdict::holds;
  CHECK(csv_row(r) == "BMI,0.5,1,0.5,0.5,0,holds");
}

TEST_CASE("property: configs round trip bit exactly") {
  testing::Gen g(51);
  for (int k = 0; k < 50; ++k) {
    ExperimentConfig c;
    c.a = Region::box({{g.uniform(-1, 0), g.uniform(0, 1)}, {0, g.uniform(0.1, 2)}, {g.uniform(-3, 0), 1e-7}});
    c.b = Region::cc_ball(g.point(1), g.uniform(0.01, 3));
    c.s_values = {g.uniform(), g.uniform(), 1.0 / 3};
    c.samples = 1 + g.index(10000);
    c.seed = (static_cast<std::uint64_t>(g.uniform() * 4e9) << 24) ^ 0xFFFFFFFFFFFull;
    c.h = g.uniform(0.001, 1);
    c.r = g.uniform(0, 1);
    c.p = k % 2 ? std::numeric_limits<double>::infinity() : g.uniform(-0.3, 4);
    c.solver.method = k % 3 ? Method::exact_lp : Method::sinkhorn;
    if (k % 3 == 0) c.solver.epsilon = g.uniform(1e-4, 1);
    c.output.path = "out.csv";
    c.output.format = "csv";
    auto back = config_from_json(json::parse(to_json(c).dump()));
    CHECK(back == c);
  }
  CHECK_THROWS(config_from_json(json::parse(R"({"s_values":[1.5]})")));
  CHECK_THROWS(config_from_json(json::parse(R"({"output":{"format":"xml"}})")));
}
