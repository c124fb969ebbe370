#include "heis/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heis {

namespace {

double num_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

const char* method_name(Method m) { return m == Method::exact_lp ? "exact" : "sinkhorn"; }

Method method_from(const std::string& s) {
  if (s == "exact" || s == "exact_lp") return Method::exact_lp;
  if (s == "sinkhorn") return Method::sinkhorn;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

Verdict verdict_from(const std::string& s) {
  if (s == "holds") return Verdict::holds;
  if (s == "fails") return Verdict::fails;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

}  // namespace

json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json to_json(const HPoint& p) {
  json j = json::array();
  for (double c : p.coords()) j.push_back(c);
  return j;
}

HPoint point_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("a point must be a JSON array");
  return HPoint::from_coords(j.get<std::vector<double>>());
}

json to_json(const Region& r) {
  switch (r.kind()) {
    case Region::Kind::box: {
      json iv = json::array();
      for (const auto& i : r.intervals()) iv.push_back({i.lo, i.hi});
      return {{"kind", "box"}, {"intervals", iv}};
    }
    case Region::Kind::cc_ball:
      return {{"kind", "cc_ball"}, {"center", to_json(r.center())}, {"radius", r.radius()}};
    case Region::Kind::union_of: {
      json m = json::array();
      for (const auto& x : r.members()) m.push_back(to_json(x));
      return {{"kind", "union"}, {"members", m}};
    }
  }
  throw std::logic_error("unreachable region kind");
}

Region region_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "box") {
    std::vector<Interval> iv;
    for (const auto& x : j.at("intervals")) {
      if (!x.is_array() || x.size() != 2) throw std::invalid_argument("box intervals are [lo, hi] pairs");
      iv.push_back({x[0].get<double>(), x[1].get<double>()});
    }
    return Region::box(std::move(iv));
  }
  if (kind == "cc_ball") return Region::cc_ball(point_from_json(j.at("center")), j.at("radius").get<double>());
  if (kind == "union") {
    std::vector<Region> m;
    for (const auto& x : j.at("members")) m.push_back(region_from_json(x));
    return Region::disjoint_union(std::move(m));
  }
  throw std::invalid_argument("unknown region kind '" + kind + "'");
}

json to_json(const TransportPlan& plan) {
  json pairs = json::array();
  for (const auto& p : plan.pairs) pairs.push_back({p.i, p.j, p.mass});
  json j{{"pairs", pairs},
         {"cost", json_number(plan.cost)},
         {"method", method_name(plan.method)},
         {"rows", plan.rows},
         {"cols", plan.cols}};
  if (plan.method == Method::sinkhorn) {
    j["epsilon"] = plan.epsilon;
    j["regularized_cost"] = json_number(plan.regularized_cost);
  }
  return j;
}

TransportPlan plan_from_json(const json& j) {
  TransportPlan p;
  for (const auto& e : j.at("pairs")) {
    p.pairs.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
  }
  p.cost = num_from(j.at("cost"));
  p.method = method_from(j.at("method").get<std::string>());
  p.rows = j.value("rows", std::size_t{0});
  p.cols = j.value("cols", std::size_t{0});
  p.epsilon = j.value("epsilon", 0.0);
  p.regularized_cost = j.contains("regularized_cost") ? num_from(j["regularized_cost"]) : p.cost;
  return p;
}

json to_json(const InequalityReport& r) {
  json extras = json::object();
  for (const auto& [k, v] : r.extras) extras[k] = json_number(v);
  return {{"name", r.name},
          {"s", r.s},
          {"lhs", json_number(r.lhs)},
          {"rhs", json_number(r.rhs)},
          {"margin", json_number(r.margin)},
          {"stderr", json_number(r.mc_stderr)},
          {"discretization_note", r.discretization_note},
          {"holds", to_string(r.holds)},
          {"extras", extras}};
}

InequalityReport report_from_json(const json& j) {
  InequalityReport r;
  r.name = j.at("name").get<std::string>();
  r.s = j.at("s").get<double>();
  r.lhs = num_from(j.at("lhs"));
  r.rhs = num_from(j.at("rhs"));
  r.margin = num_from(j.at("margin"));
  r.mc_stderr = num_from(j.at("stderr"));
  r.discretization_note = j.value("discretization_note", std::string{});
  r.holds = verdict_from(j.at("holds").get<std::string>());
  if (j.contains("extras")) {
    for (const auto& [k, v] : j["extras"].items()) r.extras[k] = num_from(v);
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_row(const InequalityReport& r) {
  return r.name + "," + format_double(r.s) + "," + format_double(r.lhs) + "," + format_double(r.rhs) + "," +
         format_double(r.margin) + "," + format_double(r.mc_stderr) + "," + to_string(r.holds);
}

json to_json(const ExperimentConfig& c) {
  json solver{{"method", method_name(c.solver.method)}};
  if (c.solver.epsilon) solver["epsilon"] = *c.solver.epsilon;
  return {{"n", c.n},
          {"A", to_json(c.a)},
          {"B", to_json(c.b)},
          {"s_values", c.s_values},
          {"N", c.samples},
          {"seed", c.seed},
          {"h", c.h},
          {"r", c.r},
          {"p", json_number(c.p)},
          {"solver", solver},
          {"output", {{"path", c.output.path}, {"format", c.output.format}}}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  c.n = j.value("n", 1);
  if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
  c.a = j.contains("A") ? region_from_json(j["A"]) : Region::unit_box(c.n);
  c.b = j.contains("B") ? region_from_json(j["B"]) : Region::unit_box(c.n);
  if (c.a.n() != c.n || c.b.n() != c.n) throw DimensionError("config: regions do not live in H^n for the given n");
  if (j.contains("s_values")) c.s_values = j["s_values"].get<std::vector<double>>();
  for (double s : c.s_values) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("config: s values must lie in [0, 1]");
  }
  c.samples = j.value("N", c.samples);
  if (c.samples == 0) throw std::invalid_argument("config: N must be positive");
  c.seed = j.value("seed", c.seed);
  c.h = j.value("h", c.h);
  c.r = j.value("r", c.r);
  if (!(c.h > 0.0)) throw std::invalid_argument("config: h must be positive");
  if (!(c.r >= 0.0)) throw std::invalid_argument("config: r must be nonnegative");
  if (j.contains("p")) c.p = num_from(j["p"]);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (s.is_string()) {
      c.solver.method = method_from(s.get<std::string>());
    } else {
      c.solver.method = method_from(s.value("method", std::string{"exact"}));
      if (s.contains("epsilon")) c.solver.epsilon = s["epsilon"].get<double>();
    }
  }
  if (j.contains("output")) {
    c.output.path = j["output"].value("path", std::string{});
    c.output.format = j["output"].value("format", std::string{"json"});
  }
  if (c.output.format != "json" && c.output.format != "csv") {
    throw std::invalid_argument("config: output format must be json or csv");
  }
  return c;
}

}  // namespace heis
