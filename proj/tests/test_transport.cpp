#include <doctest.h>

#include <cmath>

#include "heis/geodesy.hpp"
#include "heis/network_simplex.hpp"
#include "heis/transport.hpp"
#include "support.hpp"

using namespace heis;

namespace {

PointCloud random_cloud(testing::Gen& g, std::size_t m, double scale = 1.0) {
  PointCloud c(1);
  for (std::size_t i = 0; i < m; ++i) c.push_back(g.point(1, scale));
  return c;
}

std::vector<double> random_weights(testing::Gen& g, std::size_t m) {
  std::vector<double> w(m);
  double s = 0;
  for (auto& x : w) s += (x = g.uniform(0.1, 1.0));
  for (auto& x : w) x /= s;
  return w;
}

// Optimality certificate independent of the solver: no negative cycle in the
// residual graph (Bellman-Ford over rows + cols nodes).
bool no_negative_cycle(const CostMatrix& c, const TransportPlan& p) {
  const std::size_t R = c.rows, C = c.cols, N = R + C;
  std::vector<std::vector<double>> flow(R, std::vector<double>(C, 0.0));
  for (const auto& e : p.pairs) flow[e.i][e.j] = e.mass;
  std::vector<double> dist(N, 0.0);
  const double tol = 1e-9;
  for (std::size_t it = 0; it <= N; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < C; ++j) {
        const double w = c.at(i, j);
        if (dist[i] + w < dist[R + j] - tol) {
          dist[R + j] = dist[i] + w;
          changed = true;
        }
        if (flow[i][j] > 1e-15 && dist[R + j] - w < dist[i] - tol) {
          dist[i] = dist[R + j] - w;
          changed = true;
        }
      }
    }
    if (!changed) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("cost matrix") {
  PointCloud a(1), b(1);
  a.push_back(HPoint::h1(0, 0, 0));
  b.push_back(HPoint::h1(1, 0, 0));
  b.push_back(HPoint::h1(0, 0, 1));
  auto c = cost_matrix(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(1.0));
  CHECK(c.at(0, 1) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  CHECK(c.angle_at(0, 1) == 2 * std::numbers::pi);
  auto ct = c.transposed();
  CHECK(ct.at(1, 0) == c.at(0, 1));
}

TEST_CASE("property: exact solver matches permutation enumeration") {
  testing::Gen g(41);
  for (int k = 0; k < 60; ++k) {
    const std::size_t m = 1 + g.index(6);
    auto a = random_cloud(g, m), b = random_cloud(g, m);
    auto c = cost_matrix(a, b);
    std::vector<double> w(m, 1.0 / m);
    auto plan = solve_exact(c, w, w);
    CHECK(plan.cost == doctest::Approx(testing::brute_assignment(c.cost, static_cast<int>(m))).epsilon(1e-12));
    CHECK(plan.marginal_violation(w, w) <= 1e-15);
  }
}

TEST_CASE("property: exact plans are optimal and feasible for unequal weights") {
  testing::Gen g(42);
  for (int k = 0; k < 40; ++k) {
    const std::size_t m = 1 + g.index(25), n = 1 + g.index(25);
    auto a = random_cloud(g, m, 2.0), b = random_cloud(g, n, 2.0);
    auto c = cost_matrix(a, b);
    auto wa = random_weights(g, m), wb = random_weights(g, n);
    auto plan = solve_exact(c, wa, wb);
    CHECK(plan.marginal_violation(wa, wb) <= 1e-12);
    CHECK(plan.pairs.size() <= m + n - 1);
    CHECK(no_negative_cycle(c, plan));
    double cost = 0;
    for (const auto& e : plan.pairs) {
      CHECK(e.mass > 0);
      cost += e.mass * c.at(e.i, e.j);
    }
    CHECK(cost == doctest::Approx(plan.cost).epsilon(1e-12));
  }
}

TEST_CASE("solver input checks") {
  testing::Gen g(43);
  auto a = random_cloud(g, 3);
  auto c = cost_matrix(a, a);
  std::vector<double> w{0.5, 0.25, 0.25}, bad{0.5, 0.5, 0.5};
  CHECK_THROWS_AS(solve_exact(c, w, bad), InfeasibleMarginals);
  auto self = solve_exact(c, w, w);
  CHECK(self.cost == 0.0);
}

TEST_CASE("sinkhorn approaches the exact cost") {
  testing::Gen g(44);
  auto a = random_cloud(g, 40), b = random_cloud(g, 40);
  auto c = cost_matrix(a, b);
  std::vector<double> w(40, 1.0 / 40);
  auto exact = solve_exact(c, w, w);
  SinkhornOptions opt;
  opt.epsilon = 0.01 * median_cost(c);
  auto sk = solve_sinkhorn(c, w, w, opt);
  CHECK(sk.method == Method::sinkhorn);
  CHECK(sk.marginal_violation(w, w) <= opt.tol);
  CHECK(sk.cost >= exact.cost * (1 - 1e-12));
  CHECK(std::sqrt(sk.cost) == doctest::Approx(std::sqrt(exact.cost)).epsilon(0.02));
}

TEST_CASE("property: displacement interpolation is a constant speed geodesic") {
  testing::Gen g(45);
  auto a = random_cloud(g, 30), b = random_cloud(g, 30);
  for (std::size_t i = 0; i < b.size(); ++i) b[i][0] += 2.0;
  auto mu0 = empirical_measure(a), mu1 = empirical_measure(b);
  auto gp = optimal_geodesic_plan(mu0, mu1);
  const double d = w2(mu0, mu1);
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    auto mus = interpolate(gp, s);
    CHECK(w2(mu0, mus) == doctest::Approx(s * d).epsilon(1e-6).scale(1));
    CHECK(w2(mus, mu1) == doctest::Approx((1 - s) * d).epsilon(1e-6).scale(1));
  }
  auto end = interpolate(gp, 1.0);
  CHECK(end.size() == b.size());
}

TEST_CASE("central pairs cannot be interpolated") {
  PointCloud a(1), b(1);
  a.push_back(HPoint::h1(0, 0, 0));
  b.push_back(HPoint::h1(0, 0, 1));
  auto mu0 = empirical_measure(a), mu1 = empirical_measure(b);
  CHECK_THROWS_AS(optimal_geodesic_plan(mu0, mu1), CenterPairError);
}

TEST_CASE("network simplex on a hand instance") {
  // 2x2 with an off-diagonal optimum
  std::vector<double> cost{4, 1, 2, 5};
  std::vector<double> sup{0.5, 0.5}, dem{0.5, 0.5};
  auto flows = detail::network_simplex(cost.data(), 2, 2, sup.data(), dem.data());
  REQUIRE(flows.size() == 2);
  CHECK(flows[0].i == 0);
  CHECK(flows[0].j == 1);
  CHECK(flows[1].i == 1);
  CHECK(flows[1].j == 0);
}
