#include <algorithm>
#include <cstdio>
#include <random>
#include <vector>

#include "doctest.h"
#include "ecomod/network.hpp"

using namespace ecomod;

namespace {

// Random strongly connected network: a ring plus random chords.
RoadNetwork random_network(int n, int extra_edges, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0, 5000), len(100, 900), spd(4, 20);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<NetNode> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({i, coord(rng), coord(rng)});
  std::vector<NetEdge> edges;
  int id = 0;
  for (int i = 0; i < n; ++i)
    edges.push_back({id++, i, (i + 1) % n, len(rng), spd(rng), 1});
  while (id < n + extra_edges) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    bool dup = false;
    for (const auto& e : edges) dup = dup || (e.from == a && e.to == b);
    if (dup) continue;
    edges.push_back({id++, a, b, len(rng), spd(rng), 1});
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

// Bellman-Ford relaxation: independent of the library's Dijkstra.
Eigen::VectorXd bellman_ford(const RoadNetwork& net, int origin, Metric metric,
                             const FuelModel& fuel) {
  int n = net.node_count();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1e30);
  d(origin) = 0;
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (int e = 0; e < net.edge_count(); ++e) {
      const NetEdge& ed = net.edge(e);
      double w = net.edge_weight(e, metric, fuel);
      if (d(ed.from) + w < d(ed.to) - 1e-15) { d(ed.to) = d(ed.from) + w; changed = true; }
    }
    if (!changed) break;
  }
  return d;
}

}  // namespace

TEST_CASE("shortest_path identity and forced arithmetic") {
  std::vector<NetNode> nodes{{0, 0, 0}, {1, 1000, 0}};
  std::vector<NetEdge> edges{{0, 0, 1, 1000, 10, 1}, {1, 1, 0, 1000, 10, 1}};
  RoadNetwork net(nodes, edges);
  FuelModel fm;

  Route self = shortest_path(net, 1, 1, Metric::Time, fm);
  CHECK(self.nodes.empty());
  CHECK(self.time_s == 0.0);
  CHECK(self.fuel_g == 0.0);

  Route r = shortest_path(net, 0, 1, Metric::Time, fm);
  CHECK(r.time_s == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.fuel_g == doctest::Approx(edge_fuel(fm, 1000, 10)).epsilon(1e-12));
  CHECK(r.distance_m == doctest::Approx(1000.0));
  REQUIRE(r.nodes.size() == 2);
  CHECK(r.nodes[0] == 0);
  CHECK(r.nodes[1] == 1);
}

TEST_CASE("shortest_path unreachable destination") {
  // One-way pair: 0 -> 1 only.
  std::vector<NetNode> nodes{{0, 0, 0}, {1, 500, 0}};
  std::vector<NetEdge> edges{{0, 0, 1, 500, 10, 1}};
  RoadNetwork net(nodes, edges);
  CHECK_THROWS_AS(shortest_path(net, 1, 0, Metric::Time, FuelModel{}), UnreachableDestination);
}

TEST_CASE("shortest_path matches exhaustive relaxation on random graphs") {
  FuelModel fm;
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    RoadNetwork net = random_network(50, 150, seed);
    for (Metric m : {Metric::Time, Metric::Fuel, Metric::Distance}) {
      Eigen::VectorXd oracle = bellman_ford(net, 0, m, fm);
      for (int d = 0; d < net.node_count(); ++d) {
        Route r = shortest_path(net, 0, d, m, fm);
        double got = m == Metric::Time ? r.time_s : m == Metric::Fuel ? r.fuel_g : r.distance_m;
        CHECK(got == doctest::Approx(oracle(d)).epsilon(1e-9));
        // Route totals equal per-edge sums.
        if (r.nodes.size() >= 2) {
          double t = 0, f = 0, dist = 0;
          for (size_t i = 0; i + 1 < r.nodes.size(); ++i) {
            int e = net.edge_between(r.nodes[i], r.nodes[i + 1]);
            REQUIRE(e >= 0);
            t += net.edge(e).length_m / net.edge(e).speed_mps;
            f += edge_fuel(fm, net.edge(e).length_m, net.edge(e).speed_mps);
            dist += net.edge(e).length_m;
          }
          CHECK(r.time_s == doctest::Approx(t).epsilon(1e-9));
          CHECK(r.fuel_g == doctest::Approx(f).epsilon(1e-9));
          CHECK(r.distance_m == doctest::Approx(dist).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("all_pairs_costs matches per-pair shortest_path") {
  FuelModel fm;

  // 1-node network.
  RoadNetwork one({{0, 0, 0}}, {});
  CostMatrix m1 = all_pairs_costs(one, Metric::Time, fm);
  CHECK(m1.cost(0, 0) == 0.0);

  // 3-node line, costs by hand.
  std::vector<NetNode> nodes{{0, 0, 0}, {1, 400, 0}, {2, 900, 0}};
  std::vector<NetEdge> edges{{0, 0, 1, 400, 10, 1}, {1, 1, 0, 400, 10, 1},
                             {2, 1, 2, 500, 10, 1}, {3, 2, 1, 500, 10, 1}};
  RoadNetwork line(nodes, edges);
  CostMatrix lm = all_pairs_costs(line, Metric::Time, fm);
  CHECK(lm.cost(0, 2) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(lm.cost(2, 0) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(lm.cost(0, 1) == doctest::Approx(40.0).epsilon(1e-12));

  // 30-node random graph vs pairwise oracle.
  RoadNetwork net = random_network(30, 80, 9);
  for (Metric m : {Metric::Time, Metric::Fuel}) {
    CostMatrix cm = all_pairs_costs(net, m, fm);
    for (int i = 0; i < 30; ++i) {
      CHECK(cm.cost(i, i) == 0.0);
      for (int j = 0; j < 30; ++j) {
        Route r = shortest_path(net, i, j, m, fm);
        double want = m == Metric::Time ? r.time_s : r.fuel_g;
        CHECK(cm.cost(i, j) == doctest::Approx(want).epsilon(1e-9));
      }
    }
    // Triangle inequality for the optimized metric.
    for (int i = 0; i < 30; i += 3)
      for (int j = 0; j < 30; j += 3)
        for (int k = 0; k < 30; k += 3)
          CHECK(cm.cost(i, j) + cm.cost(j, k) >= cm.cost(i, k) - 1e-9);
  }
}

TEST_CASE("eco versus fastest dominance over all pairs") {
  FuelModel fm;
  RoadNetwork net = make_grid_network(GridNetworkParams{.nx = 8, .ny = 8}, 5);
  CostMatrix time = all_pairs_costs(net, Metric::Time, fm);
  CostMatrix fuel = all_pairs_costs(net, Metric::Fuel, fm);
  for (int i = 0; i < net.node_count(); ++i)
    for (int j = 0; j < net.node_count(); ++j) {
      CHECK(fuel.fuel_g(i, j) <= time.fuel_g(i, j) + 1e-9);
      CHECK(time.time_s(i, j) <= fuel.time_s(i, j) + 1e-9);
    }
}

TEST_CASE("cost matrix path reconstruction") {
  FuelModel fm;
  RoadNetwork net = random_network(25, 60, 13);
  CostMatrix cm = all_pairs_costs(net, Metric::Time, fm);
  for (int i = 0; i < 25; i += 2)
    for (int j = 0; j < 25; j += 3) {
      std::vector<int> p = cm.path(i, j);
      if (i == j) { CHECK(p.empty()); continue; }
      REQUIRE(p.size() >= 2);
      CHECK(p.front() == i);
      CHECK(p.back() == j);
      double t = 0;
      for (size_t k = 0; k + 1 < p.size(); ++k) {
        int e = net.edge_between(p[k], p[k + 1]);
        REQUIRE(e >= 0);
        t += net.edge(e).length_m / net.edge(e).speed_mps;
      }
      CHECK(t == doctest::Approx(cm.cost(i, j)).epsilon(1e-9));
    }
}

TEST_CASE("partition_network boundary cases and quadrant recovery") {
  RoadNetwork grid = make_grid_network(GridNetworkParams{.nx = 6, .ny = 6}, 2);

  PartitionSet p1 = partition_network(grid, 1);
  CHECK(p1.count() == 1);
  CHECK((int)p1.members[0].size() == grid.node_count());

  PartitionSet pn = partition_network(grid, grid.node_count());
  CHECK(pn.count() == grid.node_count());
  for (const auto& m : pn.members) CHECK(m.size() == 1);

  CHECK_THROWS_AS(partition_network(grid, 0), InvalidK);
  CHECK_THROWS_AS(partition_network(grid, grid.node_count() + 1), InvalidK);

  // k = 4 on a uniform grid: partitions are the coordinate quadrants.
  PartitionSet p4 = partition_network(grid, 4);
  REQUIRE(p4.count() == 4);
  double mid_x = 0, mid_y = 0;
  for (int i = 0; i < grid.node_count(); ++i) { mid_x += grid.node(i).x; mid_y += grid.node(i).y; }
  mid_x /= grid.node_count();
  mid_y /= grid.node_count();
  for (int k = 0; k < 4; ++k) {
    for (size_t a = 0; a + 1 < p4.members[k].size(); ++a) {
      const NetNode& u = grid.node(p4.members[k][a]);
      const NetNode& v = grid.node(p4.members[k][a + 1]);
      CHECK((u.x < mid_x) == (v.x < mid_x));
      CHECK((u.y < mid_y) == (v.y < mid_y));
    }
  }

  // Structural invariants: full cover, symmetric adjacency, valid centers.
  std::vector<int> seen(grid.node_count(), 0);
  for (int k = 0; k < p4.count(); ++k) {
    CHECK(!p4.members[k].empty());
    CHECK(p4.partition_of[p4.centers[k]] == k);
    for (int n : p4.members[k]) { seen[n]++; CHECK(p4.partition_of[n] == k); }
    for (int adj : p4.adjacency[k]) {
      const auto& back = p4.adjacency[adj];
      CHECK(std::find(back.begin(), back.end(), k) != back.end());
    }
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("grid generation deterministic, CSV round trip") {
  GridNetworkParams gp{.nx = 5, .ny = 4};
  RoadNetwork a = make_grid_network(gp, 42);
  RoadNetwork b = make_grid_network(gp, 42);
  REQUIRE(a.node_count() == 20);
  REQUIRE(a.edge_count() == b.edge_count());
  CHECK(a.strongly_connected());
  for (int e = 0; e < a.edge_count(); ++e) {
    CHECK(a.edge(e).speed_mps == b.edge(e).speed_mps);
    CHECK(a.edge(e).length_m == b.edge(e).length_m);
  }

  save_network_csv(a, "nodes_rt.csv", "edges_rt.csv");
  RoadNetwork c = load_network_csv("nodes_rt.csv", "edges_rt.csv");
  REQUIRE(c.node_count() == a.node_count());
  REQUIRE(c.edge_count() == a.edge_count());
  for (int e = 0; e < a.edge_count(); ++e) {
    CHECK(c.edge(e).from == a.edge(e).from);
    CHECK(c.edge(e).to == a.edge(e).to);
    CHECK(c.edge(e).length_m == doctest::Approx(a.edge(e).length_m).epsilon(1e-9));
    CHECK(c.edge(e).speed_mps == doctest::Approx(a.edge(e).speed_mps).epsilon(1e-9));
  }
  std::remove("nodes_rt.csv");
  std::remove("edges_rt.csv");
}

TEST_CASE("network construction rejects bad attributes") {
  std::vector<NetNode> nodes{{0, 0, 0}, {1, 100, 0}};
  CHECK_THROWS_AS(RoadNetwork(nodes, {{0, 0, 1, -5, 10, 1}, {1, 1, 0, 100, 10, 1}}),
                  Error);
  CHECK_THROWS_AS(RoadNetwork(nodes, {{0, 0, 1, 100, 0, 1}, {1, 1, 0, 100, 10, 1}}),
                  Error);
  CHECK_THROWS_AS(RoadNetwork(nodes, {{0, 0, 1, 100, 10, 0}, {1, 1, 0, 100, 10, 1}}),
                  Error);
}
