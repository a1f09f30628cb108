#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "ecomod/shareability.hpp"

using namespace ecomod;

namespace {

const RoadNetwork& test_net() {
  static RoadNetwork net = make_grid_network(GridNetworkParams{.nx = 5, .ny = 4}, 11);
  return net;
}

const RoutingCosts& test_costs() {
  static RoutingCosts rc = RoutingCosts::build(test_net(), FuelModel{});
  return rc;
}

TravelRequest rand_request(std::mt19937_64& rng, int id, double clock) {
  std::uniform_int_distribution<int> node(0, test_net().node_count() - 1);
  std::uniform_real_distribution<double> back(0, 100);
  int o = node(rng), d = node(rng);
  while (d == o) d = node(rng);
  return {id, o, d, clock - back(rng), 300, 300};
}

// Feasibility of serving a customer set by one vehicle, by brute force over
// all precedence-valid stop orders (the scheduler is not consulted).
bool orders_feasible(int start_node, double start_time, int capacity,
                     const std::vector<OnboardCustomer>& onboard,
                     const std::vector<TravelRequest>& reqs, const RoutingCosts& rc,
                     RoutePolicy policy) {
  int onb = (int)onboard.size();
  int m = onb + (int)reqs.size();
  std::vector<int> actions;
  for (int i = 0; i < m; ++i) {
    if (i >= onb) actions.push_back(2 * i);
    actions.push_back(2 * i + 1);
  }
  std::sort(actions.begin(), actions.end());
  do {
    std::vector<int> pos(2 * m, -1);
    for (size_t k = 0; k < actions.size(); ++k) pos[actions[k]] = (int)k;
    bool ok = true;
    for (int i = onb; i < m && ok; ++i) ok = pos[2 * i] < pos[2 * i + 1];
    if (!ok) continue;

    double t = start_time;
    int node = start_node;
    std::vector<int> status(m, 0);
    std::vector<double> deadline(m, 0);
    for (int i = 0; i < onb; ++i) {
      status[i] = 1;
      deadline[i] = onboard[i].pickup_time_s + onboard[i].min_travel_s + onboard[i].max_delay_s;
    }
    bool feas = true;
    for (int a : actions) {
      int i = a / 2;
      bool pickup = a % 2 == 0;
      const TravelRequest* r = i >= onb ? &reqs[i - onb] : nullptr;
      int dest = pickup ? r->origin : (i >= onb ? r->dest : onboard[i].dest);
      int cnt = 0;
      for (int j = 0; j < m; ++j)
        if (status[j] == 1) ++cnt;
      if (pickup && cnt >= capacity) { feas = false; break; }
      t += rc.leg_time(policy, cnt, node, dest);
      if (pickup) {
        if (t > r->request_time_s + r->max_wait_s + 1e-9) { feas = false; break; }
        deadline[i] = t + rc.time.cost(r->origin, r->dest) + r->max_delay_s;
        status[i] = 1;
      } else {
        if (t > deadline[i] + 1e-9) { feas = false; break; }
        status[i] = 2;
      }
      node = dest;
    }
    if (feas) return true;
  } while (std::next_permutation(actions.begin(), actions.end()));
  return false;
}

}  // namespace

TEST_CASE("rr_edge boundary cases") {
  const RoutingCosts& rc = test_costs();
  double clock = 500;
  TravelRequest a{0, 2, 15, clock, 300, 300};
  TravelRequest b{1, 2, 15, clock, 300, 300};
  CHECK(rr_edge(a, b, rc, clock));

  TravelRequest c{2, 0, 15, clock, 0, 300};   // zero wait at a distinct origin
  TravelRequest d{3, 9, 16, clock, 0, 300};
  CHECK(!rr_edge(c, d, rc, clock));
}

TEST_CASE("rr_edge matches order enumeration on random pairs") {
  const RoutingCosts& rc = test_costs();
  std::mt19937_64 rng(3);
  double clock = 800;
  int agree = 0;
  for (int it = 0; it < 300; ++it) {
    TravelRequest r1 = rand_request(rng, 0, clock);
    TravelRequest r2 = rand_request(rng, 1, clock);
    if (it % 3 == 0) { r1.max_wait_s = 120; r2.max_delay_s = 60; }
    bool got = rr_edge(r1, r2, rc, clock);
    // Virtual empty vehicle at either origin, starting at the later request
    // time (both requests already exist by then).
    double start = std::max({r1.request_time_s, r2.request_time_s, clock});
    bool want = orders_feasible(r1.origin, start, 4, {}, {r1, r2}, rc, RoutePolicy::Fastest) ||
                orders_feasible(r2.origin, start, 4, {}, {r1, r2}, rc, RoutePolicy::Fastest);
    CHECK(got == want);
    agree += got == want;
  }
  CHECK(agree == 300);
}

TEST_CASE("rv_edge boundary cases") {
  const RoutingCosts& rc = test_costs();
  double clock = 500;
  TravelRequest r{0, 4, 13, clock - 10, 300, 300};

  VehicleSnapshot idle{0, 4, clock, 4, {}};
  CHECK(rv_edge(idle, r, rc, clock));

  VehicleSnapshot full{1, 4, clock, 4,
                       {{10, 7, clock - 50, 30, 300},
                        {11, 8, clock - 50, 30, 300},
                        {12, 9, clock - 50, 30, 300},
                        {13, 10, clock - 50, 30, 300}}};
  CHECK(!rv_edge(full, r, rc, clock));
}

TEST_CASE("rv_edge matches order enumeration with onboard passengers") {
  const RoutingCosts& rc = test_costs();
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> node(0, test_net().node_count() - 1);
  double clock = 900;
  for (int it = 0; it < 300; ++it) {
    TravelRequest r = rand_request(rng, 0, clock);
    VehicleSnapshot v;
    v.id = 0;
    v.node = node(rng);
    v.available_time_s = clock;
    int k = it % 3;
    for (int i = 0; i < k; ++i) {
      double slack = it % 2 == 0 ? 300 : 60;
      v.onboard.push_back({10 + i, node(rng), clock - 80, 50, slack});
    }
    bool got = rv_edge(v, r, rc, clock);
    bool want = orders_feasible(v.node, v.available_time_s, v.capacity, v.onboard, {r}, rc,
                                RoutePolicy::Fastest);
    CHECK(got == want);
  }
}

TEST_CASE("enumerate_cliques hand cases") {
  ShareabilityGraph g;
  g.requests = {{0, 1, 2, 0, 300, 300}, {1, 3, 4, 0, 300, 300}};
  g.vehicles = {{0, 0, 0, 4, {}}};
  g.rr = {{0, 0}, {0, 0}};
  g.rv = {{1, 0}};  // vehicle adjacent to request 0 only
  auto cl = enumerate_cliques(g, 4);
  REQUIRE(cl.size() == 1);
  CHECK(cl[0].vehicle == 0);
  CHECK(cl[0].request_idx == std::vector<int>{0});

  // Triangle v-r1, v-r2, r1-r2 yields {v,r1}, {v,r2}, {v,r1,r2}.
  g.rr = {{0, 1}, {1, 0}};
  g.rv = {{1, 1}};
  cl = enumerate_cliques(g, 4);
  REQUIRE(cl.size() == 3);
  std::set<std::vector<int>> got;
  for (const auto& c : cl) got.insert(c.request_idx);
  CHECK(got.count({0}) == 1);
  CHECK(got.count({1}) == 1);
  CHECK(got.count(std::vector<int>{0, 1}) == 1);

  // max_customers truncates clique size.
  cl = enumerate_cliques(g, 1);
  CHECK(cl.size() == 2);
}

TEST_CASE("enumerate_cliques matches powerset oracle on random graphs") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 60; ++it) {
    int nr = 2 + (int)(u(rng) * 7);  // up to 8 requests
    int nv = 1 + (int)(u(rng) * 3);
    ShareabilityGraph g;
    for (int i = 0; i < nr; ++i) g.requests.push_back({i, 0, 1, 0, 300, 300});
    for (int j = 0; j < nv; ++j) g.vehicles.push_back({j, 0, 0, 4, {}});
    g.rr.assign(nr, std::vector<char>(nr, 0));
    g.rv.assign(nv, std::vector<char>(nr, 0));
    for (int i = 0; i < nr; ++i)
      for (int j = i + 1; j < nr; ++j)
        g.rr[i][j] = g.rr[j][i] = u(rng) < 0.45;
    for (int v = 0; v < nv; ++v)
      for (int i = 0; i < nr; ++i) g.rv[v][i] = u(rng) < 0.55;
    int max_c = 1 + (int)(u(rng) * 4);

    auto cl = enumerate_cliques(g, max_c);
    std::set<std::pair<int, std::vector<int>>> got;
    for (const auto& c : cl) {
      // Re-validation: every emitted pair is adjacent.
      for (size_t a = 0; a < c.request_idx.size(); ++a) {
        CHECK(g.rv[c.vehicle][c.request_idx[a]]);
        for (size_t b = a + 1; b < c.request_idx.size(); ++b)
          CHECK(g.rr[c.request_idx[a]][c.request_idx[b]]);
      }
      CHECK((int)c.request_idx.size() <= max_c);
      CHECK(std::is_sorted(c.request_idx.begin(), c.request_idx.end()));
      bool inserted = got.insert({c.vehicle, c.request_idx}).second;
      CHECK(inserted);  // no duplicates
    }

    // Powerset oracle.
    std::set<std::pair<int, std::vector<int>>> want;
    for (int v = 0; v < nv; ++v) {
      for (long mask = 1; mask < (1L << nr); ++mask) {
        std::vector<int> subset;
        for (int i = 0; i < nr; ++i)
          if ((mask >> i) & 1) subset.push_back(i);
        if ((int)subset.size() > max_c) continue;
        bool ok = true;
        for (size_t a = 0; a < subset.size() && ok; ++a) {
          ok = g.rv[v][subset[a]];
          for (size_t b = a + 1; b < subset.size() && ok; ++b)
            ok = g.rr[subset[a]][subset[b]];
        }
        if (ok) want.insert({v, subset});
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("removing an edge never adds a clique") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  ShareabilityGraph g;
  int nr = 6;
  for (int i = 0; i < nr; ++i) g.requests.push_back({i, 0, 1, 0, 300, 300});
  g.vehicles.push_back({0, 0, 0, 4, {}});
  g.rr.assign(nr, std::vector<char>(nr, 0));
  g.rv.assign(1, std::vector<char>(nr, 1));
  for (int i = 0; i < nr; ++i)
    for (int j = i + 1; j < nr; ++j) g.rr[i][j] = g.rr[j][i] = u(rng) < 0.6;

  auto count = [&](const ShareabilityGraph& gr) { return enumerate_cliques(gr, 4).size(); };
  size_t before = count(g);
  for (int i = 0; i < nr; ++i)
    for (int j = i + 1; j < nr; ++j) {
      if (!g.rr[i][j]) continue;
      ShareabilityGraph cut = g;
      cut.rr[i][j] = cut.rr[j][i] = 0;
      CHECK(count(cut) <= before);
    }
}

TEST_CASE("build_shareability_graph wires pairwise checks") {
  const RoutingCosts& rc = test_costs();
  std::mt19937_64 rng(53);
  double clock = 700;
  std::vector<TravelRequest> reqs;
  for (int i = 0; i < 6; ++i) reqs.push_back(rand_request(rng, i, clock));
  std::vector<VehicleSnapshot> vehicles;
  std::uniform_int_distribution<int> node(0, test_net().node_count() - 1);
  for (int j = 0; j < 3; ++j) vehicles.push_back({j, node(rng), clock, 4, {}});
  ShareabilityGraph g = build_shareability_graph(reqs, vehicles, rc, clock, RoutePolicy::Fastest);
  REQUIRE((int)g.rr.size() == 6);
  REQUIRE((int)g.rv.size() == 3);
  for (int i = 0; i < 6; ++i) {
    CHECK(!g.rr[i][i]);
    for (int j = 0; j < 6; ++j) {
      CHECK(g.rr[i][j] == g.rr[j][i]);
      if (i != j) CHECK((bool)g.rr[i][j] == rr_edge(reqs[i], reqs[j], rc, clock));
    }
  }
  for (int v = 0; v < 3; ++v)
    for (int i = 0; i < 6; ++i)
      CHECK((bool)g.rv[v][i] == rv_edge(vehicles[v], reqs[i], rc, clock));
}
