#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ecomod/scheduler.hpp"

using namespace ecomod;

namespace {

const RoadNetwork& test_net() {
  static RoadNetwork net = make_grid_network(GridNetworkParams{.nx = 5, .ny = 5}, 7);
  return net;
}

const RoutingCosts& test_costs() {
  static RoutingCosts rc = RoutingCosts::build(test_net(), FuelModel{});
  return rc;
}

// Exhaustive enumeration over precedence- and capacity-valid stop orders,
// simulating arrival times exactly as the planner defines them: pickup
// deadline req_time + max_wait, drop deadline pickup + fastest(O,D) + max_delay.
struct OracleResult {
  bool feasible = false;
  double cost = 0;
};

OracleResult oracle(const SchedulerInput& in) {
  int onb = (int)in.onboard.size();
  int m = onb + (int)in.customers.size();
  // action k: 2i = pickup of customer i, 2i+1 = drop of customer i
  std::vector<int> actions;
  for (int i = 0; i < m; ++i) {
    if (i >= onb) actions.push_back(2 * i);
    actions.push_back(2 * i + 1);
  }
  std::sort(actions.begin(), actions.end());
  OracleResult best;
  do {
    // precedence: pickup before drop
    std::vector<int> pos(2 * m, -1);
    for (size_t k = 0; k < actions.size(); ++k) pos[actions[k]] = (int)k;
    bool ok = true;
    for (int i = onb; i < m && ok; ++i) ok = pos[2 * i] < pos[2 * i + 1];
    if (!ok) continue;

    double t = in.start_time_s, cost = 0;
    int node = in.start_node;
    std::vector<int> status(m, 0);  // 0 waiting, 1 onboard, 2 dropped
    std::vector<double> deadline(m, 0), pick_t(m, 0);
    for (int i = 0; i < onb; ++i) {
      status[i] = 1;
      deadline[i] = in.onboard[i].pickup_time_s + in.onboard[i].min_travel_s +
                    in.onboard[i].max_delay_s;
    }
    bool feas = true;
    for (int a : actions) {
      int i = a / 2;
      bool pickup = a % 2 == 0;
      const TravelRequest* r = i >= onb ? &in.customers[i - onb] : nullptr;
      int dest = pickup ? r->origin : (i >= onb ? r->dest : in.onboard[i].dest);
      int onboard_cnt = 0, waiting_cnt = 0;
      for (int j = 0; j < m; ++j) {
        if (status[j] == 1) ++onboard_cnt;
        if (status[j] == 0) ++waiting_cnt;
      }
      if (pickup && onboard_cnt >= in.capacity) { feas = false; break; }
      double leg_t = in.costs->leg_time(in.policy, onboard_cnt, node, dest);
      double leg_f = in.costs->leg_fuel(in.policy, onboard_cnt, node, dest);
      t += leg_t;
      if (pickup) {
        if (t > r->request_time_s + r->max_wait_s + 1e-9) { feas = false; break; }
        pick_t[i] = t;
        deadline[i] = t + in.costs->time.cost(r->origin, r->dest) + r->max_delay_s;
        status[i] = 1;
      } else {
        if (t > deadline[i] + 1e-9) { feas = false; break; }
        status[i] = 2;
      }
      cost += in.objective == Objective::Time
                  ? leg_t * (waiting_cnt + in.onboard_weight * onboard_cnt)
                  : leg_f;
      node = dest;
    }
    if (!feas) continue;
    if (!best.feasible || cost < best.cost) best = {true, cost};
  } while (std::next_permutation(actions.begin(), actions.end()));
  return best;
}

TravelRequest rand_request(std::mt19937_64& rng, int n_nodes, int id, double clock) {
  std::uniform_int_distribution<int> node(0, n_nodes - 1);
  std::uniform_real_distribution<double> back(0, 120);
  int o = node(rng), d = node(rng);
  while (d == o) d = node(rng);
  return {id, o, d, clock - back(rng), 300, 300};
}

}  // namespace

TEST_CASE("single customer: unique order, additive fuel") {
  const RoutingCosts& rc = test_costs();
  SchedulerInput in;
  in.vehicle_id = 0;
  in.start_node = 0;
  in.start_time_s = 100;
  in.customers = {{1, 6, 18, 90, 300, 300}};
  in.costs = &rc;
  in.objective = Objective::Fuel;
  TripPlan p = solve_tsp_dp(in);
  REQUIRE(p.feasible);
  REQUIRE(p.stops.size() == 2);
  CHECK(p.stops[0].pickup);
  CHECK(p.stops[0].node == 6);
  CHECK(!p.stops[1].pickup);
  CHECK(p.stops[1].node == 18);
  CHECK(p.fuel_g == doctest::Approx(rc.fuel.fuel_g(0, 6) + rc.fuel.fuel_g(6, 18))
                        .epsilon(1e-12));
  CHECK(p.wait_s.at(1) ==
        doctest::Approx(100 + rc.time.cost(0, 6) - 90).epsilon(1e-9));
}

TEST_CASE("coincident stops cost zero transitions") {
  const RoutingCosts& rc = test_costs();
  SchedulerInput in;
  in.start_node = 3;
  in.start_time_s = 0;
  in.customers = {{1, 5, 12, 0, 300, 300}, {2, 5, 12, 0, 300, 300}};
  in.costs = &rc;
  in.objective = Objective::Fuel;
  TripPlan p = solve_tsp_dp(in);
  REQUIRE(p.feasible);
  // Shared pickup and drop nodes: total fuel equals the two distinct legs.
  CHECK(p.fuel_g == doctest::Approx(rc.fuel.fuel_g(3, 5) + rc.fuel.fuel_g(5, 12))
                        .epsilon(1e-9));
  REQUIRE(p.stops.size() == 4);
  CHECK(p.stops[0].time_s == doctest::Approx(p.stops[1].time_s));
  CHECK(p.stops[2].time_s == doctest::Approx(p.stops[3].time_s));
}

TEST_CASE("empty clique and capacity guard") {
  const RoutingCosts& rc = test_costs();
  SchedulerInput in;
  in.start_node = 0;
  in.costs = &rc;
  TripPlan p = solve_tsp_dp(in);
  CHECK(p.feasible);
  CHECK(p.stops.empty());

  SchedulerInput over;
  over.start_node = 0;
  over.capacity = 2;
  over.costs = &rc;
  over.onboard = {{1, 5, 0, 10, 300}, {2, 6, 0, 10, 300}, {3, 7, 0, 10, 300}};
  CHECK_THROWS_AS(solve_tsp_dp(over), CapacityExceeded);
}

TEST_CASE("capacity binds when geometry forces pickups first") {
  // All origins share one node and all destinations another; tight wait
  // limits force every pickup before the first drop, so 5 customers cannot
  // fit a capacity-4 vehicle.
  const RoutingCosts& rc = test_costs();
  SchedulerInput in;
  in.start_node = 0;
  in.start_time_s = 0;
  in.capacity = 4;
  in.costs = &rc;
  double to_pick = rc.time.cost(0, 2);
  for (int i = 0; i < 5; ++i)
    in.customers.push_back({i, 2, 22, 0, to_pick + 1.0, 600});
  TripPlan p = solve_tsp_dp(in);
  CHECK(!p.feasible);
  // The same instance with capacity 5 is feasible.
  in.capacity = 5;
  CHECK(solve_tsp_dp(in).feasible);
}

TEST_CASE("DP matches permutation oracle on random cliques") {
  const RoutingCosts& rc = test_costs();
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> node(0, test_net().node_count() - 1);
  std::uniform_int_distribution<int> nsize(2, 3);
  std::uniform_int_distribution<int> nonb(0, 2);
  int checked = 0;
  double worst_ms = 0;
  for (int it = 0; it < 520; ++it) {
    double clock = 1000;
    SchedulerInput in;
    in.start_node = node(rng);
    in.start_time_s = clock;
    in.costs = &rc;
    in.objective = it % 2 == 0 ? Objective::Time : Objective::Fuel;
    in.policy = it % 4 < 2 ? RoutePolicy::Fastest : RoutePolicy::Eco;
    int n = nsize(rng);
    for (int i = 0; i < n; ++i) in.customers.push_back(rand_request(rng, test_net().node_count(), i, clock));
    if (it % 5 == 0) {
      int k = nonb(rng);
      for (int i = 0; i < k; ++i) {
        int d = node(rng);
        in.onboard.push_back({100 + i, d, clock - 60, 40, 300});
      }
    }
    auto t0 = std::chrono::steady_clock::now();
    TripPlan p = solve_tsp_dp(in);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    worst_ms = std::max(worst_ms, ms);
    OracleResult want = oracle(in);
    CHECK(p.feasible == want.feasible);
    if (p.feasible && want.feasible) {
      double got = in.objective == Objective::Time ? p.time_cost : p.fuel_g;
      CHECK(got == doctest::Approx(want.cost).epsilon(1e-9));
      // Constraint compliance of the emitted plan.
      for (auto [id, w] : p.wait_s) CHECK(w <= 300 + 1e-9);
      for (auto [id, d] : p.delay_s) CHECK(d <= 300 + 1e-9);
      for (size_t s = 1; s < p.stops.size(); ++s)
        CHECK(p.stops[s].time_s >= p.stops[s - 1].time_s - 1e-9);
    }
    ++checked;
  }
  CHECK(checked >= 500);
  CHECK(worst_ms < 10.0);
}

TEST_CASE("adding a customer never lowers the optimal fuel objective") {
  const RoutingCosts& rc = test_costs();
  std::mt19937_64 rng(47);
  for (int it = 0; it < 50; ++it) {
    std::uniform_int_distribution<int> node(0, test_net().node_count() - 1);
    SchedulerInput small;
    small.start_node = node(rng);
    small.start_time_s = 500;
    small.costs = &rc;
    small.objective = Objective::Fuel;
    small.customers = {rand_request(rng, test_net().node_count(), 0, 500),
                       rand_request(rng, test_net().node_count(), 1, 500)};
    SchedulerInput big = small;
    big.customers.push_back(rand_request(rng, test_net().node_count(), 2, 500));
    TripPlan ps = solve_tsp_dp(small);
    TripPlan pb = solve_tsp_dp(big);
    if (ps.feasible && pb.feasible) CHECK(pb.fuel_g >= ps.fuel_g - 1e-9);
  }
}
