#pragma once

#include <map>
#include <vector>

#include "ecomod/demand.hpp"
#include "ecomod/routing.hpp"

namespace ecomod {

struct Stop {
  int node = -1;
  int request_id = -1;
  bool pickup = false;
  double time_s = 0;
};

struct TripPlan {
  int vehicle_id = -1;
  std::vector<Stop> stops;
  std::map<int, double> wait_s;   // new customers only
  std::map<int, double> delay_s;  // every customer dropped by this plan
  double time_cost = 0;           // Eq-(4)-style accumulated wait/onboard time
  double fuel_g = 0;
  double finish_time_s = 0;
  bool feasible = false;
};

// A customer already in the vehicle: only the drop-off remains. The drop
// deadline is pickup_time + min_travel + max_delay, fixed at pickup.
struct OnboardCustomer {
  int request_id = -1;
  int dest = -1;
  double pickup_time_s = 0;
  double min_travel_s = 0;  // fastest-route time from origin to dest
  double max_delay_s = 300;
};

enum class Objective { Time, Fuel };

struct SchedulerInput {
  int vehicle_id = -1;
  int start_node = -1;
  double start_time_s = 0;  // when the vehicle becomes available at start_node
  int capacity = 4;
  std::vector<OnboardCustomer> onboard;
  std::vector<TravelRequest> customers;
  Objective objective = Objective::Time;
  double onboard_weight = 1.0;  // w_D
  RoutePolicy policy = RoutePolicy::Fastest;
  const RoutingCosts* costs = nullptr;
};

// Exact pickup-and-delivery TSP over indicator states. Returns a plan with
// feasible == false when no precedence/capacity-valid order meets every
// wait and delay limit. Throws CapacityExceeded when even an empty vehicle
// could not hold the clique.
TripPlan solve_tsp_dp(const SchedulerInput& in);

}  // namespace ecomod
