#pragma once

#include "ecomod/network.hpp"

namespace ecomod {

enum class RoutePolicy { Fastest, Eco, Hybrid, ShortestDistance };

// Offline all-pairs matrices, computed once per network + fuel model.
struct RoutingCosts {
  CostMatrix time;      // fastest routes
  CostMatrix fuel;      // eco routes
  CostMatrix distance;  // shortest-distance routes (baseline only)

  static RoutingCosts build(const RoadNetwork& net, const FuelModel& fuel_model) {
    RoutingCosts rc;
    rc.time = all_pairs_costs(net, Metric::Time, fuel_model);
    rc.fuel = all_pairs_costs(net, Metric::Fuel, fuel_model);
    rc.distance = all_pairs_costs(net, Metric::Distance, fuel_model);
    return rc;
  }

  const CostMatrix& matrix(RoutePolicy policy, int occupancy) const {
    switch (policy) {
      case RoutePolicy::Fastest: return time;
      case RoutePolicy::Eco: return fuel;
      case RoutePolicy::Hybrid: return occupancy > 0 ? time : fuel;
      case RoutePolicy::ShortestDistance: return distance;
    }
    return time;
  }

  double leg_time(RoutePolicy policy, int occupancy, int from, int to) const {
    return matrix(policy, occupancy).time_s(from, to);
  }
  double leg_fuel(RoutePolicy policy, int occupancy, int from, int to) const {
    return matrix(policy, occupancy).fuel_g(from, to);
  }
};

}  // namespace ecomod
