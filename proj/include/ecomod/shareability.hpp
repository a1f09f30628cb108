#pragma once

#include <string>
#include <vector>

#include "ecomod/scheduler.hpp"

namespace ecomod {

// Vehicle snapshot as seen by the assignment pipeline: where (and when) the
// vehicle can next accept a plan, plus its standing commitments.
struct VehicleSnapshot {
  int id = -1;
  int node = -1;
  double available_time_s = 0;
  int capacity = 4;
  std::vector<OnboardCustomer> onboard;
};

struct ShareabilityGraph {
  std::vector<TravelRequest> requests;
  std::vector<VehicleSnapshot> vehicles;
  // adjacency by local index
  std::vector<std::vector<char>> rr;  // requests x requests
  std::vector<std::vector<char>> rv;  // vehicles x requests

  void dump_edge_list(const std::string& path) const;
};

struct Clique {
  int vehicle = -1;                // local vehicle index
  std::vector<int> request_idx;    // local request indices, sorted
};

bool rr_edge(const TravelRequest& r1, const TravelRequest& r2, const RoutingCosts& costs,
             double clock_s, RoutePolicy policy = RoutePolicy::Fastest, int capacity = 4);

bool rv_edge(const VehicleSnapshot& v, const TravelRequest& r, const RoutingCosts& costs,
             double clock_s, RoutePolicy policy = RoutePolicy::Fastest);

ShareabilityGraph build_shareability_graph(const std::vector<TravelRequest>& requests,
                                           const std::vector<VehicleSnapshot>& vehicles,
                                           const RoutingCosts& costs, double clock_s,
                                           RoutePolicy policy);

// All cliques with exactly one vehicle and 1..max_customers requests whose
// pairs are adjacent. Maximal cliques come from Bron-Kerbosch with pivoting;
// subsets are expanded afterwards (the ILP needs non-maximal trips too).
std::vector<Clique> enumerate_cliques(const ShareabilityGraph& graph, int max_customers);

}  // namespace ecomod
