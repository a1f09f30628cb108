#pragma once

#include <vector>

#include "ecomod/optim.hpp"
#include "ecomod/shareability.hpp"

namespace ecomod {

struct FeasibleTrip {
  int trip_id = -1;
  int vehicle = -1;               // local vehicle index
  std::vector<int> request_idx;   // local request indices
  TripPlan plan;
  double cost = 0;  // c_t^i under the active objective
};

std::vector<FeasibleTrip> build_trips(const std::vector<Clique>& cliques,
                                      const ShareabilityGraph& graph,
                                      const RoutingCosts& costs, Objective objective,
                                      RoutePolicy policy, double onboard_weight,
                                      double clock_s);

struct AssignmentProblem {
  std::vector<FeasibleTrip> trips;
  int n_customers = 0;
  int n_vehicles = 0;
  double penalty = 0;  // D; if <= 0, computed as 10 * max trip cost + 1
};

struct AssignmentSolution {
  std::vector<int> selected_trips;    // indices into trips
  std::vector<int> ignored_customers; // local request indices
  double objective = 0;
};

// Eqs (6)-(8): one trip per vehicle, every customer assigned or ignored.
AssignmentSolution solve_ilp(const AssignmentProblem& problem);

// Min-cost one-to-one matching of idle vehicles to still-servable ignored
// customers; maximizes match count first, then minimizes total pickup time.
// cost(v, c) < 0 marks an inadmissible pair.
std::vector<std::pair<int, int>> passive_rebalance(const Eigen::MatrixXd& pickup_time);

}  // namespace ecomod
