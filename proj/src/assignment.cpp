#include "ecomod/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace ecomod {

std::vector<FeasibleTrip> build_trips(const std::vector<Clique>& cliques,
                                      const ShareabilityGraph& graph,
                                      const RoutingCosts& costs, Objective objective,
                                      RoutePolicy policy, double onboard_weight,
                                      double clock_s) {
  std::vector<FeasibleTrip> trips;
  for (const Clique& c : cliques) {
    const VehicleSnapshot& v = graph.vehicles[c.vehicle];
    SchedulerInput in;
    in.vehicle_id = v.id;
    in.start_node = v.node;
    in.start_time_s = std::max(v.available_time_s, clock_s);
    in.capacity = v.capacity;
    in.onboard = v.onboard;
    for (int r : c.request_idx) in.customers.push_back(graph.requests[r]);
    in.objective = objective;
    in.onboard_weight = onboard_weight;
    in.policy = policy;
    in.costs = &costs;
    TripPlan plan = solve_tsp_dp(in);
    if (!plan.feasible) continue;
    FeasibleTrip t;
    t.trip_id = static_cast<int>(trips.size());
    t.vehicle = c.vehicle;
    t.request_idx = c.request_idx;
    t.plan = std::move(plan);
    t.cost = objective == Objective::Time ? t.plan.time_cost : t.plan.fuel_g;
    trips.push_back(std::move(t));
  }
  return trips;
}

AssignmentSolution solve_ilp(const AssignmentProblem& problem) {
  const int m = static_cast<int>(problem.trips.size());
  const int n = problem.n_customers;

  double penalty = problem.penalty;
  if (penalty <= 0) {
    double maxc = 0;
    for (const auto& t : problem.trips) maxc = std::max(maxc, t.cost);
    penalty = 10.0 * maxc + 1.0;
  }

  AssignmentSolution sol;
  if (m == 0) {
    for (int j = 0; j < n; ++j) sol.ignored_customers.push_back(j);
    sol.objective = n * penalty;
    return sol;
  }

  // Substituting delta_c = B delta_t turns Eq (6)-(8) into a set packing:
  // min sum (c_i - D |customers_i|) x_i  s.t. vehicle rows <= 1, customer rows <= 1.
  ZeroOneProgram p;
  p.cost.resize(m);
  for (int i = 0; i < m; ++i)
    p.cost(i) = problem.trips[i].cost -
                penalty * static_cast<double>(problem.trips[i].request_idx.size());
  p.a_le.setZero(problem.n_vehicles + n, m);
  p.b_le.setOnes(problem.n_vehicles + n);
  for (int i = 0; i < m; ++i) {
    p.a_le(problem.trips[i].vehicle, i) = 1.0;
    for (int j : problem.trips[i].request_idx) p.a_le(problem.n_vehicles + j, i) = 1.0;
  }

  ZeroOneSolution z = solve_01_ilp(p);

  std::vector<char> served(n, 0);
  for (int i = 0; i < m; ++i)
    if (z.x(i)) {
      sol.selected_trips.push_back(i);
      for (int j : problem.trips[i].request_idx) served[j] = 1;
    }
  for (int j = 0; j < n; ++j)
    if (!served[j]) sol.ignored_customers.push_back(j);
  sol.objective = z.objective + n * penalty;
  return sol;
}

std::vector<std::pair<int, int>> passive_rebalance(const Eigen::MatrixXd& pickup_time) {
  const int nv = static_cast<int>(pickup_time.rows());
  const int nc = static_cast<int>(pickup_time.cols());
  std::vector<std::pair<int, int>> matches;
  if (nv == 0 || nc == 0) return matches;

  std::vector<std::pair<int, int>> vars;  // (vehicle, customer)
  double maxc = 0;
  for (int v = 0; v < nv; ++v)
    for (int c = 0; c < nc; ++c)
      if (pickup_time(v, c) >= 0) {
        vars.emplace_back(v, c);
        maxc = std::max(maxc, pickup_time(v, c));
      }
  if (vars.empty()) return matches;

  // big bonus per match makes cardinality dominate total pickup time
  double bonus = maxc * (std::min(nv, nc) + 1) + 1.0;
  ZeroOneProgram p;
  p.cost.resize(vars.size());
  p.a_le.setZero(nv + nc, vars.size());
  p.b_le.setOnes(nv + nc);
  for (size_t k = 0; k < vars.size(); ++k) {
    p.cost(k) = pickup_time(vars[k].first, vars[k].second) - bonus;
    p.a_le(vars[k].first, k) = 1.0;
    p.a_le(nv + vars[k].second, k) = 1.0;
  }
  ZeroOneSolution z = solve_01_ilp(p);
  for (size_t k = 0; k < vars.size(); ++k)
    if (z.x(k)) matches.push_back(vars[k]);
  std::sort(matches.begin(), matches.end());
  return matches;
}

}  // namespace ecomod
