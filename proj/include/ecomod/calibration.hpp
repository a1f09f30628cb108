#pragma once

#include <functional>
#include <vector>

#include "ecomod/fuel.hpp"
#include "ecomod/optim.hpp"

namespace ecomod {

// Per-link flow target from a measured normalized mean speed (Eqs (13)-(14)
// inverted). Speeds at or below eps are ambiguous and excluded upstream.
struct LinkSpeedSample {
  int link = -1;
  double normalized_speed = 1.0;  // v / v_free
  double free_flow_mps = 0;
  int lanes = 1;
};

double link_flow_from_speed(const LinkSpeedSample& sample, const SpeedDensityModel& model);

// OD calibration, Eqs (15)-(18): two candidate routes per OD pair
// (shortest-distance and empirical-shortest-time), link incidences as 0/1.
struct ODFlowProblem {
  int n_links = 0;
  // per OD pair: links used by the shortest-distance / shortest-time route
  std::vector<std::vector<int>> dist_route_links;
  std::vector<std::vector<int>> time_route_links;
  std::vector<double> target_link_flow;  // q_hat_l, size n_links
  std::vector<double> prior_flow;        // q^k_prior per OD pair
  double regularization = 0.1;           // psi
};

struct ODFlowSolution {
  std::vector<double> flow_dist;  // q^{k,d}
  std::vector<double> flow_time;  // q^{k,t}
  double objective = 0;
  double kkt_residual = 0;
};

ODFlowSolution calibrate_od_flows(const ODFlowProblem& p);

// Grid search over candidate real-time routing ratios; ties to the smaller
// ratio. simulate(ratio) returns per-link mean speeds.
double estimate_realtime_ratio(const std::vector<double>& candidates,
                               const std::function<std::vector<double>(double)>& simulate,
                               const std::vector<double>& measured_speeds);

}  // namespace ecomod
