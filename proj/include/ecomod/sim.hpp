#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecomod/assignment.hpp"
#include "ecomod/demand.hpp"
#include "ecomod/rebalancer.hpp"
#include "ecomod/routing.hpp"
#include "ecomod/scheduler.hpp"

namespace ecomod {

enum class TripPhase { Assignment, PassiveRebalance, ActiveRebalance };

struct ConfigPolicy {
  Objective objective = Objective::Time;
  RoutePolicy assign = RoutePolicy::Fastest;
  RoutePolicy passive = RoutePolicy::Fastest;
};

// Table-driven strategy rows; id 9 is the personal-vehicle baseline.
ConfigPolicy table_config(int configuration);

// Metric actually used for a leg given configuration, occupancy and phase.
// Active-rebalance legs are always eco-routed.
Metric routing_policy(int configuration, int occupancy, TripPhase phase);

struct SimConfig {
  int configuration = 1;  // 1..9 (9 = baseline)
  int fleet_size = 60;
  double assign_interval_s = 30;
  double dt_s = 1;
  double warmup_s = 2400;
  double horizon_s = 7200;
  double cohort_tail_s = 1200;  // requests this close to the horizon are not
                                // counted in the service-level cohort
  uint64_t seed = 1;
  double onboard_weight = 1.0;   // w_D
  double cost_weight = 0.5;      // w_c
  double sharing_discount = 0.8; // gamma
  int rebalance_horizon = 5;     // T (assignment intervals)
  int capacity = 4;              // V_c
  int max_clique_customers = 4;
  bool active_rebalance = true;
  double baseline_mix = 0.5;     // baseline: fraction on shortest-distance routes
};

struct ScenarioInputs {
  const RoadNetwork* net = nullptr;
  const RoutingCosts* costs = nullptr;
  const PartitionSet* partitions = nullptr;
  const FuelModel* fuel = nullptr;
  std::vector<TravelRequest> requests;       // sorted by request time
  std::vector<double> lambda_per_s;          // effective per-partition rate
  std::vector<double> origin_density;        // o_k
};

struct MetricsReport {
  int generated = 0;
  int served = 0;    // completed within the run
  int rejected = 0;
  int pending = 0;   // waiting/assigned/onboard at the horizon

  int cohort_size = 0;
  double served_within_constraints_ratio = 0;

  double mean_wait_s = 0, p25_wait_s = 0, p75_wait_s = 0;
  double mean_delay_s = 0, p25_delay_s = 0, p75_delay_s = 0;

  double fleet_fuel_g = 0;       // accrued in the measurement window
  double fuel_per_served_g = 0;
  double total_fuel_g = 0;       // whole run, for conservation checks
  double empty_distance_ratio = 0;
  double mean_assigned_per_running = 0;
  double mean_onboard_per_running = 0;
  double baseline_fuel_delta = 0;  // filled by the caller when a baseline exists
};

struct EventLog {
  struct Event {
    double t = 0;
    char type = 'e';  // e=edge, p=pickup, d=dropoff, r=reject
    int vehicle = -1;
    int request = -1;
    int node = -1;
    double fuel_g = 0;
    double dist_m = 0;
  };
  std::vector<Event> events;
  void write_jsonl(const std::string& path) const;
};

MetricsReport run_scenario(const ScenarioInputs& inputs, const SimConfig& config,
                           EventLog* log = nullptr);

// Personal-vehicle baseline (Table I row 9): every request served instantly
// by a dedicated vehicle at its origin.
MetricsReport run_baseline(const ScenarioInputs& inputs, const SimConfig& config);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& scenario, int configuration, int fleet_size,
                            uint64_t seed, const MetricsReport& r);

}  // namespace ecomod
