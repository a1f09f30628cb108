#pragma once

#include <cstdint>
#include <vector>

#include "ecomod/network.hpp"
#include "ecomod/optim.hpp"

namespace ecomod {

// Relaxed idle-fleet relocation over partitions (Eqs (9)-(12)).
// Candidate j == 0 is always the stay-trip.
struct RebalanceCandidate {
  int dest_partition = -1;
  double fuel_cost = 0;       // C_ij, eco-route fuel, 0 for the stay-trip
  int arrival_interval = 0;   // tau at which the vehicle reaches dest
};

struct RebalanceProblem {
  int n_partitions = 0;
  std::vector<int> vehicle_partition;                      // per idle vehicle
  std::vector<std::vector<RebalanceCandidate>> candidates; // per idle vehicle
  std::vector<double> origin_density;                      // o_k, sums to 1
  std::vector<double> lambda_per_interval;                 // expected departures per tau
  Eigen::MatrixXd arrivals;   // d_k^tau, (n_partitions x horizon+1), column 0 unused
  double sharing_discount = 0.8;  // gamma
  int horizon = 5;                // T, in assignment intervals
  double cost_weight = 0.5;       // w_c
};

struct IdleForecast {
  Eigen::MatrixXd n;          // n_k^tau, raw affine value (may be negative)
  Eigen::VectorXd normalizer; // N_tau, tau = 1..T (index 0 unused)
};

// Fractional decision variables: rows per vehicle over its candidates.
using FractionalPlan = std::vector<Eigen::VectorXd>;

struct RebalancePlan {
  std::vector<int> choice;  // per vehicle: candidate index (0 = stay)
};

IdleForecast predict_idle_counts(const RebalanceProblem& p, const FractionalPlan& t);

struct RelaxedSolution {
  FractionalPlan t;
  double objective = 0;
  double kkt_residual = 0;
};

RelaxedSolution solve_relaxed(const RebalanceProblem& p);

RebalancePlan round_plan(const FractionalPlan& t, uint64_t seed);

// Eq (9) first term at horizon tau = T, with negative counts clamped to 0
// before normalization; used for before/after reporting.
double distribution_distance(const RebalanceProblem& p, const FractionalPlan& t);

FractionalPlan integer_as_fractional(const RebalanceProblem& p, const RebalancePlan& plan);

}  // namespace ecomod
