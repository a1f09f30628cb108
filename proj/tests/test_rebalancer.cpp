#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ecomod/rebalancer.hpp"

using namespace ecomod;

namespace {

// Two partitions, adjacency both ways; every vehicle has a stay-trip and a
// move-trip arriving after `arrive` intervals.
RebalanceProblem two_partition_problem(std::vector<int> vehicle_parts, double move_cost,
                                       int arrive = 1) {
  RebalanceProblem p;
  p.n_partitions = 2;
  p.vehicle_partition = std::move(vehicle_parts);
  for (int part : p.vehicle_partition)
    p.candidates.push_back({{part, 0.0, 0}, {1 - part, move_cost, arrive}});
  p.origin_density = {0.5, 0.5};
  p.lambda_per_interval = {0.0, 0.0};
  p.arrivals = Eigen::MatrixXd::Zero(2, p.horizon + 1);
  return p;
}

FractionalPlan all_stay(const RebalanceProblem& p) {
  FractionalPlan t(p.candidates.size());
  for (size_t i = 0; i < t.size(); ++i) {
    t[i].setZero(p.candidates[i].size());
    t[i](0) = 1.0;
  }
  return t;
}

// Direct re-evaluation of the idle-count forecast, written independently.
double oracle_count(const RebalanceProblem& p, const FractionalPlan& t, int k, int tau) {
  double n = p.arrivals(k, tau) - tau * p.sharing_discount * p.lambda_per_interval[k];
  for (size_t i = 0; i < p.candidates.size(); ++i)
    for (int j = 0; j < (int)p.candidates[i].size(); ++j) {
      const RebalanceCandidate& c = p.candidates[i][j];
      int where = tau >= c.arrival_interval ? c.dest_partition : p.vehicle_partition[i];
      if (where == k) n += t[i](j);
    }
  return n;
}

double objective_of(const RebalanceProblem& p, const FractionalPlan& t) {
  IdleForecast f = predict_idle_counts(p, t);
  double first = 0;
  for (int tau = 1; tau <= p.horizon; ++tau)
    for (int k = 0; k < p.n_partitions; ++k) {
      double diff = f.n(k, tau) / f.normalizer(tau) - p.origin_density[k];
      first += diff * diff;
    }
  double cost = 0;
  for (size_t i = 0; i < p.candidates.size(); ++i)
    for (int j = 0; j < (int)p.candidates[i].size(); ++j)
      cost += t[i](j) * p.candidates[i][j].fuel_cost;
  return (1.0 - p.cost_weight) * first + p.cost_weight * cost;
}

}  // namespace

TEST_CASE("predict_idle_counts basics") {
  // One idle vehicle with only a stay-trip, no demand, no arrivals.
  RebalanceProblem p;
  p.n_partitions = 2;
  p.vehicle_partition = {0};
  p.candidates = {{{0, 0.0, 0}}};
  p.origin_density = {1.0, 0.0};
  p.lambda_per_interval = {0.0, 0.0};
  p.arrivals = Eigen::MatrixXd::Zero(2, p.horizon + 1);
  FractionalPlan t = all_stay(p);
  IdleForecast f = predict_idle_counts(p, t);
  for (int tau = 1; tau <= p.horizon; ++tau) {
    CHECK(f.n(0, tau) == doctest::Approx(1.0));
    CHECK(f.n(1, tau) == doctest::Approx(0.0));
    CHECK(f.normalizer(tau) == doctest::Approx(1.0));
  }

  // Departures deplete the normalizer to zero at the final interval.
  RebalanceProblem z = p;
  z.sharing_discount = 1.0;
  z.lambda_per_interval = {1.0 / z.horizon, 0.0};
  CHECK_THROWS_AS(predict_idle_counts(z, all_stay(z)), ZeroNormalizer);
}

TEST_CASE("predict_idle_counts matches formula re-evaluation on random instances") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 50; ++it) {
    RebalanceProblem p;
    p.n_partitions = 2 + (int)(u(rng) * 3);
    p.horizon = 3 + (int)(u(rng) * 3);
    int nveh = 1 + (int)(u(rng) * 5);
    for (int i = 0; i < nveh; ++i) {
      int part = (int)(u(rng) * p.n_partitions);
      p.vehicle_partition.push_back(part);
      std::vector<RebalanceCandidate> cands{{part, 0.0, 0}};
      int extra = 1 + (int)(u(rng) * (p.n_partitions - 1));
      for (int e = 0; e < extra; ++e)
        cands.push_back({(part + 1 + e) % p.n_partitions, u(rng) * 50,
                         1 + (int)(u(rng) * (p.horizon - 1))});
      p.candidates.push_back(cands);
    }
    p.origin_density.assign(p.n_partitions, 1.0 / p.n_partitions);
    p.lambda_per_interval.assign(p.n_partitions, 0.02 * u(rng));
    p.arrivals = Eigen::MatrixXd::Zero(p.n_partitions, p.horizon + 1);
    for (int k = 0; k < p.n_partitions; ++k)
      for (int tau = 1; tau <= p.horizon; ++tau) p.arrivals(k, tau) = u(rng);

    FractionalPlan t(nveh);
    for (int i = 0; i < nveh; ++i) {
      t[i].resize(p.candidates[i].size());
      for (int j = 0; j < t[i].size(); ++j) t[i](j) = u(rng) + 0.05;
      t[i] /= t[i].sum();
    }
    IdleForecast f = predict_idle_counts(p, t);
    double lam_tot = 0, arr_tot;
    for (double l : p.lambda_per_interval) lam_tot += l;
    for (int tau = 1; tau <= p.horizon; ++tau) {
      arr_tot = 0;
      for (int k = 0; k < p.n_partitions; ++k) {
        CHECK(f.n(k, tau) == doctest::Approx(oracle_count(p, t, k, tau)).epsilon(1e-9));
        arr_tot += p.arrivals(k, tau);
      }
      CHECK(f.normalizer(tau) ==
            doctest::Approx(nveh + arr_tot - tau * p.sharing_discount * lam_tot).epsilon(1e-9));
    }
  }
}

TEST_CASE("solve_relaxed with pure cost weight picks the cheapest trip") {
  RebalanceProblem p = two_partition_problem({0, 1}, 25.0);
  p.cost_weight = 1.0;
  RelaxedSolution s = solve_relaxed(p);
  CHECK(s.kkt_residual <= 1e-6);
  for (const auto& row : s.t) {
    CHECK(row(0) == doctest::Approx(1.0).epsilon(1e-6));  // stay is free
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("solve_relaxed moves mass toward demand when relocation is free") {
  RebalanceProblem p = two_partition_problem({1}, 0.0);
  p.origin_density = {1.0, 0.0};
  p.cost_weight = 0.0;
  RelaxedSolution s = solve_relaxed(p);
  CHECK(s.kkt_residual <= 1e-6);
  CHECK(s.t[0](1) > 0.5);  // towards partition 0

  // 1-D grid search over the single row confirms the optimum.
  double best = 1e30, best_m = 0;
  for (double m = 0; m <= 1.0 + 1e-12; m += 0.0005) {
    FractionalPlan t{Eigen::Vector2d(1 - m, m)};
    double obj = objective_of(p, t);
    if (obj < best) { best = obj; best_m = m; }
  }
  CHECK(s.t[0](1) == doctest::Approx(best_m).epsilon(2e-3));
  CHECK(s.objective == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("solve_relaxed matches grid search on a two-vehicle instance") {
  RebalanceProblem p = two_partition_problem({0, 0}, 10.0);
  p.origin_density = {0.3, 0.7};
  p.cost_weight = 0.4;
  RelaxedSolution s = solve_relaxed(p);
  CHECK(s.kkt_residual <= 1e-6);
  double best = 1e30;
  for (double a = 0; a <= 1.0 + 1e-12; a += 0.005)
    for (double b = 0; b <= 1.0 + 1e-12; b += 0.005) {
      FractionalPlan t{Eigen::Vector2d(1 - a, a), Eigen::Vector2d(1 - b, b)};
      best = std::min(best, objective_of(p, t));
    }
  CHECK(s.objective == doctest::Approx(best).epsilon(1e-4));

  // Relaxation bound: no integer plan beats the relaxed optimum.
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1) {
      RebalancePlan ip{{c0, c1}};
      CHECK(s.objective <= objective_of(p, integer_as_fractional(p, ip)) + 1e-6);
    }
}

TEST_CASE("relaxed objective is convex in the decision variables") {
  RebalanceProblem p = two_partition_problem({0, 1, 0}, 5.0, 2);
  p.origin_density = {0.2, 0.8};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 100; ++it) {
    FractionalPlan a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      double x = u(rng), y = u(rng);
      a[i] = Eigen::Vector2d(1 - x, x);
      b[i] = Eigen::Vector2d(1 - y, y);
    }
    double lam = u(rng);
    FractionalPlan mid(3);
    for (int i = 0; i < 3; ++i) mid[i] = lam * a[i] + (1 - lam) * b[i];
    CHECK(objective_of(p, mid) <=
          lam * objective_of(p, a) + (1 - lam) * objective_of(p, b) + 1e-9);
  }
}

TEST_CASE("round_plan degenerate row and binomial frequencies") {
  FractionalPlan stay{Eigen::Vector2d(1.0, 0.0)};
  for (uint64_t s = 0; s < 50; ++s) CHECK(round_plan(stay, s).choice[0] == 0);

  FractionalPlan half{Eigen::Vector2d(0.5, 0.5)};
  int n = 10000, ones = 0;
  for (uint64_t s = 0; s < (uint64_t)n; ++s) {
    RebalancePlan plan = round_plan(half, s);
    REQUIRE(plan.choice.size() == 1);  // one trip per vehicle, always
    ones += plan.choice[0];
  }
  double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(ones - n / 2.0) <= 3 * sigma);

  // Skewed row frequencies too.
  FractionalPlan skew{Eigen::Vector3d(0.2, 0.3, 0.5)};
  std::vector<int> hits(3, 0);
  for (uint64_t s = 0; s < (uint64_t)n; ++s) hits[round_plan(skew, s).choice[0]]++;
  double probs[3] = {0.2, 0.3, 0.5};
  for (int j = 0; j < 3; ++j) {
    double sd = std::sqrt(n * probs[j] * (1 - probs[j]));
    CHECK(std::abs(hits[j] - n * probs[j]) <= 3 * sd);
  }
}

TEST_CASE("planned rebalancing reduces the distribution distance") {
  // Planted imbalance: all vehicles idle in partition 1, demand in partition 0.
  RebalanceProblem p = two_partition_problem({1, 1, 1, 1}, 30.0);
  p.origin_density = {0.9, 0.1};
  p.cost_weight = 0.0;
  double before = distribution_distance(p, all_stay(p));
  RelaxedSolution s = solve_relaxed(p);
  CHECK(distribution_distance(p, s.t) <= before + 1e-9);
  // Rounded plans improve on average as well.
  double after = 0;
  int n = 200;
  for (uint64_t seed = 0; seed < (uint64_t)n; ++seed)
    after += distribution_distance(p, integer_as_fractional(p, round_plan(s.t, seed)));
  CHECK(after / n < before);
}

TEST_CASE("balanced fleet with positive cost weight stays put") {
  RebalanceProblem p = two_partition_problem({0, 1}, 40.0);
  p.origin_density = {0.5, 0.5};
  p.cost_weight = 0.5;
  RelaxedSolution s = solve_relaxed(p);
  for (const auto& row : s.t) CHECK(row(0) == doctest::Approx(1.0).epsilon(1e-5));
}
