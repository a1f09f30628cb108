#include "ecomod/rebalancer.hpp"

#include <cmath>
#include <random>

namespace ecomod {

namespace {

// 1 if vehicle i executing candidate c occupies partition k at interval tau.
int occupies(const RebalanceProblem& p, int vehicle, const RebalanceCandidate& c, int k,
             int tau) {
  int where = tau >= c.arrival_interval ? c.dest_partition : p.vehicle_partition[vehicle];
  return where == k ? 1 : 0;
}

void validate(const RebalanceProblem& p, const FractionalPlan& t) {
  if (t.size() != p.candidates.size()) throw Error("rebalancer: plan/problem size mismatch");
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() != static_cast<Eigen::Index>(p.candidates[i].size()))
      throw Error("rebalancer: candidate row size mismatch");
    if (std::abs(t[i].sum() - 1.0) > 1e-6 || (t[i].array() < -1e-9).any())
      throw Error("rebalancer: row not stochastic");
  }
}

}  // namespace

IdleForecast predict_idle_counts(const RebalanceProblem& p, const FractionalPlan& t) {
  validate(p, t);
  const int K = p.n_partitions;
  const int T = p.horizon;
  const int nveh = static_cast<int>(p.candidates.size());

  IdleForecast f;
  f.n.setZero(K, T + 1);
  f.normalizer.setZero(T + 1);

  double lambda_total = 0;
  for (double l : p.lambda_per_interval) lambda_total += l;

  for (int tau = 1; tau <= T; ++tau) {
    double arr_total = 0;
    for (int k = 0; k < K; ++k) {
      double n = p.arrivals(k, tau) - tau * p.sharing_discount * p.lambda_per_interval[k];
      for (int i = 0; i < nveh; ++i)
        for (int j = 0; j < static_cast<int>(p.candidates[i].size()); ++j)
          n += t[i](j) * occupies(p, i, p.candidates[i][j], k, tau);
      f.n(k, tau) = n;
      arr_total += p.arrivals(k, tau);
    }
    f.normalizer(tau) = nveh + arr_total - tau * p.sharing_discount * lambda_total;
    if (f.normalizer(tau) <= 0)
      throw ZeroNormalizer("predict_idle_counts: N_tau <= 0 at tau " + std::to_string(tau));
  }
  return f;
}

RelaxedSolution solve_relaxed(const RebalanceProblem& p) {
  const int K = p.n_partitions;
  const int T = p.horizon;
  const int nveh = static_cast<int>(p.candidates.size());

  RelaxedSolution sol;
  if (nveh == 0) return sol;

  int nvar = 0;
  std::vector<int> offset(nveh);
  for (int i = 0; i < nveh; ++i) {
    offset[i] = nvar;
    nvar += static_cast<int>(p.candidates[i].size());
  }

  // first term rows: (k, tau); A x + c with A = occupancy / N_tau
  // Normalizers do not depend on t, so compute them from the all-stay plan.
  FractionalPlan stay(nveh);
  for (int i = 0; i < nveh; ++i) {
    stay[i].setZero(p.candidates[i].size());
    stay[i](0) = 1.0;
  }
  IdleForecast base = predict_idle_counts(p, stay);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K * T, nvar);
  Eigen::VectorXd c0(K * T);
  for (int tau = 1; tau <= T; ++tau) {
    double ninv = 1.0 / base.normalizer(tau);
    for (int k = 0; k < K; ++k) {
      int row = (tau - 1) * K + k;
      double cons = p.arrivals(k, tau) - tau * p.sharing_discount * p.lambda_per_interval[k];
      c0(row) = cons * ninv - p.origin_density[k];
      for (int i = 0; i < nveh; ++i)
        for (int j = 0; j < static_cast<int>(p.candidates[i].size()); ++j)
          A(row, offset[i] + j) = occupies(p, i, p.candidates[i][j], k, tau) * ninv;
    }
  }

  SimplexQP qp;
  double wb = 1.0 - p.cost_weight;
  qp.Q = 2.0 * wb * A.transpose() * A;
  qp.c = 2.0 * wb * A.transpose() * c0;
  for (int i = 0; i < nveh; ++i)
    for (int j = 0; j < static_cast<int>(p.candidates[i].size()); ++j)
      qp.c(offset[i] + j) += p.cost_weight * p.candidates[i][j].fuel_cost;
  qp.groups.resize(nveh);
  qp.group_sums.assign(nveh, 1.0);
  for (int i = 0; i < nveh; ++i)
    for (int j = 0; j < static_cast<int>(p.candidates[i].size()); ++j)
      qp.groups[i].push_back(offset[i] + j);

  QPResult r = solve_simplex_qp(qp);

  sol.t.resize(nveh);
  for (int i = 0; i < nveh; ++i) {
    sol.t[i].resize(p.candidates[i].size());
    for (int j = 0; j < static_cast<int>(p.candidates[i].size()); ++j)
      sol.t[i](j) = r.x(offset[i] + j);
  }
  // objective includes the constant term of the squared norm
  sol.objective = r.objective + wb * c0.squaredNorm();
  sol.kkt_residual = r.kkt_residual;
  return sol;
}

RebalancePlan round_plan(const FractionalPlan& t, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unif = [&rng]() { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
  RebalancePlan plan;
  plan.choice.resize(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    double sum = t[i].sum();
    if (std::abs(sum - 1.0) > 1e-6) throw Error("round_plan: row not stochastic");
    double u = unif() * sum;
    double acc = 0;
    int pick = static_cast<int>(t[i].size()) - 1;
    for (int j = 0; j < t[i].size(); ++j) {
      acc += t[i](j);
      if (u < acc) {
        pick = j;
        break;
      }
    }
    plan.choice[i] = pick;
  }
  return plan;
}

double distribution_distance(const RebalanceProblem& p, const FractionalPlan& t) {
  IdleForecast f = predict_idle_counts(p, t);
  int T = p.horizon;
  double d = 0;
  for (int k = 0; k < p.n_partitions; ++k) {
    double nk = std::max(0.0, f.n(k, T));
    double diff = nk / f.normalizer(T) - p.origin_density[k];
    d += diff * diff;
  }
  return d;
}

FractionalPlan integer_as_fractional(const RebalanceProblem& p, const RebalancePlan& plan) {
  FractionalPlan t(p.candidates.size());
  for (size_t i = 0; i < p.candidates.size(); ++i) {
    t[i].setZero(p.candidates[i].size());
    t[i](plan.choice[i]) = 1.0;
  }
  return t;
}

}  // namespace ecomod
