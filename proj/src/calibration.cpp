#include "ecomod/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecomod {

double link_flow_from_speed(const LinkSpeedSample& s, const SpeedDensityModel& m) {
  if (s.normalized_speed <= m.eps)
    throw CongestedAmbiguity("link_flow_from_speed: speed at or below congested floor");
  if (s.normalized_speed > 1.0 + 1e-9)
    throw Error("link_flow_from_speed: normalized speed > 1");

  // invert alpha2 rho^2 + alpha1 rho + alpha0 = v_n on [0, rho_critical];
  // the fitted branch is monotone there, so the root is unique
  double a = m.alpha2, b = m.alpha1, c = m.alpha0 - s.normalized_speed;
  double rho;
  if (std::abs(a) < 1e-15) {
    if (std::abs(b) < 1e-15) {
      if (std::abs(c) > 1e-12) throw Error("link_flow_from_speed: constant branch mismatch");
      rho = 0;
    } else {
      rho = -c / b;
    }
  } else {
    double disc = b * b - 4 * a * c;
    if (disc < 0) throw Error("link_flow_from_speed: no real root");
    double sq = std::sqrt(disc);
    double r1 = (-b - sq) / (2 * a), r2 = (-b + sq) / (2 * a);
    if (r1 > r2) std::swap(r1, r2);
    const double tol = 1e-9 * std::max(1.0, m.rho_critical);
    if (r1 >= -tol && r1 <= m.rho_critical + tol)
      rho = r1;
    else if (r2 >= -tol && r2 <= m.rho_critical + tol)
      rho = r2;
    else
      throw Error("link_flow_from_speed: no root in the sub-critical range");
  }
  rho = std::max(rho, 0.0);
  return flow_rate(rho, s.normalized_speed * s.free_flow_mps, s.lanes);
}

ODFlowSolution calibrate_od_flows(const ODFlowProblem& p) {
  const int K = static_cast<int>(p.prior_flow.size());
  if (static_cast<int>(p.dist_route_links.size()) != K ||
      static_cast<int>(p.time_route_links.size()) != K)
    throw Error("calibrate_od_flows: route list size mismatch");
  if (static_cast<int>(p.target_link_flow.size()) != p.n_links)
    throw Error("calibrate_od_flows: target size mismatch");
  double prior_total = 0;
  for (double q : p.prior_flow) prior_total += q;
  if (prior_total <= 0) throw InfeasibleProgram("calibrate_od_flows: prior total must be > 0");

  // variables: [q^{0,d}, q^{0,t}, q^{1,d}, ...]
  const int n = 2 * K;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p.n_links, n);  // q_l = A x  (Eq 15)
  for (int k = 0; k < K; ++k) {
    for (int l : p.dist_route_links[k]) A(l, 2 * k) += 1.0;
    for (int l : p.time_route_links[k]) A(l, 2 * k + 1) += 1.0;
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(K, n);  // q^k = B x  (Eq 16)
  for (int k = 0; k < K; ++k) {
    B(k, 2 * k) = 1.0;
    B(k, 2 * k + 1) = 1.0;
  }
  Eigen::VectorXd qhat(p.n_links), prior(K);
  for (int l = 0; l < p.n_links; ++l) qhat(l) = p.target_link_flow[l];
  for (int k = 0; k < K; ++k) prior(k) = p.prior_flow[k];

  SimplexQP qp;
  qp.Q = 2.0 * (A.transpose() * A + p.regularization * B.transpose() * B);
  qp.c = -2.0 * (A.transpose() * qhat + p.regularization * B.transpose() * prior);
  qp.groups.resize(1);
  for (int j = 0; j < n; ++j) qp.groups[0].push_back(j);  // Eq (18)
  qp.group_sums = {prior_total};

  QPResult r = solve_simplex_qp(qp);

  ODFlowSolution sol;
  sol.flow_dist.resize(K);
  sol.flow_time.resize(K);
  for (int k = 0; k < K; ++k) {
    sol.flow_dist[k] = r.x(2 * k);
    sol.flow_time[k] = r.x(2 * k + 1);
  }
  sol.objective = r.objective + qhat.squaredNorm() + p.regularization * prior.squaredNorm();
  sol.kkt_residual = r.kkt_residual;
  return sol;
}

double estimate_realtime_ratio(const std::vector<double>& candidates,
                               const std::function<std::vector<double>(double)>& simulate,
                               const std::vector<double>& measured_speeds) {
  if (candidates.empty()) throw Error("estimate_realtime_ratio: no candidates");
  std::vector<double> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  double best_ratio = sorted.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double ratio : sorted) {
    std::vector<double> sim = simulate(ratio);
    if (sim.size() != measured_speeds.size())
      throw Error("estimate_realtime_ratio: simulator output size mismatch");
    double err = 0;
    for (size_t l = 0; l < sim.size(); ++l) {
      double d = sim[l] - measured_speeds[l];
      err += d * d;
    }
    if (err < best_err - 1e-15) {
      best_err = err;
      best_ratio = ratio;
    }
  }
  return best_ratio;
}

}  // namespace ecomod
