#include "ecomod/fuel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ecomod {

double edge_fuel(const FuelModel& model, double length_m, double speed_mps) {
  if (speed_mps <= 0.0) throw NonPositiveSpeed("edge_fuel: speed must be > 0");
  if (length_m < 0.0) throw Error("edge_fuel: negative length");
  return length_m * model.rate_g_per_m(speed_mps);
}

double mean_speed(const SpeedDensityModel& m, double density) {
  if (density >= m.rho_critical) return m.eps;
  double v = m.alpha2 * density * density + m.alpha1 * density + m.alpha0;
  return std::clamp(v, m.eps, 1.0);
}

double flow_rate(double density, double mean_speed_mps, int lanes) {
  return static_cast<double>(lanes) * density * mean_speed_mps;
}

namespace {

struct FitResult {
  SpeedDensityModel model;
  double sse = std::numeric_limits<double>::infinity();
  bool ok = false;
};

FitResult fit_at_breakpoint(const std::vector<std::pair<double, double>>& samples,
                            double rho_c) {
  FitResult r;
  std::vector<int> sub, super;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    (samples[i].first < rho_c ? sub : super).push_back(i);
  }
  if (sub.size() < 3 || super.empty()) return r;

  Eigen::MatrixXd A(sub.size(), 3);
  Eigen::VectorXd y(sub.size());
  for (size_t i = 0; i < sub.size(); ++i) {
    double rho = samples[sub[i]].first;
    A(i, 0) = rho * rho;
    A(i, 1) = rho;
    A(i, 2) = 1.0;
    y(i) = samples[sub[i]].second;
  }
  Eigen::Vector3d coef = A.colPivHouseholderQr().solve(y);

  double eps = 0.0;
  for (int i : super) eps += samples[i].second;
  eps /= static_cast<double>(super.size());

  r.model.alpha2 = coef(0);
  r.model.alpha1 = coef(1);
  r.model.alpha0 = coef(2);
  r.model.eps = eps;
  r.model.rho_critical = rho_c;
  r.sse = (A * coef - y).squaredNorm();
  for (int i : super) {
    double d = samples[i].second - eps;
    r.sse += d * d;
  }
  r.ok = true;
  return r;
}

}  // namespace

SpeedDensityModel fit_speed_density(const std::vector<std::pair<double, double>>& samples,
                                    double rho_critical) {
  if (samples.size() < 6) throw InsufficientData("fit_speed_density: need >= 6 samples");

  FitResult best;
  if (rho_critical > 0.0) {
    best = fit_at_breakpoint(samples, rho_critical);
    if (!best.ok) {
      throw InsufficientData(
          "fit_speed_density: need >= 3 sub-critical and >= 1 super-critical samples");
    }
  } else {
    std::vector<double> rhos;
    rhos.reserve(samples.size());
    for (auto& s : samples) rhos.push_back(s.first);
    std::sort(rhos.begin(), rhos.end());
    for (size_t i = 0; i + 1 < rhos.size(); ++i) {
      double mid = 0.5 * (rhos[i] + rhos[i + 1]);
      if (mid <= rhos[i]) continue;
      FitResult r = fit_at_breakpoint(samples, mid);
      if (r.ok && r.sse < best.sse) best = r;
    }
    if (!best.ok) {
      throw InsufficientData("fit_speed_density: no breakpoint splits the samples into both regimes");
    }
  }

  // Non-increasing on [0, rho_critical]: derivative 2*a2*rho + a1 is linear,
  // so checking the endpoints suffices.
  const auto& m = best.model;
  if (m.alpha1 > 1e-9 || 2.0 * m.alpha2 * m.rho_critical + m.alpha1 > 1e-9) {
    throw NonMonotoneFit("fit_speed_density: fitted polynomial increases with density");
  }
  return best.model;
}

}  // namespace ecomod
