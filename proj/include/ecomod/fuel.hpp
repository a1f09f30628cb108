#pragma once

#include <vector>

#include "ecomod/errors.hpp"

namespace ecomod {

// Per-meter fuel rate f(v) = a/v + b + c*v^2  [g/m], v in m/s.
// Idle term dominates at low speed, aerodynamic drag at high speed,
// giving an interior minimum near 15-20 m/s with the defaults.
struct FuelModel {
  double a = 0.3;      // g/m * (m/s) -- idle-equivalent term
  double b = 0.04;     // g/m
  double c = 2.5e-5;   // g*s^2/m^3

  double rate_g_per_m(double speed_mps) const {
    return a / speed_mps + b + c * speed_mps * speed_mps;
  }
};

double edge_fuel(const FuelModel& model, double length_m, double speed_mps);

// Eq-style fundamental diagram: normalized mean speed as a function of
// vehicle density, quadratic below critical density and constant eps above.
struct SpeedDensityModel {
  double alpha2 = 0.0;
  double alpha1 = 0.0;
  double alpha0 = 1.0;
  double eps = 0.1;             // normalized congested speed
  double rho_critical = 0.06;   // veh/m per lane
};

double mean_speed(const SpeedDensityModel& model, double density);

double flow_rate(double density, double mean_speed_mps, int lanes);

// Least-squares fit on the sub-critical samples; eps is the mean of the
// super-critical samples. If rho_critical <= 0, it is chosen by a 1-D sweep
// over candidate breakpoints minimizing total squared error.
// Fits whose polynomial is not non-increasing on [0, rho_critical] are
// rejected with NonMonotoneFit.
SpeedDensityModel fit_speed_density(const std::vector<std::pair<double, double>>& samples,
                                    double rho_critical = -1.0);

}  // namespace ecomod
