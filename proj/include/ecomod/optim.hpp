#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ecomod/errors.hpp"

namespace ecomod {

// min c'x over x in {0,1}^n s.t. A_le x <= b_le, A_eq x = b_eq.
struct ZeroOneProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd a_le;  // may have 0 rows
  Eigen::VectorXd b_le;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
};

struct ZeroOneSolution {
  Eigen::VectorXi x;
  double objective = 0.0;
  long long nodes_explored = 0;
};

// Exact 0-1 solver. Pure set-packing programs (all rows 0/1 with unit
// right-hand sides, no equalities) get a dedicated branch and bound with
// linear-relaxation lower bounds and most-fractional branching; everything
// else falls back to best-first search with Lagrangian bounds.
ZeroOneSolution solve_01_ilp(const ZeroOneProgram& p);

// min 1/2 x'Qx + c'x s.t. for each group g: sum_{i in g} x_i = sum_g, x >= 0.
// Variables not covered by a group are only constrained to x >= 0.
struct SimplexQP {
  Eigen::MatrixXd Q;  // symmetric PSD
  Eigen::VectorXd c;
  std::vector<std::vector<int>> groups;
  std::vector<double> group_sums;
};

struct QPResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double kkt_residual = 0.0;  // inf-norm of x - P(x - grad f(x))
  int iterations = 0;
};

QPResult solve_simplex_qp(const SimplexQP& p, double tol = 1e-7, int max_iter = 100000);

// Exact Euclidean projection onto {x >= 0, sum x = s} (sort based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s);

}  // namespace ecomod
