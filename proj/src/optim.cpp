#include "ecomod/optim.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace ecomod {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;
}  // namespace

// --- 0-1 branch and bound ---

namespace {

struct BnbContext {
  const ZeroOneProgram* p;
  int n;
  // packing groups: ≤-rows with 0/1 coefficients and disjoint supports
  std::vector<std::vector<int>> group_vars;  // group -> variable indices
  std::vector<double> group_rhs;
  std::vector<int> group_of;  // variable -> group or -1
  // remaining packing rows, priced with Lagrangian multipliers at the root
  std::vector<std::vector<int>> row2_vars;
  std::vector<double> row2_rhs;
  std::vector<double> lambda;          // per row2, >= 0
  std::vector<double> reduced;         // c_j + sum of lambdas of rows containing j
};

bool is_packing_row(const Eigen::MatrixXd& a, int r, double rhs) {
  if (rhs < 0 || std::floor(rhs) != rhs) return false;
  for (int j = 0; j < a.cols(); ++j) {
    double v = a(r, j);
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

// Maximize the Lagrangian dual g(lambda) = -sum_r lambda_r
// + sum_j min(0, c_j + sum_{r∋j} lambda_r) over lambda >= 0. This equals the
// dual of the linear relaxation, so g is the LP lower bound. Coordinate
// ascent: for one row, g is piecewise linear concave in lambda_r with slope
// -1 + #(negative reduced costs in the row), so the exact coordinate optimum
// is the second-largest zero crossing, clipped at zero.
std::vector<double> price_rows(const std::vector<std::vector<int>>& row_vars,
                               const std::vector<std::vector<int>>& var_rows,
                               const Eigen::VectorXd& cost, const std::vector<char>& active) {
  (void)var_rows;
  const int m = static_cast<int>(row_vars.size());
  const int n = static_cast<int>(cost.size());
  std::vector<double> lambda(m, 0.0), reduced(n);
  if (m == 0) return lambda;
  for (int j = 0; j < n; ++j) reduced[j] = cost(j);
  for (int pass = 0; pass < 50; ++pass) {
    double moved = 0;
    for (int r = 0; r < m; ++r) {
      double top1 = -kInf, top2 = -kInf;  // largest zero crossings in the row
      for (int j : row_vars[r]) {
        if (!active[j]) continue;
        double crossing = lambda[r] - reduced[j];
        if (crossing > top1) {
          top2 = top1;
          top1 = crossing;
        } else if (crossing > top2) {
          top2 = crossing;
        }
      }
      double nl = std::max(0.0, std::min(top1, std::max(top2, 0.0)));
      if (!std::isfinite(nl)) nl = 0.0;
      double d = nl - lambda[r];
      if (d != 0.0) {
        for (int j : row_vars[r])
          if (active[j]) reduced[j] += d;
        lambda[r] = nl;
        moved += std::abs(d);
      }
    }
    if (moved < 1e-12) break;
  }
  return lambda;
}

// Valid lower bound for the subproblem where variables [0, fixed) are set.
// The Lagrangian relaxation dualizes the non-grouped packing rows with the
// root multipliers; free variables contribute their negative reduced costs,
// limited per disjoint packing group.
double lower_bound(const BnbContext& ctx, const Eigen::VectorXi& x, int fixed) {
  const auto& c = ctx.p->cost;
  double lb = 0.0;
  for (int j = 0; j < fixed; ++j)
    if (x(j)) lb += c(j);

  // -sum lambda_r * (rhs_r - used_r): the dual payment for remaining capacity
  for (size_t r = 0; r < ctx.row2_vars.size(); ++r) {
    if (ctx.lambda[r] == 0.0) continue;
    double used = 0;
    for (int j : ctx.row2_vars[r])
      if (j < fixed && x(j)) used += 1;
    lb -= ctx.lambda[r] * std::max(0.0, ctx.row2_rhs[r] - used);
  }

  for (size_t g = 0; g < ctx.group_vars.size(); ++g) {
    int used = 0;
    for (int j : ctx.group_vars[g])
      if (j < fixed && x(j)) ++used;
    int budget = static_cast<int>(ctx.group_rhs[g]) - used;
    if (budget <= 0) continue;
    std::vector<double> negs;
    for (int j : ctx.group_vars[g])
      if (j >= fixed && ctx.reduced[j] < 0) negs.push_back(ctx.reduced[j]);
    if (static_cast<int>(negs.size()) > budget) {
      std::nth_element(negs.begin(), negs.begin() + budget, negs.end());
      negs.resize(budget);
    }
    for (double v : negs) lb += v;
  }
  for (int j = fixed; j < ctx.n; ++j)
    if (ctx.group_of[j] < 0 && ctx.reduced[j] < 0) lb += ctx.reduced[j];
  return lb;
}

// Can the constraints still be met given the fixed prefix?
bool still_feasible(const BnbContext& ctx, const Eigen::VectorXi& x, int fixed) {
  const auto& p = *ctx.p;
  for (int r = 0; r < p.a_le.rows(); ++r) {
    double lo = 0;
    for (int j = 0; j < ctx.n; ++j) {
      double a = p.a_le(r, j);
      if (j < fixed)
        lo += a * x(j);
      else if (a < 0)
        lo += a;
    }
    if (lo > p.b_le(r) + kFeasTol) return false;
  }
  for (int r = 0; r < p.a_eq.rows(); ++r) {
    double lo = 0, hi = 0;
    for (int j = 0; j < ctx.n; ++j) {
      double a = p.a_eq(r, j);
      if (j < fixed) {
        lo += a * x(j);
        hi += a * x(j);
      } else {
        lo += std::min(a, 0.0);
        hi += std::max(a, 0.0);
      }
    }
    if (lo > p.b_eq(r) + kFeasTol || hi < p.b_eq(r) - kFeasTol) return false;
  }
  return true;
}

bool fully_feasible(const ZeroOneProgram& p, const Eigen::VectorXi& x) {
  Eigen::VectorXd xd = x.cast<double>();
  if (p.a_le.rows() > 0 && ((p.a_le * xd - p.b_le).array() > kFeasTol).any()) return false;
  if (p.a_eq.rows() > 0 && ((p.a_eq * xd - p.b_eq).array().abs() > kFeasTol).any()) return false;
  return true;
}

struct BnbNode {
  double bound;
  long long id;
  int fixed;
  Eigen::VectorXi x;
  bool operator>(const BnbNode& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

}  // namespace

namespace {

// Solve in the given column order; callers permute so that promising
// variables are fixed first.
ZeroOneSolution solve_01_core(const ZeroOneProgram& p) {
  const int n = static_cast<int>(p.cost.size());
  BnbContext ctx;
  ctx.p = &p;
  ctx.n = n;
  ctx.group_of.assign(n, -1);
  for (int r = 0; r < p.a_le.rows(); ++r) {
    if (!is_packing_row(p.a_le, r, p.b_le(r))) continue;
    bool disjoint = true;
    for (int j = 0; j < n && disjoint; ++j)
      if (p.a_le(r, j) == 1.0 && ctx.group_of[j] >= 0) disjoint = false;
    std::vector<int> vars;
    for (int j = 0; j < n; ++j)
      if (p.a_le(r, j) == 1.0) vars.push_back(j);
    if (vars.empty()) continue;
    if (disjoint) {
      for (int j : vars) ctx.group_of[j] = static_cast<int>(ctx.group_vars.size());
      ctx.group_vars.push_back(std::move(vars));
      ctx.group_rhs.push_back(p.b_le(r));
    } else {
      ctx.row2_vars.push_back(std::move(vars));
      ctx.row2_rhs.push_back(p.b_le(r));
    }
  }

  // Root multipliers for the dualized rows
  {
    std::vector<std::vector<int>> var_rows(n);
    for (size_t r = 0; r < ctx.row2_vars.size(); ++r)
      for (int j : ctx.row2_vars[r]) var_rows[j].push_back(static_cast<int>(r));
    std::vector<char> active(n, 1);
    ctx.lambda = price_rows(ctx.row2_vars, var_rows, p.cost, active);
    ctx.reduced.assign(p.cost.data(), p.cost.data() + n);
    for (int j = 0; j < n; ++j)
      for (int r : var_rows[j]) ctx.reduced[j] += ctx.lambda[r];
  }

  ZeroOneSolution best;
  best.objective = kInf;
  Eigen::VectorXi zero = Eigen::VectorXi::Zero(n);
  if (fully_feasible(p, zero)) {
    best.x = zero;
    best.objective = 0.0;
  }

  // Greedy incumbent (valid when every <=-row has nonnegative coefficients
  // and there are no equality rows): add variables in cost order while the
  // row activities stay within budget.
  if (p.a_eq.rows() == 0 && (p.a_le.size() == 0 || (p.a_le.array() >= 0.0).all())) {
    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return p.cost(a) < p.cost(b); });
    Eigen::VectorXd act = Eigen::VectorXd::Zero(p.a_le.rows());
    Eigen::VectorXi xg = Eigen::VectorXi::Zero(n);
    double obj = 0;
    for (int j : order) {
      if (p.cost(j) >= 0) break;
      bool ok = true;
      for (int r = 0; r < p.a_le.rows() && ok; ++r)
        if (act(r) + p.a_le(r, j) > p.b_le(r) + kFeasTol) ok = false;
      if (!ok) continue;
      xg(j) = 1;
      obj += p.cost(j);
      act += p.a_le.col(j);
    }
    // A negative right-hand side can leave even the empty selection
    // infeasible; re-check before accepting the incumbent.
    if (obj < best.objective && fully_feasible(p, xg)) {
      best.objective = obj;
      best.x = xg;
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, std::greater<>> open;
  long long next_id = 0, explored = 0;
  open.push({lower_bound(ctx, zero, 0), next_id++, 0, zero});
  while (!open.empty()) {
    BnbNode node = open.top();
    open.pop();
    ++explored;
    if (explored % 1000000 == 0 && getenv("ECOMOD_ILP_STATS"))
      fprintf(stderr, "  bnb explored=%lldM open=%zu bound=%.3f best=%.3f\n",
              explored / 1000000, open.size(), node.bound, best.objective);
    if (node.bound >= best.objective - 1e-12) continue;
    if (node.fixed == n) {
      if (fully_feasible(p, node.x)) {
        double obj = p.cost.dot(node.x.cast<double>());
        if (obj < best.objective - 1e-12) {
          best.objective = obj;
          best.x = node.x;
        }
      }
      continue;
    }
    for (int val : {0, 1}) {
      BnbNode child = node;
      child.x(child.fixed) = val;
      ++child.fixed;
      child.id = next_id++;
      if (!still_feasible(ctx, child.x, child.fixed)) continue;
      child.bound = lower_bound(ctx, child.x, child.fixed);
      if (child.bound < best.objective - 1e-12) open.push(std::move(child));
    }
  }
  best.nodes_explored = explored;
  if (!std::isfinite(best.objective))
    throw InfeasibleProgram("solve_01_ilp: no feasible 0-1 point");
  return best;
}

// Linear relaxation of a packing program, solved with a dense revised primal
// simplex. Columns are the active variables plus one slack per row; the
// all-slack basis is feasible since every right-hand side is one. The result
// is an exact lower bound; `ok` is false if the iteration cap was reached.
struct PackingLp {
  double value = -kInf;
  Eigen::VectorXd x;  // per original variable; zero when inactive
  bool ok = false;
};

PackingLp packing_lp(const Eigen::VectorXd& cost,
                     const std::vector<std::vector<int>>& var_rows,
                     const std::vector<char>& avail, int m) {
  const int n = static_cast<int>(cost.size());
  PackingLp res;
  res.x = Eigen::VectorXd::Zero(n);
  double base = 0;  // row-free columns sit at their upper bound
  std::vector<int> cols;  // structural columns
  for (int j = 0; j < n; ++j) {
    if (!avail[j]) continue;
    if (var_rows[j].empty()) {
      base += cost(j);
      res.x(j) = 1;
    } else {
      cols.push_back(j);
    }
  }
  const int nc = static_cast<int>(cols.size());
  if (nc == 0) {
    res.value = base;
    res.ok = true;
    return res;
  }

  // column k < nc: variable cols[k]; column nc + r: slack of row r
  Eigen::MatrixXd binv = Eigen::MatrixXd::Identity(m, m);
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) basis[r] = nc + r;
  Eigen::VectorXd xb = Eigen::VectorXd::Ones(m);
  auto col_cost = [&](int k) { return k < nc ? cost(cols[k]) : 0.0; };
  auto col_dot = [&](int k, const Eigen::VectorXd& y) {
    if (k >= nc) return y(k - nc);
    double s = 0;
    for (int r : var_rows[cols[k]]) s += y(r);
    return s;
  };
  auto col_vec = [&](int k) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    if (k >= nc)
      a(k - nc) = 1;
    else
      for (int r : var_rows[cols[k]]) a(r) = 1;
    return a;
  };

  const int cap = 20 * (m + nc) + 2000;
  int stall = 0;
  double last_obj = 0;
  for (int it = 0; it < cap; ++it) {
    Eigen::VectorXd y(m);
    for (int r = 0; r < m; ++r) {
      double s = 0;
      for (int q = 0; q < m; ++q) s += col_cost(basis[q]) * binv(q, r);
      y(r) = s;
    }
    // entering column: most negative reduced cost, Bland's rule when stalled
    const bool bland = stall > 2 * m + 50;
    int enter = -1;
    double best_red = -1e-9;
    for (int k = 0; k < nc + m; ++k) {
      double red = col_cost(k) - col_dot(k, y);
      if (red < best_red - 1e-15) {
        enter = k;
        best_red = red;
        if (bland) break;
      }
    }
    if (enter < 0) {
      double obj = 0;
      for (int r = 0; r < m; ++r) obj += col_cost(basis[r]) * xb(r);
      res.value = base + obj - 1e-7 * (1.0 + std::abs(obj));
      for (int r = 0; r < m; ++r)
        if (basis[r] < nc) res.x(cols[basis[r]]) = std::max(0.0, xb(r));
      res.ok = true;
      return res;
    }
    Eigen::VectorXd w = binv * col_vec(enter);
    int leave = -1;
    double ratio = kInf;
    for (int r = 0; r < m; ++r) {
      if (w(r) <= 1e-9) continue;
      double t = xb(r) / w(r);
      if (t < ratio - 1e-12 || (t < ratio + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
        ratio = t;
        leave = r;
      }
    }
    if (leave < 0) return res;  // numerically unbounded: give up
    double piv = w(leave);
    binv.row(leave) /= piv;
    xb(leave) /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      double f = w(r);
      if (f != 0.0) {
        binv.row(r) -= f * binv.row(leave);
        xb(r) = std::max(0.0, xb(r) - f * xb(leave));
      }
    }
    basis[leave] = enter;
    double obj = 0;
    for (int r = 0; r < m; ++r) obj += col_cost(basis[r]) * xb(r);
    if (obj < last_obj - 1e-9) {
      stall = 0;
      last_obj = obj;
    } else {
      ++stall;
    }
  }
  return res;  // cap reached
}

// Lagrangian lower bound on the optimum of a pure packing program.
double packing_lb(const ZeroOneProgram& p) {
  const int n = static_cast<int>(p.cost.size());
  const int m = static_cast<int>(p.a_le.rows());
  std::vector<std::vector<int>> row_vars(m), var_rows(n);
  std::vector<char> active(n, 0);
  for (int j = 0; j < n; ++j) active[j] = p.cost(j) < 0;
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < n; ++j)
      if (p.a_le(r, j) == 1.0) {
        row_vars[r].push_back(j);
        var_rows[j].push_back(r);
      }
  PackingLp lp = packing_lp(p.cost, var_rows, active, m);
  if (lp.ok) return lp.value;
  // simplex cap reached: fall back to the Lagrangian dual value
  std::vector<double> lambda = price_rows(row_vars, var_rows, p.cost, active);
  double g = 0;
  for (int r = 0; r < m; ++r) g -= lambda[r];
  for (int j = 0; j < n; ++j) {
    if (!active[j]) continue;
    double red = p.cost(j);
    for (int r : var_rows[j]) red += lambda[r];
    g += std::min(0.0, red);
  }
  return g;
}

// Dedicated exact search for pure set packing (every row 0/1 with rhs 1, no
// equalities). The solver peels independent components, runs a subset DP over
// the conflict rows when that fits, and otherwise branches on a conflict row;
// `ub` prunes subtrees that provably cannot beat the caller's incumbent.
ZeroOneSolution solve_packing_b(const ZeroOneProgram& p, double ub);

ZeroOneSolution solve_packing(const ZeroOneProgram& p) {
  return solve_packing_b(p, kInf);
}

ZeroOneSolution solve_packing_b(const ZeroOneProgram& p, double ub) {
  const int n = static_cast<int>(p.cost.size());
  const int m = static_cast<int>(p.a_le.rows());
  std::vector<std::vector<int>> row_vars(m), var_rows(n);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < n; ++j)
      if (p.a_le(r, j) == 1.0) {
        row_vars[r].push_back(j);
        var_rows[j].push_back(r);
      }

  // Variables with nonnegative cost never improve a packing solution.
  // Row-free negative variables are always selected.
  std::vector<char> avail(n, 0);
  Eigen::VectorXi base = Eigen::VectorXi::Zero(n);
  double base_cost = 0;
  for (int j = 0; j < n; ++j) {
    if (p.cost(j) >= 0) continue;
    if (var_rows[j].empty()) {
      base(j) = 1;
      base_cost += p.cost(j);
    } else {
      avail[j] = 1;
    }
  }

  // Independent components (variables connected through shared rows) solve
  // separately; locality keeps them small.
  {
    std::vector<int> parent(n);
    for (int j = 0; j < n; ++j) parent[j] = j;
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (int r = 0; r < m; ++r) {
      int first = -1;
      for (int j : row_vars[r]) {
        if (!avail[j]) continue;
        if (first < 0)
          first = j;
        else
          parent[find(j)] = find(first);
      }
    }
    std::map<int, std::vector<int>> comps;
    for (int j = 0; j < n; ++j)
      if (avail[j]) comps[find(j)].push_back(j);
    if (comps.size() > 1) {
      std::vector<ZeroOneProgram> subs;
      std::vector<std::vector<int>> sub_vars;
      for (const auto& [root, vars] : comps) {
        std::vector<int> rows;
        for (int r = 0; r < m; ++r) {
          bool hit = false;
          for (int j : row_vars[r])
            if (avail[j] && find(j) == root) {
              hit = true;
              break;
            }
          if (hit) rows.push_back(r);
        }
        ZeroOneProgram sub;
        sub.cost.resize(vars.size());
        sub.a_le.setZero(rows.size(), vars.size());
        sub.b_le = Eigen::VectorXd::Ones(rows.size());
        for (size_t k = 0; k < vars.size(); ++k) {
          sub.cost(k) = p.cost(vars[k]);
          for (size_t q = 0; q < rows.size(); ++q)
            sub.a_le(q, k) = p.a_le(rows[q], vars[k]);
        }
        subs.push_back(std::move(sub));
        sub_vars.push_back(vars);
      }
      // Solve components independently; each gets the slack the others'
      // lower bounds leave under the caller's incumbent.
      std::vector<double> est(subs.size());
      if (std::isfinite(ub))
        for (size_t i = 0; i < subs.size(); ++i) est[i] = packing_lb(subs[i]);
      ZeroOneSolution out;
      out.x = base;
      out.objective = base_cost;
      for (size_t i = 0; i < subs.size(); ++i) {
        double sub_ub = kInf;
        if (std::isfinite(ub)) {
          double others = base_cost;
          for (size_t k = 0; k < subs.size(); ++k)
            if (k != i) others += est[k];
          sub_ub = ub - others;
        }
        ZeroOneSolution s = solve_packing_b(subs[i], sub_ub);
        if (std::isfinite(ub)) est[i] = std::min(s.objective, ub);
        out.objective += s.objective;
        out.nodes_explored += s.nodes_explored;
        for (size_t k = 0; k < sub_vars[i].size(); ++k) out.x(sub_vars[i][k]) = s.x(k);
      }
      return out;
    }
  }

  // Disjoint row family. Family rows become "units" that take at most one
  // variable each; every other row with two or more live variables becomes a
  // conflict-mask bit, so the family should leave as few rows out as
  // possible. Several greedy orders are tried.
  auto family_for = [&](const std::vector<int>& order) {
    std::vector<char> fam(m, 0), cov(n, 0);
    for (int r : order) {
      bool ok = true;
      for (int j : row_vars[r])
        if (cov[j]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      fam[r] = 1;
      for (int j : row_vars[r]) cov[j] = 1;
    }
    return std::make_pair(fam, cov);
  };
  // A non-family row is implied when all its live variables sit inside one
  // family row: that family row already admits at most one of them.
  auto needs_bit = [&](const std::vector<char>& fam, int r) {
    int live = 0, fam_row = -2;
    for (int j : row_vars[r]) {
      if (!avail[j]) continue;
      ++live;
      int f = -1;
      for (int q : var_rows[j])
        if (fam[q]) {
          f = q;
          break;
        }
      if (fam_row == -2)
        fam_row = f;
      else if (fam_row != f)
        fam_row = -3;
    }
    return live >= 2 && (fam_row == -3 || fam_row == -1);
  };
  auto mask_count = [&](const std::vector<char>& fam) {
    int cnt = 0;
    for (int r = 0; r < m; ++r)
      if (!fam[r] && needs_bit(fam, r)) ++cnt;
    return cnt;
  };
  std::vector<int> order(m);
  for (int r = 0; r < m; ++r) order[r] = r;
  auto [in_family, covered] = family_for(order);
  int best_masks = mask_count(in_family);
  for (bool asc : {true, false}) {
    std::vector<int> o = order;
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) {
      return asc ? row_vars[a].size() < row_vars[b].size()
                 : row_vars[a].size() > row_vars[b].size();
    });
    auto [fam, cov] = family_for(o);
    int cnt = mask_count(fam);
    if (cnt < best_masks) {
      best_masks = cnt;
      in_family = fam;
      covered = cov;
    }
  }
  std::vector<int> mask_rows;  // rows that need a conflict bit
  for (int r = 0; r < m; ++r)
    if (!in_family[r] && needs_bit(in_family, r)) mask_rows.push_back(r);

  std::vector<std::vector<int>> units;
  for (int r = 0; r < m; ++r) {
    if (!in_family[r]) continue;
    std::vector<int> u;
    for (int j : row_vars[r])
      if (avail[j]) u.push_back(j);
    if (!u.empty()) units.push_back(std::move(u));
  }
  for (int j = 0; j < n; ++j)
    if (avail[j] && !covered[j]) units.push_back({j});

  int n_cands = 0;
  for (int j = 0; j < n; ++j)
    if (avail[j]) ++n_cands;
  const double n_states = std::pow(2.0, static_cast<double>(mask_rows.size()));
  size_t max_unit = 0;
  for (const auto& u : units) max_unit = std::max(max_unit, u.size());
  bool dp_fits = mask_rows.size() <= 23 && max_unit < 65535 &&
                 static_cast<double>(units.size()) * n_states <= 6.0e7 &&
                 static_cast<double>(n_cands) * n_states <= 2.0e9;
  if (getenv("ECOMOD_ILP_STATS"))
    fprintf(stderr, "  node n=%d m=%d mask=%zu units=%zu cands=%d %s\n", n, m,
            mask_rows.size(), units.size(), n_cands, dp_fits ? "DP" : "BRANCH");
  if (dp_fits) {
    // Exact DP over subsets of the conflict rows. Units are processed once,
    // so the at-most-one constraint of family rows holds by construction.
    // Values roll over two layers; a per-layer choice table (index of the
    // taken candidate plus one, zero for "skip") handles backtracking.
    std::vector<uint32_t> vmask(n, 0);
    for (size_t b = 0; b < mask_rows.size(); ++b)
      for (int j : row_vars[mask_rows[b]])
        if (avail[j]) vmask[j] |= 1u << b;

    const size_t S = 1ull << mask_rows.size();
    std::vector<double> cur_f(S, kInf), next_f(S);
    std::vector<std::vector<uint16_t>> choice(units.size(),
                                              std::vector<uint16_t>(S, 0));
    cur_f[0] = 0.0;
    for (size_t u = 0; u < units.size(); ++u) {
      next_f = cur_f;
      for (size_t s = 0; s < S; ++s) {
        double fs = cur_f[s];
        if (!std::isfinite(fs)) continue;
        for (size_t k = 0; k < units[u].size(); ++k) {
          int j = units[u][k];
          if (vmask[j] & s) continue;
          size_t t = s | vmask[j];
          if (fs + p.cost(j) < next_f[t]) {
            next_f[t] = fs + p.cost(j);
            choice[u][t] = static_cast<uint16_t>(k + 1);
          }
        }
      }
      cur_f.swap(next_f);
    }
    size_t best_s = 0;
    for (size_t s = 1; s < S; ++s)
      if (cur_f[s] < cur_f[best_s]) best_s = s;

    ZeroOneSolution out;
    out.x = base;
    out.objective = base_cost + cur_f[best_s];
    out.nodes_explored = static_cast<long long>(units.size() * S);
    size_t s = best_s;
    for (size_t u = units.size(); u > 0; --u) {
      uint16_t k = choice[u - 1][s];
      if (k == 0) continue;
      int j = units[u - 1][k - 1];
      out.x(j) = 1;
      s &= ~static_cast<size_t>(vmask[j]);
    }
    return out;
  }

  // Too many interacting rows for the subset DP: branch and bound on the
  // linear relaxation.
  PackingLp lp = packing_lp(p.cost, var_rows, avail, m);
  if (getenv("ECOMOD_ILP_STATS"))
    fprintf(stderr, "  lp n=%d m=%d ok=%d lb=%.3f ub=%.3f\n", n, m, lp.ok,
            base_cost + lp.value, ub);
  if (lp.ok && base_cost + lp.value >= ub - 1e-12) {
    ZeroOneSolution pruned;
    pruned.x = base;
    pruned.objective = kInf;
    pruned.nodes_explored = 1;
    return pruned;
  }
  if (lp.ok) {
    bool integral = true;
    for (int j = 0; j < n && integral; ++j)
      if (avail[j]) integral = lp.x(j) < 1e-6 || lp.x(j) > 1.0 - 1e-6;
    if (integral) {
      ZeroOneSolution out;
      out.x = base;
      out.objective = base_cost;
      out.nodes_explored = 1;
      for (int j = 0; j < n; ++j)
        if (avail[j] && lp.x(j) > 0.5) {
          out.x(j) = 1;
          out.objective += p.cost(j);
        }
      return out;
    }
  }

  long long nodes = 1;
  auto sub_solve = [&](const std::vector<char>& keep, double add, int taken,
                       double cap) {
    std::vector<int> vars;
    for (int j = 0; j < n; ++j)
      if (keep[j]) vars.push_back(j);
    ZeroOneSolution out;
    out.x = base;
    if (taken >= 0) out.x(taken) = 1;
    out.objective = base_cost + add;
    if (vars.empty()) return out;
    std::vector<int> rows;
    for (int r = 0; r < m; ++r) {
      bool hit = false;
      for (int j : row_vars[r])
        if (keep[j]) {
          hit = true;
          break;
        }
      if (hit) rows.push_back(r);
    }
    ZeroOneProgram sub;
    sub.cost.resize(vars.size());
    sub.a_le.setZero(rows.size(), vars.size());
    sub.b_le = Eigen::VectorXd::Ones(rows.size());
    for (size_t k = 0; k < vars.size(); ++k) {
      sub.cost(k) = p.cost(vars[k]);
      for (size_t q = 0; q < rows.size(); ++q)
        sub.a_le(q, k) = p.a_le(rows[q], vars[k]);
    }
    ZeroOneSolution s = solve_packing_b(sub, cap - base_cost - add);
    out.objective += s.objective;
    nodes += s.nodes_explored;
    for (size_t k = 0; k < vars.size(); ++k)
      if (s.x(k)) out.x(vars[k]) = 1;
    return out;
  };

  // Greedy incumbent (cheapest feasible variable first) so the dual bound
  // can prune branches immediately.
  ZeroOneSolution best;
  best.x = base;
  best.objective = ub;
  bool have = false;
  {
    std::vector<int> ord;
    for (int j = 0; j < n; ++j)
      if (avail[j]) ord.push_back(j);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      return p.cost(a) != p.cost(b) ? p.cost(a) < p.cost(b) : a < b;
    });
    std::vector<char> used(m, 0);
    Eigen::VectorXi xg = base;
    double og = base_cost;
    for (int j : ord) {
      bool ok = true;
      for (int r : var_rows[j])
        if (used[r]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      xg(j) = 1;
      og += p.cost(j);
      for (int r : var_rows[j]) used[r] = 1;
    }
    if (og < best.objective - 1e-12) {
      best.x = xg;
      best.objective = og;
      have = true;
    }
  }

  // Most fractional variable, ties by index; without an LP point, the most
  // negative cost. The branch agreeing with the LP value runs first.
  int br = -1;
  double frac = 2.0;
  if (lp.ok) {
    for (int j = 0; j < n; ++j) {
      if (!avail[j]) continue;
      double d = std::abs(lp.x(j) - 0.5);
      if (d < frac - 1e-12) {
        frac = d;
        br = j;
      }
    }
  } else {
    for (int j = 0; j < n; ++j)
      if (avail[j] && (br < 0 || p.cost(j) < p.cost(br))) br = j;
  }
  if (br < 0) throw Error("solve_packing: no variable to branch on");

  auto take_branch = [&]() {
    std::vector<char> keep = avail;
    for (int r : var_rows[br])
      for (int k : row_vars[r]) keep[k] = 0;
    ZeroOneSolution cand = sub_solve(keep, p.cost(br), br, best.objective);
    if (cand.objective < best.objective - 1e-12) {
      best = cand;
      have = true;
    }
  };
  auto skip_branch = [&]() {
    std::vector<char> keep = avail;
    keep[br] = 0;
    ZeroOneSolution cand = sub_solve(keep, 0.0, -1, best.objective);
    if (cand.objective < best.objective - 1e-12) {
      best = cand;
      have = true;
    }
  };
  if (!lp.ok || lp.x(br) >= 0.5) {
    take_branch();
    skip_branch();
  } else {
    skip_branch();
    take_branch();
  }
  if (!have) best.objective = kInf;
  best.nodes_explored = nodes;
  return best;
}

}  // namespace

ZeroOneSolution solve_01_ilp(const ZeroOneProgram& p) {
  const int n = static_cast<int>(p.cost.size());
  if (const char* dump = getenv("ECOMOD_ILP_DUMP")) {
    FILE* f = fopen(dump, "w");
    if (f) {
      fprintf(f, "%d %d %d\n", n, (int)p.a_le.rows(), (int)p.a_eq.rows());
      for (int j = 0; j < n; ++j) fprintf(f, "%.17g\n", p.cost(j));
      for (int r = 0; r < p.a_le.rows(); ++r) {
        fprintf(f, "%.17g", p.b_le(r));
        for (int j = 0; j < n; ++j)
          if (p.a_le(r, j) != 0) fprintf(f, " %d %.17g", j, p.a_le(r, j));
        fprintf(f, "\n");
      }
      fclose(f);
    }
  }
  bool packing = p.a_eq.rows() == 0;
  for (int r = 0; packing && r < p.a_le.rows(); ++r)
    packing = is_packing_row(p.a_le, r, p.b_le(r)) && p.b_le(r) == 1.0;
  if (packing) return solve_packing(p);
  // Fix cheap variables first: permute columns by ascending cost so the
  // search commits to promising decisions near the root.
  std::vector<int> perm(n);
  for (int j = 0; j < n; ++j) perm[j] = j;
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return p.cost(a) < p.cost(b); });

  ZeroOneProgram q;
  q.cost.resize(n);
  q.a_le.resize(p.a_le.rows(), n);
  q.a_eq.resize(p.a_eq.rows(), n);
  q.b_le = p.b_le;
  q.b_eq = p.b_eq;
  for (int j = 0; j < n; ++j) {
    q.cost(j) = p.cost(perm[j]);
    if (p.a_le.rows() > 0) q.a_le.col(j) = p.a_le.col(perm[j]);
    if (p.a_eq.rows() > 0) q.a_eq.col(j) = p.a_eq.col(perm[j]);
  }
  ZeroOneSolution sol = solve_01_core(q);
  Eigen::VectorXi x(n);
  for (int j = 0; j < n; ++j) x(perm[j]) = sol.x(j);
  sol.x = x;
  return sol;
}

// --- simplex-constrained QP ---

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s) {
  const int n = static_cast<int>(v.size());
  if (s < 0) throw InfeasibleProgram("project_simplex: negative sum");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0, theta = 0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    double t = (css - s) / (i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      theta = t;
    }
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = std::max(0.0, v(i) - theta);
  (void)rho;
  return out;
}

namespace {

Eigen::VectorXd project_feasible(const SimplexQP& p, const Eigen::VectorXd& v,
                                 const std::vector<int>& ungrouped) {
  Eigen::VectorXd x = v;
  for (size_t g = 0; g < p.groups.size(); ++g) {
    const auto& idx = p.groups[g];
    Eigen::VectorXd sub(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) sub(i) = v(idx[i]);
    Eigen::VectorXd proj = project_simplex(sub, p.group_sums[g]);
    for (size_t i = 0; i < idx.size(); ++i) x(idx[i]) = proj(i);
  }
  for (int j : ungrouped) x(j) = std::max(0.0, v(j));
  return x;
}

}  // namespace

QPResult solve_simplex_qp(const SimplexQP& p, double tol, int max_iter) {
  const int n = static_cast<int>(p.c.size());
  if (p.Q.rows() != n || p.Q.cols() != n) throw Error("solve_simplex_qp: dimension mismatch");
  if (p.groups.size() != p.group_sums.size())
    throw Error("solve_simplex_qp: group/sum mismatch");
  for (double s : p.group_sums)
    if (s < 0) throw InfeasibleProgram("solve_simplex_qp: negative group sum");

  std::vector<char> covered(n, 0);
  for (const auto& g : p.groups)
    for (int j : g) covered[j] = 1;
  std::vector<int> ungrouped;
  for (int j = 0; j < n; ++j)
    if (!covered[j]) ungrouped.push_back(j);

  Eigen::VectorXd x = project_feasible(p, Eigen::VectorXd::Zero(n), ungrouped);

  // Step from the largest eigenvalue; cheap for the sizes we solve.
  double lmax = 0.0;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.Q, Eigen::EigenvaluesOnly);
    lmax = es.eigenvalues().maxCoeff();
  }

  // Work on the objective divided by max(1, lmax): same minimizer and the
  // same stationarity condition, but the projected-gradient residual is then
  // measured with an O(1) gradient, so the requested tolerance stays
  // reachable in double precision even for badly scaled problems
  // (e.g. regularization weights of 1e6).
  const double scale = std::max(1.0, lmax);
  auto grad = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return (p.Q * v + p.c) / scale;
  };
  auto fval = [&](const Eigen::VectorXd& v) {
    return (0.5 * v.dot(p.Q * v) + p.c.dot(v)) / scale;
  };
  double step = lmax > 1e-12 ? scale / lmax : 1.0;

  QPResult res;
  // Monotone accelerated projected gradient (MFISTA with restart): the
  // momentum step z comes from the extrapolated point y, but the reported
  // iterate x only ever improves, so the objective decreases monotonically.
  // Plain projected gradient needs ~condition-number iterations, which large
  // regularization weights (e.g. psi >> 1) make unaffordable.
  double f = fval(x);
  Eigen::VectorXd y = x, z = x;
  double theta = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::VectorXd g = grad(x);
    Eigen::VectorXd xk = project_feasible(p, x - g, ungrouped);
    double kkt = (x - xk).lpNorm<Eigen::Infinity>();
    if (it % 10000 == 0 && getenv("ECOMOD_QP_STATS"))
      fprintf(stderr, "  qp it=%d kkt=%.3g f=%.9g theta=%.3g\n", it, kkt, f, theta);
    if (kkt <= tol) {
      res.kkt_residual = kkt;
      break;
    }
    Eigen::VectorXd gy = grad(y);
    // Exact Lipschitz step from the top eigenvalue; halving guard only for
    // numerical safety.
    double t = step;
    Eigen::VectorXd zn;
    for (int ls = 0; ls < 60; ++ls) {
      zn = project_feasible(p, y - t * gy, ungrouped);
      double fz = fval(zn);
      double quad = fval(y) + gy.dot(zn - y) + (zn - y).squaredNorm() / (2 * t);
      if (fz <= quad + 1e-12 * (1 + std::abs(fz))) break;
      t *= 0.5;
    }
    double fz = fval(zn);
    double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Eigen::VectorXd x_prev = x;
    if (fz < f) {
      x = zn;
      f = fz;
    }
    // Restart when the momentum direction opposes progress.
    if ((y - zn).dot(zn - z) > 0) {
      theta_next = 1.0;
      y = x;
    } else {
      y = zn + (theta / theta_next) * (zn - x) + ((theta - 1.0) / theta_next) * (x - x_prev);
    }
    z = zn;
    theta = theta_next;
  }
  if (it >= max_iter) {
    Eigen::VectorXd g = grad(x);
    double kkt = (x - project_feasible(p, x - g, ungrouped)).lpNorm<Eigen::Infinity>();
    if (kkt > tol) throw NonConvergence("solve_simplex_qp: iteration cap reached");
    res.kkt_residual = kkt;
  }
  res.x = x;
  res.objective = f * scale;
  res.iterations = it;
  return res;
}

}  // namespace ecomod
