#include "ecomod/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace ecomod {

namespace {

constexpr double kTol = 1e-9;

struct Cust {
  int request_id;
  int pick_node, drop_node;
  double req_time, max_wait, max_delay;
  double baseline;  // fastest-route time pick->drop
  bool onboard_at_start;
  double fixed_deadline;  // onboard customers only
};

struct Label {
  int code;        // base-3 status per customer: 0 waiting, 1 onboard, 2 dropped
  int last;        // stop index 2i (pickup of i) / 2i+1 (drop of i), -1 = start
  double time;
  double cost;
  double fuel;
  std::vector<double> deadline;  // per customer, valid while status == 1
  int parent;                    // label arena index
  int order;                     // creation order, deterministic tie-break
};

int status_of(int code, int i) {
  for (int k = 0; k < i; ++k) code /= 3;
  return code % 3;
}

}  // namespace

TripPlan solve_tsp_dp(const SchedulerInput& in) {
  if (!in.costs) throw Error("solve_tsp_dp: missing cost matrices");
  if (static_cast<int>(in.onboard.size()) > in.capacity)
    throw CapacityExceeded("solve_tsp_dp: onboard exceeds capacity");

  const int onb = static_cast<int>(in.onboard.size());
  const int m = onb + static_cast<int>(in.customers.size());

  std::vector<Cust> cs(m);
  for (int i = 0; i < onb; ++i) {
    const auto& o = in.onboard[i];
    cs[i] = {o.request_id, -1, o.dest, 0, 0, o.max_delay_s, o.min_travel_s, true,
             o.pickup_time_s + o.min_travel_s + o.max_delay_s};
  }
  for (int i = 0; i < m - onb; ++i) {
    const auto& r = in.customers[i];
    cs[onb + i] = {r.id, r.origin, r.dest, r.request_time_s, r.max_wait_s, r.max_delay_s,
                   in.costs->time.cost(r.origin, r.dest), false, 0};
  }

  TripPlan plan;
  plan.vehicle_id = in.vehicle_id;
  plan.finish_time_s = in.start_time_s;
  if (m == 0) {
    plan.feasible = true;
    return plan;
  }

  int pow3 = 1;
  for (int i = 0; i < m; ++i) pow3 *= 3;
  const int terminal = pow3 - 1;  // all digits == 2

  auto node_of_stop = [&](int stop) {
    int i = stop / 2;
    return (stop % 2 == 0) ? cs[i].pick_node : cs[i].drop_node;
  };

  std::vector<Label> arena;
  arena.reserve(1024);
  // key encodes (code, last)
  std::unordered_map<long long, std::vector<int>> frontier;
  auto key_of = [&](int code, int last) {
    return static_cast<long long>(code) * (2 * m + 1) + (last + 1);
  };

  auto dominated = [&](const Label& a, const Label& b) {
    // a dominates b
    if (a.cost > b.cost + kTol || a.time > b.time + kTol) return false;
    for (int i = 0; i < m; ++i)
      if (status_of(a.code, i) == 1 && a.deadline[i] < b.deadline[i] - kTol) return false;
    return true;
  };

  auto insert_label = [&](Label&& l) {
    auto& bucket = frontier[key_of(l.code, l.last)];
    for (int idx : bucket)
      if (dominated(arena[idx], l)) return -1;
    bucket.erase(std::remove_if(bucket.begin(), bucket.end(),
                                [&](int idx) { return dominated(l, arena[idx]); }),
                 bucket.end());
    arena.push_back(std::move(l));
    bucket.push_back(static_cast<int>(arena.size()) - 1);
    return static_cast<int>(arena.size()) - 1;
  };

  // initial state: onboard customers carry status 1
  {
    Label init;
    init.code = 0;
    for (int i = 0; i < m; ++i)
      if (cs[i].onboard_at_start) {
        int p = 1;
        for (int k = 0; k < i; ++k) p *= 3;
        init.code += p;
      }
    init.last = -1;
    init.time = in.start_time_s;
    init.cost = 0;
    init.fuel = 0;
    init.deadline.assign(m, 0);
    for (int i = 0; i < m; ++i)
      if (cs[i].onboard_at_start) init.deadline[i] = cs[i].fixed_deadline;
    init.parent = -1;
    init.order = 0;
    insert_label(std::move(init));
  }

  // Waves by number of completed actions keep expansion acyclic.
  const int total_actions = 2 * m - onb;
  std::vector<std::vector<int>> waves(total_actions + 1);
  waves[0].push_back(0);

  int order_counter = 1;
  for (int wave = 0; wave < total_actions; ++wave) {
    // bucket labels created during previous expansions
    for (int idx : waves[wave]) {
      const Label cur = arena[idx];  // copy: arena may reallocate
      // a live label must still be expandable for every unfinished customer
      int cur_node = cur.last < 0 ? in.start_node : node_of_stop(cur.last);
      int onboard_cnt = 0;
      for (int i = 0; i < m; ++i)
        if (status_of(cur.code, i) == 1) ++onboard_cnt;

      for (int i = 0; i < m; ++i) {
        int s = status_of(cur.code, i);
        if (s == 2) continue;
        int stop = s == 0 ? 2 * i : 2 * i + 1;
        int dest = node_of_stop(stop);
        if (s == 0 && onboard_cnt >= in.capacity) continue;  // Eq (2)

        double leg_t = in.costs->leg_time(in.policy, onboard_cnt, cur_node, dest);
        double leg_f = in.costs->leg_fuel(in.policy, onboard_cnt, cur_node, dest);
        double t_arr = cur.time + leg_t;

        if (s == 0) {
          if (t_arr > cs[i].req_time + cs[i].max_wait + kTol) continue;
        } else {
          if (t_arr > cur.deadline[i] + kTol) continue;
        }

        // any other pending customer already past its deadline kills the label
        bool dead = false;
        for (int j = 0; j < m && !dead; ++j) {
          if (j == i) continue;
          int sj = status_of(cur.code, j);
          if (sj == 0 && t_arr > cs[j].req_time + cs[j].max_wait + kTol) dead = true;
          if (sj == 1 && t_arr > cur.deadline[j] + kTol) dead = true;
        }
        if (dead) continue;

        int waiting_cnt = 0;
        for (int j = 0; j < m; ++j)
          if (status_of(cur.code, j) == 0) ++waiting_cnt;

        Label nxt;
        int p = 1;
        for (int k = 0; k < i; ++k) p *= 3;
        nxt.code = cur.code + p;  // 0->1 or 1->2
        nxt.last = stop;
        nxt.time = t_arr;
        nxt.fuel = cur.fuel + leg_f;
        // Eq (4): waiting customers accumulate leg time, onboard ones w_D-weighted
        nxt.cost = cur.cost + (in.objective == Objective::Time
                                   ? leg_t * (waiting_cnt + in.onboard_weight * onboard_cnt)
                                   : leg_f);
        nxt.deadline = cur.deadline;
        if (s == 0) nxt.deadline[i] = t_arr + cs[i].baseline + cs[i].max_delay;
        nxt.parent = idx;
        nxt.order = order_counter++;
        int ni = insert_label(std::move(nxt));
        if (ni >= 0) waves[wave + 1].push_back(ni);
      }
    }
    // labels dominated after insertion were removed from buckets but stay in
    // waves; filter against the live frontier
    auto& next = waves[wave + 1];
    next.erase(std::remove_if(next.begin(), next.end(),
                              [&](int idx) {
                                const auto& b = frontier[key_of(arena[idx].code, arena[idx].last)];
                                return std::find(b.begin(), b.end(), idx) == b.end();
                              }),
               next.end());
  }

  // best terminal label
  int best = -1;
  for (int idx : waves[total_actions]) {
    const Label& l = arena[idx];
    if (l.code != terminal) continue;
    if (best < 0 || l.cost < arena[best].cost - kTol ||
        (l.cost < arena[best].cost + kTol &&
         (l.time < arena[best].time - kTol ||
          (l.time < arena[best].time + kTol && l.order < arena[best].order))))
      best = idx;
  }
  if (best < 0) return plan;  // infeasible

  std::vector<int> chain;
  for (int idx = best; idx >= 0; idx = arena[idx].parent) chain.push_back(idx);
  std::reverse(chain.begin(), chain.end());

  std::map<int, double> pick_time;
  for (int i = 0; i < onb; ++i) pick_time[cs[i].request_id] = in.onboard[i].pickup_time_s;
  for (size_t k = 1; k < chain.size(); ++k) {
    const Label& l = arena[chain[k]];
    int i = l.last / 2;
    bool pickup = l.last % 2 == 0;
    plan.stops.push_back({node_of_stop(l.last), cs[i].request_id, pickup, l.time});
    if (pickup) {
      pick_time[cs[i].request_id] = l.time;
      plan.wait_s[cs[i].request_id] = l.time - cs[i].req_time;
    } else {
      plan.delay_s[cs[i].request_id] = l.time - pick_time[cs[i].request_id] - cs[i].baseline;
    }
  }
  plan.fuel_g = arena[best].fuel;
  plan.finish_time_s = arena[best].time;
  plan.feasible = true;

  // Eq-(4) cost is reported whichever objective drove the search.
  if (in.objective == Objective::Time) {
    plan.time_cost = arena[best].cost;
  } else {
    double tc = 0;
    double t = in.start_time_s;
    int node = in.start_node;
    int code = 0;
    for (int i = 0; i < m; ++i)
      if (cs[i].onboard_at_start) {
        int p = 1;
        for (int k = 0; k < i; ++k) p *= 3;
        code += p;
      }
    for (const Stop& s : plan.stops) {
      int waiting = 0, onboard_cnt = 0;
      for (int j = 0; j < m; ++j) {
        int sj = status_of(code, j);
        if (sj == 0) ++waiting;
        if (sj == 1) ++onboard_cnt;
      }
      double leg_t = s.time_s - t;
      tc += leg_t * (waiting + in.onboard_weight * onboard_cnt);
      t = s.time_s;
      node = s.node;
      int i = 0;
      while (cs[i].request_id != s.request_id) ++i;
      int p = 1;
      for (int k = 0; k < i; ++k) p *= 3;
      code += p;
    }
    (void)node;
    plan.time_cost = tc;
  }
  return plan;
}

}  // namespace ecomod
