#include "ecomod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

namespace ecomod {

ConfigPolicy table_config(int configuration) {
  switch (configuration) {
    case 1: return {Objective::Time, RoutePolicy::Fastest, RoutePolicy::Fastest};
    case 2: return {Objective::Time, RoutePolicy::Hybrid, RoutePolicy::Hybrid};
    case 3: return {Objective::Time, RoutePolicy::Eco, RoutePolicy::Fastest};
    case 4: return {Objective::Time, RoutePolicy::Eco, RoutePolicy::Eco};
    case 5: return {Objective::Fuel, RoutePolicy::Fastest, RoutePolicy::Fastest};
    case 6: return {Objective::Fuel, RoutePolicy::Hybrid, RoutePolicy::Hybrid};
    case 7: return {Objective::Fuel, RoutePolicy::Eco, RoutePolicy::Fastest};
    case 8: return {Objective::Fuel, RoutePolicy::Eco, RoutePolicy::Eco};
    case 9: return {Objective::Time, RoutePolicy::ShortestDistance, RoutePolicy::Fastest};
  }
  throw Error("table_config: configuration must be in 1..9");
}

Metric routing_policy(int configuration, int occupancy, TripPhase phase) {
  if (phase == TripPhase::ActiveRebalance) return Metric::Fuel;
  ConfigPolicy p = table_config(configuration);
  RoutePolicy rp = phase == TripPhase::PassiveRebalance ? p.passive : p.assign;
  switch (rp) {
    case RoutePolicy::Fastest: return Metric::Time;
    case RoutePolicy::Eco: return Metric::Fuel;
    case RoutePolicy::Hybrid: return occupancy > 0 ? Metric::Time : Metric::Fuel;
    case RoutePolicy::ShortestDistance: return Metric::Distance;
  }
  return Metric::Time;
}

void EventLog::write_jsonl(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  char buf[256];
  for (const Event& e : events) {
    std::snprintf(buf, sizeof(buf),
                  "{\"t\":%.3f,\"type\":\"%c\",\"vehicle\":%d,\"request\":%d,"
                  "\"node\":%d,\"fuel\":%.6f,\"dist\":%.3f}\n",
                  e.t, e.type, e.vehicle, e.request, e.node, e.fuel_g, e.dist_m);
    f << buf;
  }
}

namespace {

constexpr double kEps = 1e-6;

enum class VStatus { Idle, Serving, Passive, Active };

struct Traverse {
  int edge = -1;
  double start = 0, end = 0;
  int occupancy = 0;
};

struct Action {
  double t = 0;
  bool is_stop = false;
  Traverse tr;
  Stop stop;
};

struct SimVehicle {
  int id = -1;
  int node = -1;
  double node_time = 0;
  VStatus status = VStatus::Idle;
  std::optional<Traverse> in_flight;
  std::vector<Action> itin;
  size_t next = 0;
  std::vector<OnboardCustomer> onboard;
  std::vector<int> assigned;  // request ids, not yet picked up
  double total_dist = 0, empty_dist = 0, fuel = 0;

  int plan_node() const { return in_flight ? -1 : node; }
  bool itin_done() const { return !in_flight && next >= itin.size(); }
};

struct ReqRecord {
  double req_time = 0;
  double wait = -1, delay = -1, complete_t = -1;
  bool rejected = false;
};

const CostMatrix& matrix_for(const RoutingCosts& costs, Metric m) {
  switch (m) {
    case Metric::Time: return costs.time;
    case Metric::Fuel: return costs.fuel;
    case Metric::Distance: return costs.distance;
  }
  return costs.time;
}

struct World {
  const ScenarioInputs& in;
  const SimConfig& cfg;
  EventLog* log;

  double clock = 0;
  CustomerPool pool;
  std::vector<SimVehicle> vehicles;
  std::map<int, ReqRecord> records;
  size_t next_request = 0;

  // metrics accumulators
  double window_fuel = 0, total_fuel = 0;
  double window_dist = 0, window_empty = 0;
  std::vector<double> assigned_samples, onboard_samples;
  long interval_index = 0;

  World(const ScenarioInputs& inputs, const SimConfig& config, EventLog* lg)
      : in(inputs), cfg(config), log(lg) {
    std::mt19937_64 rng(cfg.seed);
    vehicles.resize(cfg.fleet_size);
    for (int i = 0; i < cfg.fleet_size; ++i) {
      vehicles[i].id = i;
      vehicles[i].node = static_cast<int>(rng() % in.net->node_count());
    }
  }

  bool in_window(double t) const { return t >= cfg.warmup_s - kEps && t <= cfg.horizon_s + kEps; }

  void complete_traversal(SimVehicle& v, const Traverse& tr) {
    const NetEdge& e = in.net->edge(tr.edge);
    double f = edge_fuel(*in.fuel, e.length_m, e.speed_mps);
    v.fuel += f;
    v.total_dist += e.length_m;
    total_fuel += f;
    if (tr.occupancy == 0) v.empty_dist += e.length_m;
    if (in_window(tr.end)) {
      window_fuel += f;
      window_dist += e.length_m;
      if (tr.occupancy == 0) window_empty += e.length_m;
    }
    v.node = e.to;
    v.node_time = tr.end;
    if (log) log->events.push_back({tr.end, 'e', v.id, -1, e.to, f, e.length_m});
  }

  void fire_stop(SimVehicle& v, const Stop& s) {
    if (s.pickup) {
      const TravelRequest& r = pool.request(s.request_id);
      double wait = s.time_s - r.request_time_s;
      if (wait > r.max_wait_s + kEps)
        throw Error("invariant violated: pickup after wait deadline");
      if (static_cast<int>(v.onboard.size()) + 1 > cfg.capacity)
        throw Error("invariant violated: capacity exceeded");
      pool.update(s.request_id, PoolEvent::Pickup);
      v.onboard.push_back({s.request_id, r.dest, s.time_s,
                           in.costs->time.cost(r.origin, r.dest), r.max_delay_s});
      v.assigned.erase(std::remove(v.assigned.begin(), v.assigned.end(), s.request_id),
                       v.assigned.end());
      records[s.request_id].wait = wait;
      if (log) log->events.push_back({s.time_s, 'p', v.id, s.request_id, s.node, 0, 0});
    } else {
      auto it = std::find_if(v.onboard.begin(), v.onboard.end(),
                             [&](const OnboardCustomer& o) { return o.request_id == s.request_id; });
      if (it == v.onboard.end()) throw Error("drop-off for customer not onboard");
      double delay = s.time_s - it->pickup_time_s - it->min_travel_s;
      if (delay > it->max_delay_s + kEps)
        throw Error("invariant violated: drop-off after delay deadline");
      pool.update(s.request_id, PoolEvent::Complete);
      records[s.request_id].delay = std::max(0.0, delay);
      records[s.request_id].complete_t = s.time_s;
      v.onboard.erase(it);
      if (log) log->events.push_back({s.time_s, 'd', v.id, s.request_id, s.node, 0, 0});
    }
  }

  void advance(double t) {
    for (SimVehicle& v : vehicles) {
      for (;;) {
        if (v.in_flight) {
          if (v.in_flight->end <= t + kEps) {
            Traverse tr = *v.in_flight;
            v.in_flight.reset();
            complete_traversal(v, tr);
          } else {
            break;
          }
        } else if (v.next < v.itin.size()) {
          Action& a = v.itin[v.next];
          if (a.t > t + kEps) break;
          ++v.next;
          if (a.is_stop)
            fire_stop(v, a.stop);
          else
            v.in_flight = a.tr;
        } else {
          if (v.status != VStatus::Idle && v.onboard.empty() && v.assigned.empty())
            v.status = VStatus::Idle;
          break;
        }
      }
    }
    clock = t;
  }

  // Itinerary from a committed plan; legs routed per configuration/phase.
  void commit_plan(SimVehicle& v, const TripPlan& plan, TripPhase phase, int start_node,
                   double start_time) {
    v.itin.clear();
    v.next = 0;
    int node = start_node;
    double t = start_time;
    int occupancy = static_cast<int>(v.onboard.size());
    for (const Stop& s : plan.stops) {
      Metric m = routing_policy(cfg.configuration, occupancy, phase);
      const CostMatrix& cm = matrix_for(*in.costs, m);
      std::vector<int> path = cm.path(node, s.node);
      for (size_t i = 0; i + 1 < path.size(); ++i) {
        int e = in.net->edge_between(path[i], path[i + 1]);
        const NetEdge& ed = in.net->edge(e);
        double dt = ed.length_m / ed.speed_mps;
        Action a;
        a.t = t;
        a.is_stop = false;
        a.tr = {e, t, t + dt, occupancy};
        v.itin.push_back(a);
        t += dt;
      }
      Action a;
      a.t = t;
      a.is_stop = true;
      a.stop = s;
      a.stop.time_s = t;
      v.itin.push_back(a);
      occupancy += s.pickup ? 1 : -1;
      node = s.node;
    }
  }

  void commit_relocation(SimVehicle& v, int dest_node, int start_node, double start_time) {
    v.itin.clear();
    v.next = 0;
    const CostMatrix& cm = in.costs->fuel;  // active rebalancing is eco-routed
    std::vector<int> path = cm.path(start_node, dest_node);
    double t = start_time;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      int e = in.net->edge_between(path[i], path[i + 1]);
      const NetEdge& ed = in.net->edge(e);
      double dt = ed.length_m / ed.speed_mps;
      Action a;
      a.t = t;
      a.is_stop = false;
      a.tr = {e, t, t + dt, 0};
      v.itin.push_back(a);
      t += dt;
    }
    v.status = path.size() > 1 ? VStatus::Active : VStatus::Idle;
  }

  std::pair<int, double> plan_position(const SimVehicle& v) const {
    if (v.in_flight) return {in.net->edge(v.in_flight->edge).to, v.in_flight->end};
    return {v.node, std::max(v.node_time, clock)};
  }

  double completion_time(const SimVehicle& v) const {
    double t = v.in_flight ? v.in_flight->end : std::max(v.node_time, clock);
    if (v.next < v.itin.size()) {
      const Action& a = v.itin.back();
      t = std::max(t, a.is_stop ? a.t : a.tr.end);
    }
    return t;
  }

  int final_node(const SimVehicle& v) const {
    for (size_t i = v.itin.size(); i > v.next;) {
      --i;
      if (v.itin[i].is_stop) return v.itin[i].stop.node;
      return in.net->edge(v.itin[i].tr.edge).to;
    }
    if (v.in_flight) return in.net->edge(v.in_flight->edge).to;
    return v.node;
  }

  void run_interval_pipeline() {
    const ConfigPolicy policy = table_config(cfg.configuration);
    const double t = clock;

    // new requests enter the pool
    while (next_request < in.requests.size() &&
           in.requests[next_request].request_time_s <= t + kEps) {
      const TravelRequest& r = in.requests[next_request];
      pool.add(r);
      records[r.id].req_time = r.request_time_s;
      ++next_request;
    }

    // reject waiting customers past their wait deadline
    for (int id : pool.with_state(RequestState::Waiting)) {
      const TravelRequest& r = pool.request(id);
      if (t > r.request_time_s + r.max_wait_s + kEps) {
        pool.update(id, PoolEvent::Reject);
        records[id].rejected = true;
        if (log) log->events.push_back({t, 'r', -1, id, -1, 0, 0});
      }
    }

    // vehicles at full occupancy keep their plans; their pending pickups are
    // locked out of this round of re-planning
    std::set<int> locked;
    std::vector<int> replan;  // vehicle indices
    for (const SimVehicle& v : vehicles) {
      if (static_cast<int>(v.onboard.size()) >= cfg.capacity) {
        for (int r : v.assigned) locked.insert(r);
      } else {
        replan.push_back(v.id);
      }
    }

    std::vector<TravelRequest> pending;
    for (int id : pool.pending())
      if (!locked.count(id)) pending.push_back(pool.request(id));

    std::vector<VehicleSnapshot> snaps;
    std::vector<int> snap_vehicle;
    for (int vi : replan) {
      const SimVehicle& v = vehicles[vi];
      auto [node, avail] = plan_position(v);
      snaps.push_back({v.id, node, avail, cfg.capacity, v.onboard});
      snap_vehicle.push_back(vi);
    }

    const bool dbg = getenv("ECOMOD_DEBUG") != nullptr;
    auto now = [] { return std::chrono::duration<double>(
                        std::chrono::steady_clock::now().time_since_epoch()).count(); };
    if (dbg) fprintf(stderr, "  pipe_start wall=%.2f\n", now());
    double t0 = now();
    ShareabilityGraph graph =
        build_shareability_graph(pending, snaps, *in.costs, t, policy.assign);
    double t1 = now();
    std::vector<Clique> cliques = enumerate_cliques(graph, cfg.max_clique_customers);
    double t2 = now();
    std::vector<FeasibleTrip> trips = build_trips(cliques, graph, *in.costs, policy.objective,
                                                  policy.assign, cfg.onboard_weight, t);
    double t3 = now();

    AssignmentProblem ap;
    ap.trips = trips;
    ap.n_customers = static_cast<int>(pending.size());
    ap.n_vehicles = static_cast<int>(snaps.size());
    AssignmentSolution sol = solve_ilp(ap);
    double t4 = now();
    if (dbg)
      fprintf(stderr,
              "t=%.0f pending=%zu cliques=%zu trips=%zu graph=%.2f cliq=%.2f "
              "trips=%.2f ilp=%.2f\n",
              t, pending.size(), cliques.size(), trips.size(), t1 - t0, t2 - t1, t3 - t2,
              t4 - t3);

    // --- commit ---
    std::set<int> selected_vehicles;
    for (int ti : sol.selected_trips) selected_vehicles.insert(snap_vehicle[trips[ti].vehicle]);

    for (int vi : replan) {
      SimVehicle& v = vehicles[vi];
      for (int r : v.assigned)
        if (pool.contains(r) && pool.state(r) == RequestState::Assigned)
          pool.update(r, PoolEvent::Unassign);
      v.assigned.clear();
    }

    for (int ti : sol.selected_trips) {
      const FeasibleTrip& trip = trips[ti];
      SimVehicle& v = vehicles[snap_vehicle[trip.vehicle]];
      const VehicleSnapshot& snap = snaps[trip.vehicle];
      for (int r : trip.request_idx) {
        pool.update(pending[r].id, PoolEvent::Assign);
        v.assigned.push_back(pending[r].id);
      }
      std::sort(v.assigned.begin(), v.assigned.end());
      commit_plan(v, trip.plan, TripPhase::Assignment, snap.node, snap.available_time_s);
      v.status = VStatus::Serving;
    }

    for (size_t si = 0; si < snaps.size(); ++si) {
      int vi = snap_vehicle[si];
      SimVehicle& v = vehicles[vi];
      if (selected_vehicles.count(vi)) continue;
      if (!v.onboard.empty()) {
        // continuation: finish the onboard drop-offs
        SchedulerInput dpin;
        dpin.vehicle_id = v.id;
        dpin.start_node = snaps[si].node;
        dpin.start_time_s = snaps[si].available_time_s;
        dpin.capacity = cfg.capacity;
        dpin.onboard = v.onboard;
        dpin.objective = policy.objective;
        dpin.onboard_weight = cfg.onboard_weight;
        dpin.policy = policy.assign;
        dpin.costs = in.costs;
        TripPlan cont = solve_tsp_dp(dpin);
        if (!cont.feasible) throw Error("continuation plan infeasible");
        commit_plan(v, cont, TripPhase::Assignment, snaps[si].node, snaps[si].available_time_s);
        v.status = VStatus::Serving;
      } else if (v.status == VStatus::Active && !v.itin_done()) {
        // keep relocating
      } else {
        v.itin.clear();
        v.next = 0;
        v.status = VStatus::Idle;
      }
    }

    // --- passive rebalancing ---
    std::vector<int> ignored_ids;
    for (int r : sol.ignored_customers)
      if (pool.state(pending[r].id) == RequestState::Waiting) ignored_ids.push_back(pending[r].id);
    std::vector<int> idle_vehicles;
    for (SimVehicle& v : vehicles)
      if (v.status == VStatus::Idle) idle_vehicles.push_back(v.id);

    if (!ignored_ids.empty() && !idle_vehicles.empty()) {
      Eigen::MatrixXd cost(idle_vehicles.size(), ignored_ids.size());
      std::vector<TripPlan> solo(idle_vehicles.size() * ignored_ids.size());
      for (size_t a = 0; a < idle_vehicles.size(); ++a) {
        SimVehicle& v = vehicles[idle_vehicles[a]];
        auto [node, avail] = plan_position(v);
        for (size_t b = 0; b < ignored_ids.size(); ++b) {
          const TravelRequest& r = pool.request(ignored_ids[b]);
          SchedulerInput dpin;
          dpin.vehicle_id = v.id;
          dpin.start_node = node;
          dpin.start_time_s = avail;
          dpin.capacity = cfg.capacity;
          dpin.customers = {r};
          dpin.objective = Objective::Time;
          dpin.policy = policy.passive;
          dpin.costs = in.costs;
          TripPlan p = solve_tsp_dp(dpin);
          if (p.feasible) {
            cost(a, b) = p.wait_s.at(r.id);
            solo[a * ignored_ids.size() + b] = std::move(p);
          } else {
            cost(a, b) = -1;
          }
        }
      }
      for (auto [a, b] : passive_rebalance(cost)) {
        SimVehicle& v = vehicles[idle_vehicles[a]];
        auto [node, avail] = plan_position(v);
        const TripPlan& p = solo[a * ignored_ids.size() + b];
        pool.update(ignored_ids[b], PoolEvent::Assign);
        v.assigned = {ignored_ids[b]};
        commit_plan(v, p, TripPhase::PassiveRebalance, node, avail);
        v.status = VStatus::Passive;
      }
    }

    // --- active rebalancing ---
    double t5 = now();
    if (cfg.active_rebalance) active_rebalance_step();
    if (dbg)
      fprintf(stderr, "  commit+passive=%.2f active=%.2f wall=%.2f\n", t5 - t4, now() - t5,
              now());

    // metric samples
    if (t >= cfg.warmup_s - kEps && t <= cfg.horizon_s + kEps) {
      int running = 0, assigned_cnt = 0, onboard_cnt = 0;
      for (const SimVehicle& v : vehicles) {
        if (v.status != VStatus::Idle) ++running;
        assigned_cnt += static_cast<int>(v.assigned.size() + v.onboard.size());
        onboard_cnt += static_cast<int>(v.onboard.size());
      }
      if (running > 0) {
        assigned_samples.push_back(static_cast<double>(assigned_cnt) / running);
        onboard_samples.push_back(static_cast<double>(onboard_cnt) / running);
      }
    }
    ++interval_index;
  }

  void active_rebalance_step() {
    std::vector<int> idle;
    for (SimVehicle& v : vehicles)
      if (v.status == VStatus::Idle) idle.push_back(v.id);
    if (idle.empty()) return;

    const PartitionSet& ps = *in.partitions;
    const int K = ps.count();
    const double interval = cfg.assign_interval_s;

    RebalanceProblem rp;
    rp.n_partitions = K;
    rp.origin_density = in.origin_density;
    rp.sharing_discount = cfg.sharing_discount;
    rp.cost_weight = cfg.cost_weight;
    rp.lambda_per_interval.resize(K);
    for (int k = 0; k < K; ++k) rp.lambda_per_interval[k] = in.lambda_per_s[k] * interval;

    for (int vi : idle) {
      const SimVehicle& v = vehicles[vi];
      int home = ps.partition_of[v.node];
      rp.vehicle_partition.push_back(home);
      std::vector<RebalanceCandidate> cands;
      cands.push_back({home, 0.0, 0});
      for (int adj : ps.adjacency[home]) {
        int center = ps.centers[adj];
        double fuel = in.costs->fuel.cost(v.node, center);
        int arr = static_cast<int>(std::ceil(in.costs->fuel.time_s(v.node, center) / interval));
        cands.push_back({adj, fuel, std::max(arr, 1)});
      }
      rp.candidates.push_back(std::move(cands));
    }

    // arrivals forecast from busy vehicles' last planned stops
    int T = cfg.rebalance_horizon;
    Eigen::MatrixXd arrivals = Eigen::MatrixXd::Zero(K, T + 1);
    double lambda_total = 0;
    for (double l : rp.lambda_per_interval) lambda_total += l;
    for (const SimVehicle& v : vehicles) {
      if (v.status == VStatus::Idle) continue;
      double tf = completion_time(v);
      int tau = static_cast<int>(std::ceil((tf - clock) / interval));
      tau = std::max(tau, 1);
      if (tau > T) continue;
      int k = ps.partition_of[final_node(v)];
      for (int x = tau; x <= T; ++x) arrivals(k, x) += 1.0;
    }
    // shrink the horizon if the Poisson depletion overdraws the idle supply
    int eff_T = 0;
    for (int tau = 1; tau <= T; ++tau) {
      double ntau = static_cast<double>(idle.size()) + arrivals.col(tau).sum() -
                    tau * cfg.sharing_discount * lambda_total;
      if (ntau <= 1e-9) break;
      eff_T = tau;
    }
    if (eff_T == 0) return;
    rp.horizon = eff_T;
    rp.arrivals = arrivals.leftCols(eff_T + 1);

    RelaxedSolution relaxed;
    try {
      relaxed = solve_relaxed(rp);
    } catch (const Error&) {
      return;  // skip this interval rather than abort the run
    }
    uint64_t round_seed = cfg.seed * 2654435761ULL + static_cast<uint64_t>(interval_index);
    RebalancePlan plan = round_plan(relaxed.t, round_seed);
    for (size_t i = 0; i < idle.size(); ++i) {
      const RebalanceCandidate& c = rp.candidates[i][plan.choice[i]];
      SimVehicle& v = vehicles[idle[i]];
      if (c.dest_partition == rp.vehicle_partition[i] && plan.choice[i] == 0) continue;  // stay
      auto [node, avail] = plan_position(v);
      commit_relocation(v, ps.centers[c.dest_partition], node, avail);
    }
  }

  MetricsReport finalize() {
    // Requests arriving after the last assignment epoch never reached the
    // pool; they still count as generated (and end up pending).
    while (next_request < in.requests.size() &&
           in.requests[next_request].request_time_s <= cfg.horizon_s + kEps) {
      const TravelRequest& r = in.requests[next_request];
      pool.add(r);
      records[r.id].req_time = r.request_time_s;
      ++next_request;
    }

    MetricsReport r;
    r.generated = static_cast<int>(records.size());
    r.served = pool.count(RequestState::Completed);
    r.rejected = pool.count(RequestState::Rejected);
    r.pending = r.generated - r.served - r.rejected;
    r.total_fuel_g = total_fuel;
    r.fleet_fuel_g = window_fuel;
    r.empty_distance_ratio = window_dist > 0 ? window_empty / window_dist : 0;

    double cohort_end = cfg.horizon_s - cfg.cohort_tail_s;
    std::vector<double> waits, delays;
    int cohort = 0, cohort_served = 0, window_served = 0;
    for (const auto& [id, rec] : records) {
      bool in_cohort = rec.req_time >= cfg.warmup_s && rec.req_time <= cohort_end;
      if (in_cohort) {
        ++cohort;
        if (rec.complete_t >= 0) ++cohort_served;
      }
      if (rec.complete_t >= cfg.warmup_s && rec.complete_t <= cfg.horizon_s) {
        ++window_served;
        waits.push_back(rec.wait);
        delays.push_back(rec.delay);
      }
    }
    r.cohort_size = cohort;
    r.served_within_constraints_ratio = cohort > 0 ? static_cast<double>(cohort_served) / cohort : 0;
    r.fuel_per_served_g = window_served > 0 ? window_fuel / window_served : 0;

    auto stats = [](std::vector<double>& v, double& mean, double& p25, double& p75) {
      if (v.empty()) return;
      std::sort(v.begin(), v.end());
      double s = 0;
      for (double x : v) s += x;
      mean = s / v.size();
      auto quantile = [&](double q) {
        double pos = q * (v.size() - 1);
        size_t i = static_cast<size_t>(pos);
        double frac = pos - i;
        return i + 1 < v.size() ? v[i] * (1 - frac) + v[i + 1] * frac : v[i];
      };
      p25 = quantile(0.25);
      p75 = quantile(0.75);
    };
    stats(waits, r.mean_wait_s, r.p25_wait_s, r.p75_wait_s);
    stats(delays, r.mean_delay_s, r.p25_delay_s, r.p75_delay_s);

    auto mean_of = [](const std::vector<double>& v) {
      if (v.empty()) return 0.0;
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    };
    r.mean_assigned_per_running = mean_of(assigned_samples);
    r.mean_onboard_per_running = mean_of(onboard_samples);
    return r;
  }
};

}  // namespace

MetricsReport run_scenario(const ScenarioInputs& inputs, const SimConfig& config,
                           EventLog* log) {
  if (!inputs.net || !inputs.costs || !inputs.partitions || !inputs.fuel)
    throw Error("run_scenario: incomplete inputs");
  if (config.configuration == 9) return run_baseline(inputs, config);
  if (config.warmup_s >= config.horizon_s) throw Error("run_scenario: warmup >= horizon");

  World w(inputs, config, log);
  double t = 0;
  while (t < config.horizon_s - kEps) {
    double next_interval = std::min(t + config.assign_interval_s, config.horizon_s);
    // advance in dt steps so motion resolution matches the configured clock
    auto tic = std::chrono::steady_clock::now();
    while (w.clock < next_interval - kEps)
      w.advance(std::min(w.clock + config.dt_s, next_interval));
    if (getenv("ECOMOD_DEBUG"))
      fprintf(stderr, "  adv[%.0f]=%.2f\n", t,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count());
    if (next_interval < config.horizon_s - kEps) w.run_interval_pipeline();
    t = next_interval;
  }
  w.advance(config.horizon_s);
  return w.finalize();
}

MetricsReport run_baseline(const ScenarioInputs& inputs, const SimConfig& config) {
  MetricsReport r;
  std::mt19937_64 rng(config.seed);
  auto unif = [&rng]() { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
  double cohort_end = config.horizon_s - config.cohort_tail_s;
  int in_window = 0;
  for (const TravelRequest& req : inputs.requests) {
    bool shortest_distance = unif() < config.baseline_mix;
    const CostMatrix& cm = shortest_distance ? inputs.costs->distance : inputs.costs->time;
    double fuel = cm.fuel_g(req.origin, req.dest);
    ++r.generated;
    ++r.served;
    r.total_fuel_g += fuel;
    if (req.request_time_s >= config.warmup_s && req.request_time_s <= cohort_end) {
      ++r.cohort_size;
      ++in_window;
      r.fleet_fuel_g += fuel;
    }
  }
  r.served_within_constraints_ratio = 1.0;
  r.fuel_per_served_g = in_window > 0 ? r.fleet_fuel_g / in_window : 0;
  r.mean_assigned_per_running = 1.0;
  r.mean_onboard_per_running = 1.0;
  return r;
}

std::string metrics_csv_header() {
  return "# ecomod metrics schema v1\n"
         "scenario,configuration,fleet_size,seed,generated,served,rejected,pending,"
         "cohort_size,served_ratio,mean_wait_s,p25_wait_s,p75_wait_s,mean_delay_s,"
         "p25_delay_s,p75_delay_s,fleet_fuel_g,fuel_per_served_g,total_fuel_g,"
         "empty_distance_ratio,assigned_per_running,onboard_per_running,baseline_fuel_delta\n";
}

std::string metrics_csv_row(const std::string& scenario, int configuration, int fleet_size,
                            uint64_t seed, const MetricsReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf),
                "%s,%d,%d,%llu,%d,%d,%d,%d,%d,%.6f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,"
                "%.3f,%.6f,%.4f,%.4f,%.6f\n",
                scenario.c_str(), configuration, fleet_size,
                static_cast<unsigned long long>(seed), r.generated, r.served, r.rejected,
                r.pending, r.cohort_size, r.served_within_constraints_ratio, r.mean_wait_s,
                r.p25_wait_s, r.p75_wait_s, r.mean_delay_s, r.p25_delay_s, r.p75_delay_s,
                r.fleet_fuel_g, r.fuel_per_served_g, r.total_fuel_g, r.empty_distance_ratio,
                r.mean_assigned_per_running, r.mean_onboard_per_running, r.baseline_fuel_delta);
  return buf;
}

}  // namespace ecomod
