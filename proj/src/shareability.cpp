#include "ecomod/shareability.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

namespace ecomod {

bool rr_edge(const TravelRequest& r1, const TravelRequest& r2, const RoutingCosts& costs,
             double clock_s, RoutePolicy policy, int capacity) {
  // A virtual empty vehicle at either origin, departing at the later request
  // time, must be able to serve both within their limits.
  double depart = std::max({r1.request_time_s, r2.request_time_s, clock_s});
  for (int start : {r1.origin, r2.origin}) {
    SchedulerInput in;
    in.vehicle_id = -1;
    in.start_node = start;
    in.start_time_s = depart;
    in.capacity = capacity;
    in.customers = {r1, r2};
    in.objective = Objective::Time;
    in.policy = policy;
    in.costs = &costs;
    if (solve_tsp_dp(in).feasible) return true;
  }
  return false;
}

bool rv_edge(const VehicleSnapshot& v, const TravelRequest& r, const RoutingCosts& costs,
             double clock_s, RoutePolicy policy) {
  if (static_cast<int>(v.onboard.size()) >= v.capacity) return false;
  SchedulerInput in;
  in.vehicle_id = v.id;
  in.start_node = v.node;
  in.start_time_s = std::max(v.available_time_s, clock_s);
  in.capacity = v.capacity;
  in.onboard = v.onboard;
  in.customers = {r};
  in.objective = Objective::Time;
  in.policy = policy;
  in.costs = &costs;
  return solve_tsp_dp(in).feasible;
}

ShareabilityGraph build_shareability_graph(const std::vector<TravelRequest>& requests,
                                           const std::vector<VehicleSnapshot>& vehicles,
                                           const RoutingCosts& costs, double clock_s,
                                           RoutePolicy policy) {
  ShareabilityGraph g;
  g.requests = requests;
  g.vehicles = vehicles;
  const int nr = static_cast<int>(requests.size());
  const int nv = static_cast<int>(vehicles.size());
  g.rr.assign(nr, std::vector<char>(nr, 0));
  g.rv.assign(nv, std::vector<char>(nr, 0));
  for (int i = 0; i < nr; ++i)
    for (int j = i + 1; j < nr; ++j)
      g.rr[i][j] = g.rr[j][i] = rr_edge(requests[i], requests[j], costs, clock_s, policy);
  for (int v = 0; v < nv; ++v)
    for (int i = 0; i < nr; ++i)
      g.rv[v][i] = rv_edge(vehicles[v], requests[i], costs, clock_s, policy);
  return g;
}

void ShareabilityGraph::dump_edge_list(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  for (size_t i = 0; i < requests.size(); ++i)
    for (size_t j = i + 1; j < requests.size(); ++j)
      if (rr[i][j]) f << "r" << requests[i].id << " r" << requests[j].id << "\n";
  for (size_t v = 0; v < vehicles.size(); ++v)
    for (size_t i = 0; i < requests.size(); ++i)
      if (rv[v][i]) f << "v" << vehicles[v].id << " r" << requests[i].id << "\n";
}

namespace {

// Bron-Kerbosch with pivoting over the combined node set. Vehicles occupy
// indices [0, nv), requests [nv, nv+nr). No vehicle-vehicle edges exist, so
// every maximal clique holds at most one vehicle.
struct Bk {
  const ShareabilityGraph* g;
  int nv, nr;
  std::vector<std::vector<int>> cliques;  // maximal cliques (combined indices)

  bool adjacent(int a, int b) const {
    bool av = a < nv, bv = b < nv;
    if (av && bv) return false;
    if (av) return g->rv[a][b - nv] != 0;
    if (bv) return g->rv[b][a - nv] != 0;
    return g->rr[a - nv][b - nv] != 0;
  }

  void run(std::vector<int> r, std::vector<int> p, std::vector<int> x) {
    if (p.empty() && x.empty()) {
      cliques.push_back(std::move(r));
      return;
    }
    // pivot: vertex of P union X with most neighbors in P
    int pivot = -1, best = -1;
    for (const auto* s : {&p, &x})
      for (int u : *s) {
        int cnt = 0;
        for (int w : p)
          if (adjacent(u, w)) ++cnt;
        if (cnt > best) {
          best = cnt;
          pivot = u;
        }
      }
    std::vector<int> candidates;
    for (int u : p)
      if (pivot < 0 || !adjacent(pivot, u)) candidates.push_back(u);
    for (int u : candidates) {
      std::vector<int> r2 = r;
      r2.push_back(u);
      std::vector<int> p2, x2;
      for (int w : p)
        if (adjacent(u, w)) p2.push_back(w);
      for (int w : x)
        if (adjacent(u, w)) x2.push_back(w);
      run(std::move(r2), std::move(p2), std::move(x2));
      p.erase(std::find(p.begin(), p.end(), u));
      x.push_back(u);
    }
  }
};

}  // namespace

std::vector<Clique> enumerate_cliques(const ShareabilityGraph& graph, int max_customers) {
  const int nv = static_cast<int>(graph.vehicles.size());
  const int nr = static_cast<int>(graph.requests.size());

  Bk bk{&graph, nv, nr, {}};
  std::vector<int> all(nv + nr);
  for (int i = 0; i < nv + nr; ++i) all[i] = i;
  bk.run({}, std::move(all), {});

  std::set<std::pair<int, std::vector<int>>> seen;
  for (const auto& mc : bk.cliques) {
    int vehicle = -1;
    std::vector<int> reqs;
    for (int u : mc) {
      if (u < nv)
        vehicle = u;
      else
        reqs.push_back(u - nv);
    }
    if (vehicle < 0 || reqs.empty()) continue;
    std::sort(reqs.begin(), reqs.end());
    int cap = std::min<int>(max_customers,
                            graph.vehicles[vehicle].capacity -
                                static_cast<int>(graph.vehicles[vehicle].onboard.size()));
    cap = std::min<int>(cap, static_cast<int>(reqs.size()));
    // all non-empty subsets up to cap
    std::vector<int> pick;
    std::function<void(int)> rec = [&](int start) {
      if (!pick.empty()) seen.emplace(vehicle, pick);
      if (static_cast<int>(pick.size()) == cap) return;
      for (int i = start; i < static_cast<int>(reqs.size()); ++i) {
        pick.push_back(reqs[i]);
        rec(i + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }

  std::vector<Clique> out;
  out.reserve(seen.size());
  for (const auto& [v, reqs] : seen) out.push_back({v, reqs});
  return out;
}

}  // namespace ecomod
