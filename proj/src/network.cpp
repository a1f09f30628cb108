#include "ecomod/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

namespace ecomod {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-9;
}  // namespace

RoadNetwork::RoadNetwork(std::vector<NetNode> nodes, std::vector<NetEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const NetEdge& ed = edges_[e];
    if (ed.from < 0 || ed.from >= node_count() || ed.to < 0 || ed.to >= node_count())
      throw Error("RoadNetwork: edge endpoint out of range");
    if (ed.length_m <= 0.0) throw Error("RoadNetwork: edge length must be > 0");
    if (ed.speed_mps <= 0.0) throw Error("RoadNetwork: edge speed must be > 0");
    if (ed.lanes < 1) throw Error("RoadNetwork: lane count must be >= 1");
    out_[ed.from].push_back(e);
    in_[ed.to].push_back(e);
  }
}

int RoadNetwork::edge_between(int from, int to) const {
  for (int e : out_[from])
    if (edges_[e].to == to) return e;
  return -1;
}

double RoadNetwork::edge_weight(int e, Metric metric, const FuelModel& fuel) const {
  const NetEdge& ed = edges_[e];
  switch (metric) {
    case Metric::Time: return ed.length_m / ed.speed_mps;
    case Metric::Fuel: return edge_fuel(fuel, ed.length_m, ed.speed_mps);
    case Metric::Distance: return ed.length_m;
  }
  return 0.0;
}

bool RoadNetwork::strongly_connected() const {
  auto reach = [&](const std::vector<std::vector<int>>& adj, bool forward) {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int cnt = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : adj[v]) {
        int u = forward ? edges_[e].to : edges_[e].from;
        if (!seen[u]) {
          seen[u] = 1;
          ++cnt;
          stack.push_back(u);
        }
      }
    }
    return cnt == node_count();
  };
  if (nodes_.empty()) return true;
  return reach(out_, true) && reach(in_, false);
}

namespace {

// Dijkstra distances from every node to `dest` on the reverse graph.
std::vector<double> dist_to(const RoadNetwork& net, int dest, Metric metric,
                            const FuelModel& fuel) {
  std::vector<double> d(net.node_count(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[dest] = 0.0;
  pq.emplace(0.0, dest);
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v]) continue;
    for (int e : net.in_edges(v)) {
      int u = net.edge(e).from;
      double nd = dv + net.edge_weight(e, metric, fuel);
      double slack = std::isfinite(d[u]) ? kTieTol * std::max(1.0, std::abs(d[u])) : 0.0;
      if (nd < d[u] - slack) {
        d[u] = nd;
        pq.emplace(nd, u);
      }
    }
  }
  return d;
}

std::vector<double> dist_from(const RoadNetwork& net, int origin, Metric metric,
                              const FuelModel& fuel) {
  std::vector<double> d(net.node_count(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[origin] = 0.0;
  pq.emplace(0.0, origin);
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v]) continue;
    for (int e : net.out_edges(v)) {
      int u = net.edge(e).to;
      double nd = dv + net.edge_weight(e, metric, fuel);
      double slack = std::isfinite(d[u]) ? kTieTol * std::max(1.0, std::abs(d[u])) : 0.0;
      if (nd < d[u] - slack) {
        d[u] = nd;
        pq.emplace(nd, u);
      }
    }
  }
  return d;
}

bool on_optimal(double via, double best) {
  return via <= best + kTieTol * std::max(1.0, std::abs(best));
}

}  // namespace

Route shortest_path(const RoadNetwork& net, int origin, int dest, Metric metric,
                    const FuelModel& fuel) {
  if (origin < 0 || origin >= net.node_count() || dest < 0 || dest >= net.node_count())
    throw Error("shortest_path: invalid node");
  Route route;
  if (origin == dest) return route;

  std::vector<double> d = dist_to(net, dest, metric, fuel);
  if (!std::isfinite(d[origin]))
    throw UnreachableDestination("shortest_path: no path");

  // Greedy forward walk over optimal arcs; smallest successor id makes the
  // node sequence lexicographically smallest among optimal paths.
  int v = origin;
  route.nodes.push_back(v);
  while (v != dest) {
    int best_u = -1, best_e = -1;
    for (int e : net.out_edges(v)) {
      int u = net.edge(e).to;
      if (!std::isfinite(d[u])) continue;
      if (on_optimal(net.edge_weight(e, metric, fuel) + d[u], d[v])) {
        if (best_u == -1 || net.node(u).id < net.node(best_u).id) {
          best_u = u;
          best_e = e;
        }
      }
    }
    if (best_u == -1) throw Error("shortest_path: reconstruction failed");
    const NetEdge& ed = net.edge(best_e);
    route.time_s += ed.length_m / ed.speed_mps;
    route.fuel_g += edge_fuel(fuel, ed.length_m, ed.speed_mps);
    route.distance_m += ed.length_m;
    v = best_u;
    route.nodes.push_back(v);
  }
  return route;
}

std::vector<int> CostMatrix::path(int origin, int dest) const {
  std::vector<int> p;
  if (origin == dest) return p;
  int v = origin;
  p.push_back(v);
  while (v != dest) {
    v = next_hop(v, dest);
    if (v < 0) throw UnreachableDestination("CostMatrix::path: no path");
    p.push_back(v);
  }
  return p;
}

CostMatrix all_pairs_costs(const RoadNetwork& net, Metric metric, const FuelModel& fuel) {
  const int n = net.node_count();
  CostMatrix m;
  m.metric = metric;
  m.cost.setZero(n, n);
  m.time_s.setZero(n, n);
  m.fuel_g.setZero(n, n);
  m.dist_m.setZero(n, n);
  m.next_hop.setConstant(n, n, -1);

  Eigen::MatrixXd d(n, n);
  for (int s = 0; s < n; ++s) {
    std::vector<double> ds = dist_from(net, s, metric, fuel);
    for (int t = 0; t < n; ++t) {
      if (!std::isfinite(ds[t]))
        throw UnreachableDestination("all_pairs_costs: disconnected pair");
      d(s, t) = ds[t];
    }
  }

  // next_hop(i,j): smallest-id out-neighbor of i on an optimal i->j path.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      int best = -1;
      for (int e : net.out_edges(i)) {
        int u = net.edge(e).to;
        if (on_optimal(net.edge_weight(e, metric, fuel) + d(u, j), d(i, j))) {
          if (best == -1 || net.node(u).id < net.node(best).id) best = u;
        }
      }
      m.next_hop(i, j) = best;
    }
  }

  // Companion costs along the reconstructed route.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double t = 0, f = 0, len = 0;
      int v = i;
      while (v != j) {
        int u = m.next_hop(v, j);
        int e = net.edge_between(v, u);
        const NetEdge& ed = net.edge(e);
        t += ed.length_m / ed.speed_mps;
        f += edge_fuel(fuel, ed.length_m, ed.speed_mps);
        len += ed.length_m;
        v = u;
      }
      m.cost(i, j) = d(i, j);
      m.time_s(i, j) = t;
      m.fuel_g(i, j) = f;
      m.dist_m(i, j) = len;
    }
  }
  return m;
}

namespace {

PartitionSet finalize_partitions(const RoadNetwork& net, std::vector<int> part, int k) {
  PartitionSet ps;
  ps.partition_of = std::move(part);
  ps.members.resize(k);
  for (int v = 0; v < net.node_count(); ++v) ps.members[ps.partition_of[v]].push_back(v);

  ps.centers.resize(k, -1);
  for (int p = 0; p < k; ++p) {
    if (ps.members[p].empty()) throw Error("partition_network: empty partition");
    double best = kInf;
    for (int cand : ps.members[p]) {
      double sum = 0;
      for (int v : ps.members[p]) {
        double dx = net.node(cand).x - net.node(v).x;
        double dy = net.node(cand).y - net.node(v).y;
        sum += std::sqrt(dx * dx + dy * dy);
      }
      if (sum < best - 1e-12 ||
          (sum < best + 1e-12 && (ps.centers[p] == -1 || net.node(cand).id < net.node(ps.centers[p]).id))) {
        best = sum;
        ps.centers[p] = cand;
      }
    }
  }

  std::vector<std::vector<char>> adj(k, std::vector<char>(k, 0));
  for (int e = 0; e < net.edge_count(); ++e) {
    int a = ps.partition_of[net.edge(e).from];
    int b = ps.partition_of[net.edge(e).to];
    if (a != b) adj[a][b] = adj[b][a] = 1;
  }
  ps.adjacency.resize(k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      if (adj[a][b]) ps.adjacency[a].push_back(b);
  return ps;
}

// Grid assignment with gx*gy = k cells over the bounding box; returns empty
// vector if any cell ends up without nodes.
std::vector<int> try_grid(const RoadNetwork& net, int gx, int gy) {
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (int v = 0; v < net.node_count(); ++v) {
    xmin = std::min(xmin, net.node(v).x);
    xmax = std::max(xmax, net.node(v).x);
    ymin = std::min(ymin, net.node(v).y);
    ymax = std::max(ymax, net.node(v).y);
  }
  double w = std::max(xmax - xmin, 1e-9), h = std::max(ymax - ymin, 1e-9);
  std::vector<int> part(net.node_count());
  std::vector<int> counts(gx * gy, 0);
  for (int v = 0; v < net.node_count(); ++v) {
    int cx = std::min(gx - 1, static_cast<int>((net.node(v).x - xmin) / w * gx));
    int cy = std::min(gy - 1, static_cast<int>((net.node(v).y - ymin) / h * gy));
    part[v] = cy * gx + cx;
    ++counts[part[v]];
  }
  for (int c : counts)
    if (c == 0) return {};
  return part;
}

}  // namespace

PartitionSet partition_network(const RoadNetwork& net, int k) {
  const int n = net.node_count();
  if (k < 1 || k > n) throw InvalidK("partition_network: k out of range");

  if (k == 1) return finalize_partitions(net, std::vector<int>(n, 0), 1);

  // Prefer a grid factorization with cells close to square; fall back to
  // deterministic Lloyd iterations when no factorization keeps all cells
  // non-empty (e.g. k == n).
  double xspan = 0, yspan = 0;
  {
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (int v = 0; v < n; ++v) {
      xmin = std::min(xmin, net.node(v).x);
      xmax = std::max(xmax, net.node(v).x);
      ymin = std::min(ymin, net.node(v).y);
      ymax = std::max(ymax, net.node(v).y);
    }
    xspan = std::max(xmax - xmin, 1e-9);
    yspan = std::max(ymax - ymin, 1e-9);
  }
  double best_score = kInf;
  std::vector<int> best_part;
  for (int gx = 1; gx <= k; ++gx) {
    if (k % gx != 0) continue;
    int gy = k / gx;
    double cw = xspan / gx, ch = yspan / gy;
    double score = std::max(cw / ch, ch / cw);
    if (score < best_score) {
      std::vector<int> part = try_grid(net, gx, gy);
      if (!part.empty()) {
        best_score = score;
        best_part = std::move(part);
      }
    }
  }
  if (!best_part.empty()) return finalize_partitions(net, best_part, k);

  // Lloyd k-means on coordinates: seed centers by stride over id-sorted
  // nodes, steal the farthest node for empty clusters.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return net.node(a).id < net.node(b).id; });
  std::vector<double> cx(k), cy(k);
  for (int p = 0; p < k; ++p) {
    int v = order[static_cast<long long>(p) * n / k];
    cx[p] = net.node(v).x;
    cy[p] = net.node(v).y;
  }
  std::vector<int> part(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      int best = 0;
      double bd = kInf;
      for (int p = 0; p < k; ++p) {
        double dx = net.node(v).x - cx[p], dy = net.node(v).y - cy[p];
        double d2 = dx * dx + dy * dy;
        if (d2 < bd - 1e-12) {
          bd = d2;
          best = p;
        }
      }
      if (part[v] != best) {
        part[v] = best;
        changed = true;
      }
    }
    std::vector<int> cnt(k, 0);
    std::vector<double> sx(k, 0), sy(k, 0);
    for (int v = 0; v < n; ++v) {
      ++cnt[part[v]];
      sx[part[v]] += net.node(v).x;
      sy[part[v]] += net.node(v).y;
    }
    for (int p = 0; p < k; ++p) {
      if (cnt[p] == 0) {
        // steal the node farthest from its own center
        int far = -1;
        double fd = -1;
        for (int v = 0; v < n; ++v) {
          if (cnt[part[v]] <= 1) continue;
          double dx = net.node(v).x - cx[part[v]], dy = net.node(v).y - cy[part[v]];
          double d2 = dx * dx + dy * dy;
          if (d2 > fd) {
            fd = d2;
            far = v;
          }
        }
        if (far < 0) throw Error("partition_network: cannot fill empty partition");
        --cnt[part[far]];
        sx[part[far]] -= net.node(far).x;
        sy[part[far]] -= net.node(far).y;
        part[far] = p;
        cnt[p] = 1;
        sx[p] = net.node(far).x;
        sy[p] = net.node(far).y;
        changed = true;
      }
    }
    for (int p = 0; p < k; ++p) {
      cx[p] = sx[p] / cnt[p];
      cy[p] = sy[p] / cnt[p];
    }
    if (!changed) break;
  }
  return finalize_partitions(net, part, k);
}

// --- I/O ---

RoadNetwork load_network_csv(const std::string& node_file, const std::string& edge_file) {
  auto open = [](const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return f;
  };
  std::vector<NetNode> nodes;
  std::vector<NetEdge> edges;
  std::string line;
  {
    std::ifstream f = open(node_file);
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#' || line.rfind("id", 0) == 0) continue;
      NetNode nd{};
      char c;
      std::istringstream ss(line);
      if (!(ss >> nd.id >> c >> nd.x >> c >> nd.y))
        throw IoError(node_file + ": bad node at line " + std::to_string(lineno));
      nodes.push_back(nd);
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](auto& a, auto& b) { return a.id < b.id; });
  std::vector<int> id2idx;
  {
    int maxid = 0;
    for (auto& nd : nodes) maxid = std::max(maxid, nd.id);
    id2idx.assign(maxid + 1, -1);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) id2idx[nodes[i].id] = i;
  }
  {
    std::ifstream f = open(edge_file);
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#' || line.rfind("id", 0) == 0) continue;
      NetEdge ed{};
      int from_id, to_id;
      char c;
      std::istringstream ss(line);
      if (!(ss >> ed.id >> c >> from_id >> c >> to_id >> c >> ed.length_m >> c >>
            ed.speed_mps >> c >> ed.lanes))
        throw IoError(edge_file + ": bad edge at line " + std::to_string(lineno));
      if (from_id >= static_cast<int>(id2idx.size()) || id2idx[from_id] < 0 ||
          to_id >= static_cast<int>(id2idx.size()) || id2idx[to_id] < 0)
        throw IoError(edge_file + ": unknown node id at line " + std::to_string(lineno));
      ed.from = id2idx[from_id];
      ed.to = id2idx[to_id];
      edges.push_back(ed);
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

void save_network_csv(const RoadNetwork& net, const std::string& node_file,
                      const std::string& edge_file) {
  std::ofstream nf(node_file);
  if (!nf) throw IoError("cannot write " + node_file);
  nf.precision(17);  // lossless double round trip
  nf << "id,x,y\n";
  for (int i = 0; i < net.node_count(); ++i) {
    const NetNode& nd = net.node(i);
    nf << nd.id << "," << nd.x << "," << nd.y << "\n";
  }
  std::ofstream ef(edge_file);
  if (!ef) throw IoError("cannot write " + edge_file);
  ef.precision(17);
  ef << "id,from,to,length_m,speed_mps,lanes\n";
  for (int e = 0; e < net.edge_count(); ++e) {
    const NetEdge& ed = net.edge(e);
    ef << ed.id << "," << net.node(ed.from).id << "," << net.node(ed.to).id << ","
       << ed.length_m << "," << ed.speed_mps << "," << ed.lanes << "\n";
  }
}

RoadNetwork make_grid_network(const GridNetworkParams& p, unsigned long long seed) {
  std::vector<NetNode> nodes;
  nodes.reserve(p.nx * p.ny);
  for (int y = 0; y < p.ny; ++y)
    for (int x = 0; x < p.nx; ++x)
      nodes.push_back({y * p.nx + x, x * p.spacing_m, y * p.spacing_m});

  double cxm = (p.nx - 1) * p.spacing_m / 2.0;
  double cym = (p.ny - 1) * p.spacing_m / 2.0;
  double rmax = std::sqrt(cxm * cxm + cym * cym);

  std::mt19937_64 rng(seed);
  auto unif = [&rng]() { return (rng() >> 11) * (1.0 / 9007199254740992.0); };

  std::vector<NetEdge> edges;
  int eid = 0;
  auto add_pair = [&](int a, int b, bool arterial) {
    const NetNode& na = nodes[a];
    const NetNode& nb = nodes[b];
    double len = std::abs(na.x - nb.x) + std::abs(na.y - nb.y);
    double posted = arterial ? p.arterial_speed_mps : p.posted_speed_mps;
    double mx = (na.x + nb.x) / 2 - cxm, my = (na.y + nb.y) / 2 - cym;
    double rho = p.center_density * (1.0 - std::sqrt(mx * mx + my * my) / std::max(rmax, 1e-9));
    double vn = mean_speed(p.speed_density, std::max(rho, 0.0));
    double jitter = 1.0 + p.seed_jitter * (2.0 * unif() - 1.0);
    double speed = std::max(1.0, posted * vn * jitter);
    int lanes = arterial ? p.arterial_lanes : p.lanes;
    edges.push_back({eid++, a, b, len, speed, lanes});
    edges.push_back({eid++, b, a, len, speed, lanes});
  };
  for (int y = 0; y < p.ny; ++y) {
    for (int x = 0; x < p.nx; ++x) {
      int v = y * p.nx + x;
      if (x + 1 < p.nx) add_pair(v, v + 1, p.arterial_every > 0 && y % p.arterial_every == 0);
      if (y + 1 < p.ny) add_pair(v, v + p.nx, p.arterial_every > 0 && x % p.arterial_every == 0);
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

}  // namespace ecomod
