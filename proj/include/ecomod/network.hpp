#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecomod/errors.hpp"
#include "ecomod/fuel.hpp"

namespace ecomod {

enum class Metric { Time, Fuel, Distance };

struct NetNode {
  int id;
  double x, y;  // planar meters
};

struct NetEdge {
  int id;
  int from, to;       // node indices, not ids
  double length_m;
  double speed_mps;   // operating mean speed
  int lanes;
};

class RoadNetwork {
 public:
  RoadNetwork(std::vector<NetNode> nodes, std::vector<NetEdge> edges);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const NetNode& node(int i) const { return nodes_[i]; }
  const NetEdge& edge(int i) const { return edges_[i]; }
  const std::vector<int>& out_edges(int node) const { return out_[node]; }
  const std::vector<int>& in_edges(int node) const { return in_[node]; }

  // Directed edge index from->to, or -1.
  int edge_between(int from, int to) const;

  double edge_weight(int edge, Metric metric, const FuelModel& fuel) const;

  bool strongly_connected() const;

 private:
  std::vector<NetNode> nodes_;
  std::vector<NetEdge> edges_;
  std::vector<std::vector<int>> out_, in_;
};

struct Route {
  std::vector<int> nodes;  // empty when origin == dest
  double time_s = 0;
  double fuel_g = 0;
  double distance_m = 0;
};

// Optimal-route costs for one metric plus the companion costs of the same
// route under the other metrics. next_hop(i,j) reconstructs the
// lexicographically smallest optimal path.
struct CostMatrix {
  Metric metric = Metric::Time;
  Eigen::MatrixXd cost;
  Eigen::MatrixXd time_s;
  Eigen::MatrixXd fuel_g;
  Eigen::MatrixXd dist_m;
  Eigen::MatrixXi next_hop;

  std::vector<int> path(int origin, int dest) const;
};

Route shortest_path(const RoadNetwork& net, int origin, int dest, Metric metric,
                    const FuelModel& fuel = {});

CostMatrix all_pairs_costs(const RoadNetwork& net, Metric metric,
                           const FuelModel& fuel = {});

struct PartitionSet {
  std::vector<int> partition_of;            // node index -> partition id
  std::vector<int> centers;                 // partition id -> node index
  std::vector<std::vector<int>> members;    // partition id -> node indices
  std::vector<std::vector<int>> adjacency;  // partition id -> adjacent ids

  int count() const { return static_cast<int>(centers.size()); }
};

PartitionSet partition_network(const RoadNetwork& net, int k);

// --- file I/O and synthetic generation ---

RoadNetwork load_network_csv(const std::string& node_file, const std::string& edge_file);
void save_network_csv(const RoadNetwork& net, const std::string& node_file,
                      const std::string& edge_file);

struct GridNetworkParams {
  int nx = 20, ny = 20;
  double spacing_m = 250.0;
  double posted_speed_mps = 12.0;   // local streets
  double arterial_speed_mps = 17.0; // every arterial_every-th row/column
  int arterial_every = 5;
  int lanes = 1;
  int arterial_lanes = 2;
  // Heterogeneous operating speeds are synthesized from the speed-density
  // model: density rises toward the network center.
  SpeedDensityModel speed_density{-30.0, -8.0, 1.0, 0.1, 0.06};
  double center_density = 0.05;  // veh/m/lane at the center
  double seed_jitter = 0.05;     // relative speed jitter
};

RoadNetwork make_grid_network(const GridNetworkParams& params, unsigned long long seed);

}  // namespace ecomod
