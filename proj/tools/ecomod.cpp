// ecomod CLI: scenario generation, sweep runs, OD-flow calibration.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecomod/calibration.hpp"
#include "ecomod/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ecomod;

namespace {

// Origin weight grows with distance from the network centroid, destination
// weight shrinks with it: periphery-to-center demand creates both sharing
// opportunity and rebalancing pressure.
void demand_densities(const RoadNetwork& net, const PartitionSet& ps,
                      std::vector<double>& origin, std::vector<double>& dest) {
  double cx = 0, cy = 0;
  for (int i = 0; i < net.node_count(); ++i) {
    cx += net.node(i).x;
    cy += net.node(i).y;
  }
  cx /= net.node_count();
  cy /= net.node_count();
  double maxd = 1e-9;
  std::vector<double> d(ps.count());
  for (int k = 0; k < ps.count(); ++k) {
    const NetNode& c = net.node(ps.centers[k]);
    d[k] = std::hypot(c.x - cx, c.y - cy);
    maxd = std::max(maxd, d[k]);
  }
  origin.resize(ps.count());
  dest.resize(ps.count());
  double so = 0, sd = 0;
  for (int k = 0; k < ps.count(); ++k) {
    origin[k] = 0.5 + d[k] / maxd;
    dest[k] = 1.5 - d[k] / maxd;
    so += origin[k];
    sd += dest[k];
  }
  for (int k = 0; k < ps.count(); ++k) {
    origin[k] /= so;
    dest[k] /= sd;
  }
}

int cmd_gen(int nx, int ny, int partitions, double requests_per_hour, double horizon_s,
            double max_wait_s, double max_delay_s, uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  GridNetworkParams gp;
  gp.nx = nx;
  gp.ny = ny;
  RoadNetwork net = make_grid_network(gp, seed);
  PartitionSet ps = partition_network(net, partitions);

  DemandModel dm;
  demand_densities(net, ps, dm.origin_density, dm.dest_density);
  dm.lambda_per_s.resize(partitions);
  double total = requests_per_hour / 3600.0;
  for (int k = 0; k < partitions; ++k) dm.lambda_per_s[k] = total * dm.origin_density[k];
  dm.max_wait_s = max_wait_s;
  dm.max_delay_s = max_delay_s;
  dm.validate(partitions);

  std::vector<TravelRequest> reqs = generate_requests(dm, ps, horizon_s, 1.0, seed);

  std::string nodes = out_dir + "/nodes.csv";
  std::string edges = out_dir + "/edges.csv";
  std::string requests = out_dir + "/requests.csv";
  save_network_csv(net, nodes, edges);
  save_requests_csv(reqs, requests);

  json cfg;
  cfg["network"] = {{"nodes", "nodes.csv"}, {"edges", "edges.csv"}};
  cfg["requests"] = "requests.csv";
  cfg["partitions"] = partitions;
  FuelModel fm;
  cfg["fuel"] = {{"a", fm.a}, {"b", fm.b}, {"c", fm.c}};
  cfg["demand"] = {{"lambda_per_s", dm.lambda_per_s},
                   {"origin_density", dm.origin_density},
                   {"dest_density", dm.dest_density},
                   {"max_wait_s", dm.max_wait_s},
                   {"max_delay_s", dm.max_delay_s}};
  cfg["sim"] = {{"assign_interval_s", 30.0}, {"warmup_s", horizon_s / 3.0},
                {"horizon_s", horizon_s},    {"cohort_tail_s", 1200.0},
                {"capacity", 4},             {"rebalance_horizon", 5},
                {"cost_weight", 0.5},        {"sharing_discount", 0.8},
                {"onboard_weight", 1.0}};
  std::ofstream f(out_dir + "/scenario.json");
  if (!f) throw IoError("cannot write scenario.json");
  f << cfg.dump(2) << "\n";
  std::cout << "wrote " << out_dir << "/{nodes,edges,requests}.csv and scenario.json ("
            << net.node_count() << " nodes, " << reqs.size() << " requests)\n";
  return 0;
}

struct Scenario {
  RoadNetwork net;
  RoutingCosts costs;
  PartitionSet partitions;
  FuelModel fuel;
  std::vector<TravelRequest> requests;
  std::vector<double> lambda_per_s, origin_density;
  SimConfig defaults;
};

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  json cfg = json::parse(f);
  fs::path base = fs::path(path).parent_path();
  auto rel = [&](const std::string& p) { return (base / p).string(); };

  Scenario s{load_network_csv(rel(cfg["network"]["nodes"]), rel(cfg["network"]["edges"])),
             {}, {}, {}, {}, {}, {}, {}};
  if (cfg.contains("fuel")) {
    s.fuel.a = cfg["fuel"].value("a", s.fuel.a);
    s.fuel.b = cfg["fuel"].value("b", s.fuel.b);
    s.fuel.c = cfg["fuel"].value("c", s.fuel.c);
  }
  s.costs = RoutingCosts::build(s.net, s.fuel);
  s.partitions = partition_network(s.net, cfg.value("partitions", 9));
  s.requests = load_requests_csv(rel(cfg["requests"]));
  s.lambda_per_s = cfg["demand"]["lambda_per_s"].get<std::vector<double>>();
  s.origin_density = cfg["demand"]["origin_density"].get<std::vector<double>>();

  if (cfg.contains("sim")) {
    const json& j = cfg["sim"];
    SimConfig& d = s.defaults;
    d.assign_interval_s = j.value("assign_interval_s", d.assign_interval_s);
    d.warmup_s = j.value("warmup_s", d.warmup_s);
    d.horizon_s = j.value("horizon_s", d.horizon_s);
    d.cohort_tail_s = j.value("cohort_tail_s", d.cohort_tail_s);
    d.capacity = j.value("capacity", d.capacity);
    d.rebalance_horizon = j.value("rebalance_horizon", d.rebalance_horizon);
    d.cost_weight = j.value("cost_weight", d.cost_weight);
    d.sharing_discount = j.value("sharing_discount", d.sharing_discount);
    d.onboard_weight = j.value("onboard_weight", d.onboard_weight);
  }
  return s;
}

struct Cell {
  int configuration, fleet;
  std::vector<MetricsReport> reports;
};

int cmd_run(const std::string& config_path, std::vector<int> configurations,
            std::vector<int> fleet_sizes, std::vector<uint64_t> seeds,
            const std::string& output, double interval, double horizon,
            const std::string& events_dir) {
  Scenario sc = load_scenario(config_path);
  std::string name = fs::path(config_path).parent_path().filename().string();
  if (name.empty()) name = "scenario";

  ScenarioInputs in;
  in.net = &sc.net;
  in.costs = &sc.costs;
  in.partitions = &sc.partitions;
  in.fuel = &sc.fuel;
  in.requests = sc.requests;
  in.lambda_per_s = sc.lambda_per_s;
  in.origin_density = sc.origin_density;

  std::ofstream out(output);
  if (!out) throw IoError("cannot write " + output);
  out << metrics_csv_header();

  // baseline fuel-per-customer per seed, for the delta column
  std::map<uint64_t, double> baseline;
  for (uint64_t seed : seeds) {
    SimConfig c = sc.defaults;
    c.configuration = 9;
    c.seed = seed;
    if (interval > 0) c.assign_interval_s = interval;
    if (horizon > 0) c.horizon_s = horizon;
    baseline[seed] = run_baseline(in, c).fuel_per_served_g;
  }

  int failures = 0;
  std::map<std::pair<int, int>, Cell> cells;
  for (int cfg_id : configurations) {
    for (int fleet : fleet_sizes) {
      for (uint64_t seed : seeds) {
        SimConfig c = sc.defaults;
        c.configuration = cfg_id;
        c.fleet_size = fleet;
        c.seed = seed;
        if (interval > 0) c.assign_interval_s = interval;
        if (horizon > 0) c.horizon_s = horizon;
        try {
          EventLog log;
          MetricsReport r = run_scenario(in, c, events_dir.empty() ? nullptr : &log);
          double b = baseline[seed];
          if (b > 0) r.baseline_fuel_delta = (r.fuel_per_served_g - b) / b;
          out << metrics_csv_row(name, cfg_id, fleet, seed, r);
          auto& cell = cells[{cfg_id, fleet}];
          cell.configuration = cfg_id;
          cell.fleet = fleet;
          cell.reports.push_back(r);
          if (!events_dir.empty()) {
            fs::create_directories(events_dir);
            char fn[128];
            std::snprintf(fn, sizeof(fn), "/events_c%d_f%d_s%llu.jsonl", cfg_id, fleet,
                          static_cast<unsigned long long>(seed));
            log.write_jsonl(events_dir + fn);
          }
        } catch (const std::exception& e) {
          ++failures;
          std::cerr << "run failed (configuration=" << cfg_id << " fleet=" << fleet
                    << " seed=" << seed << "): " << e.what() << "\n";
        }
      }
    }
  }

  // aggregate: mean and 25th/75th percentile per configuration x fleet cell
  std::string agg_path = output;
  size_t dot = agg_path.rfind('.');
  agg_path.insert(dot == std::string::npos ? agg_path.size() : dot, "_aggregate");
  std::ofstream agg(agg_path);
  agg << "# ecomod aggregate schema v1\n"
         "scenario,configuration,fleet_size,runs,metric,mean,p25,p75\n";
  auto emit = [&](const Cell& c, const char* metric, auto get) {
    std::vector<double> v;
    for (const MetricsReport& r : c.reports) v.push_back(get(r));
    std::sort(v.begin(), v.end());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    auto q = [&](double p) {
      double pos = p * (v.size() - 1);
      size_t i = static_cast<size_t>(pos);
      double fr = pos - i;
      return i + 1 < v.size() ? v[i] * (1 - fr) + v[i + 1] * fr : v[i];
    };
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%zu,%s,%.6f,%.6f,%.6f\n", name.c_str(),
                  c.configuration, c.fleet, v.size(), metric, mean, q(0.25), q(0.75));
    agg << buf;
  };
  for (const auto& [key, cell] : cells) {
    if (cell.reports.empty()) continue;
    emit(cell, "served_ratio", [](const MetricsReport& r) { return r.served_within_constraints_ratio; });
    emit(cell, "mean_wait_s", [](const MetricsReport& r) { return r.mean_wait_s; });
    emit(cell, "mean_delay_s", [](const MetricsReport& r) { return r.mean_delay_s; });
    emit(cell, "fleet_fuel_g", [](const MetricsReport& r) { return r.fleet_fuel_g; });
    emit(cell, "fuel_per_served_g", [](const MetricsReport& r) { return r.fuel_per_served_g; });
    emit(cell, "empty_distance_ratio", [](const MetricsReport& r) { return r.empty_distance_ratio; });
    emit(cell, "assigned_per_running", [](const MetricsReport& r) { return r.mean_assigned_per_running; });
    emit(cell, "onboard_per_running", [](const MetricsReport& r) { return r.mean_onboard_per_running; });
    emit(cell, "baseline_fuel_delta", [](const MetricsReport& r) { return r.baseline_fuel_delta; });
  }
  std::cout << "wrote " << output << " and " << agg_path << "\n";
  return failures == 0 ? 0 : 1;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, size_t min_cols) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (lineno == 1 && !cols.empty() && !isdigit(cols[0].empty() ? 'x' : cols[0][0]) &&
        cols[0][0] != '-')
      continue;  // header
    if (cols.size() < min_cols)
      throw IoError(path + ": line " + std::to_string(lineno) + ": expected at least " +
                    std::to_string(min_cols) + " columns");
    rows.push_back(std::move(cols));
  }
  return rows;
}

int cmd_calibrate(const std::string& speeds_path, const std::string& routes_path,
                  const std::string& prior_path, const std::string& output, double psi,
                  const SpeedDensityModel& sd) {
  // speeds: link,normalized_speed,free_flow_mps,lanes
  auto speed_rows = read_csv(speeds_path, 4);
  int n_links = 0;
  std::map<int, double> flow;
  for (const auto& r : speed_rows) {
    LinkSpeedSample s{std::stoi(r[0]), std::stod(r[1]), std::stod(r[2]), std::stoi(r[3])};
    flow[s.link] = link_flow_from_speed(s, sd);
    n_links = std::max(n_links, s.link + 1);
  }

  // routes: od,route_type(d|t),link
  auto route_rows = read_csv(routes_path, 3);
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> routes;
  for (const auto& r : route_rows) {
    int od = std::stoi(r[0]);
    int link = std::stoi(r[2]);
    n_links = std::max(n_links, link + 1);
    if (r[1] == "d")
      routes[od].first.push_back(link);
    else if (r[1] == "t")
      routes[od].second.push_back(link);
    else
      throw IoError(routes_path + ": route type must be 'd' or 't'");
  }

  // prior: od,flow
  auto prior_rows = read_csv(prior_path, 2);
  std::map<int, double> prior;
  for (const auto& r : prior_rows) prior[std::stoi(r[0])] = std::stod(r[1]);

  ODFlowProblem p;
  p.n_links = n_links;
  p.regularization = psi;
  std::vector<int> od_ids;
  for (const auto& [od, rr] : routes) {
    od_ids.push_back(od);
    p.dist_route_links.push_back(rr.first);
    p.time_route_links.push_back(rr.second);
    auto it = prior.find(od);
    p.prior_flow.push_back(it == prior.end() ? 0.0 : it->second);
  }
  p.target_link_flow.assign(n_links, 0.0);
  for (const auto& [l, q] : flow) p.target_link_flow[l] = q;

  ODFlowSolution sol = calibrate_od_flows(p);
  std::ofstream f(output);
  if (!f) throw IoError("cannot write " + output);
  f << "# ecomod calibrated OD flows schema v1\nod,dist_flow,time_flow,total_flow\n";
  char buf[128];
  for (size_t i = 0; i < od_ids.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f\n", od_ids[i], sol.flow_dist[i],
                  sol.flow_time[i], sol.flow_dist[i] + sol.flow_time[i]);
    f << buf;
  }
  std::cout << "wrote " << output << " (" << od_ids.size() << " OD pairs, objective "
            << sol.objective << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eco-mobility-on-demand fleet dispatch toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic grid scenario");
  int nx = 20, ny = 20, partitions = 9;
  double req_per_h = 600, horizon = 7200, max_wait = 300, max_delay = 300;
  uint64_t gen_seed = 1;
  std::string out_dir = "scenario";
  gen->add_option("--nx", nx, "grid columns");
  gen->add_option("--ny", ny, "grid rows");
  gen->add_option("--partitions", partitions, "partition count");
  gen->add_option("--demand", req_per_h, "requests per hour");
  gen->add_option("--horizon", horizon, "horizon in seconds");
  gen->add_option("--max-wait", max_wait, "max wait seconds");
  gen->add_option("--max-delay", max_delay, "max delay seconds");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--output", out_dir, "output directory");

  // run
  auto* run = app.add_subcommand("run", "run configuration sweeps");
  std::string config_path, run_out = "metrics.csv", events_dir;
  std::vector<int> cfg_ids, fleets;
  std::vector<uint64_t> seeds;
  double interval = -1, run_horizon = -1;
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--configuration", cfg_ids, "configuration id(s) 1-9");
  run->add_option("--fleet-size", fleets, "fleet size(s)");
  run->add_option("--seed", seeds, "seed(s)");
  run->add_option("--output", run_out, "metrics CSV path");
  run->add_option("--interval", interval, "assignment interval override (s)");
  run->add_option("--horizon", run_horizon, "horizon override (s)");
  run->add_option("--events", events_dir, "directory for per-run event logs");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "estimate OD flows from link speeds");
  std::string speeds, routes, prior, cal_out = "od_flows.csv";
  double psi = 0.1;
  SpeedDensityModel sd;
  sd.alpha2 = -30.0;
  sd.alpha1 = -8.0;
  cal->add_option("--speeds", speeds, "link speeds CSV (link,v_norm,v_free,lanes)")->required();
  cal->add_option("--routes", routes, "route links CSV (od,type d|t,link)")->required();
  cal->add_option("--prior", prior, "prior OD flow CSV (od,flow)")->required();
  cal->add_option("--output", cal_out, "output CSV path");
  cal->add_option("--psi", psi, "prior regularization weight");
  cal->add_option("--alpha2", sd.alpha2, "speed-density quadratic coefficient");
  cal->add_option("--alpha1", sd.alpha1, "speed-density linear coefficient");
  cal->add_option("--alpha0", sd.alpha0, "speed-density constant coefficient");
  cal->add_option("--eps", sd.eps, "congested speed floor (normalized)");
  cal->add_option("--rho-critical", sd.rho_critical, "critical density");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed())
      return cmd_gen(nx, ny, partitions, req_per_h, horizon, max_wait, max_delay, gen_seed,
                     out_dir);
    if (run->parsed()) {
      if (cfg_ids.empty()) cfg_ids = {1};
      if (fleets.empty()) fleets = {60};
      if (seeds.empty()) seeds = {1};
      return cmd_run(config_path, cfg_ids, fleets, seeds, run_out, interval, run_horizon,
                     events_dir);
    }
    if (cal->parsed()) return cmd_calibrate(speeds, routes, prior, cal_out, psi, sd);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
