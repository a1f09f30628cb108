#include "ecomod/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ecomod {

double DemandModel::total_rate() const {
  double s = 0;
  for (double l : lambda_per_s) s += l;
  return s;
}

void DemandModel::validate(int partitions) const {
  auto check_density = [](const std::vector<double>& d, const char* name) {
    double s = 0;
    for (double v : d) {
      if (v < 0) throw Error(std::string("DemandModel: negative ") + name);
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(std::string("DemandModel: ") + name + " must sum to 1");
  };
  if (static_cast<int>(lambda_per_s.size()) != partitions ||
      static_cast<int>(origin_density.size()) != partitions ||
      static_cast<int>(dest_density.size()) != partitions)
    throw Error("DemandModel: size mismatch with partition count");
  for (double l : lambda_per_s)
    if (l < 0) throw Error("DemandModel: negative rate");
  check_density(origin_density, "origin density");
  check_density(dest_density, "destination density");
}

namespace {

// Hand-rolled sampling keeps the stream identical across standard libraries.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(uint64_t seed) : gen(seed) {}
  double unif() { return (gen() >> 11) * (1.0 / 9007199254740992.0); }
  double exp(double rate) { return -std::log1p(-unif()) / rate; }
  int categorical(const std::vector<double>& w, double wsum) {
    double u = unif() * wsum;
    double acc = 0;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }
};

}  // namespace

std::vector<TravelRequest> generate_requests(const DemandModel& model,
                                             const PartitionSet& partitions,
                                             double horizon_s, double demand_ratio,
                                             uint64_t seed) {
  if (horizon_s <= 0) throw Error("generate_requests: horizon must be > 0");
  if (demand_ratio <= 0 || demand_ratio > 1) throw Error("generate_requests: bad demand ratio");
  model.validate(partitions.count());

  std::vector<TravelRequest> out;
  double rate = demand_ratio * model.total_rate();
  if (rate <= 0) return out;

  Rng rng(seed);
  double osum = 0, dsum = 0;
  for (double v : model.origin_density) osum += v;
  for (double v : model.dest_density) dsum += v;

  double t = rng.exp(rate);
  int id = 0;
  while (t < horizon_s) {
    TravelRequest r;
    r.id = id++;
    r.request_time_s = t;
    r.max_wait_s = model.max_wait_s;
    r.max_delay_s = model.max_delay_s;

    int op = rng.categorical(model.origin_density, osum);
    const auto& onodes = partitions.members[op];
    if (onodes.empty()) throw EmptyPartition("generate_requests: sampled empty partition");
    r.origin = onodes[static_cast<int>(rng.unif() * onodes.size()) % onodes.size()];

    for (int tries = 0;; ++tries) {
      int dp = rng.categorical(model.dest_density, dsum);
      const auto& dnodes = partitions.members[dp];
      if (dnodes.empty()) throw EmptyPartition("generate_requests: sampled empty partition");
      r.dest = dnodes[static_cast<int>(rng.unif() * dnodes.size()) % dnodes.size()];
      if (r.dest != r.origin) break;
      if (tries > 1000) throw Error("generate_requests: cannot sample distinct destination");
    }
    out.push_back(r);
    t += rng.exp(rate);
  }
  return out;
}

void CustomerPool::add(const TravelRequest& r) {
  if (entries_.count(r.id)) throw Error("CustomerPool: duplicate request id");
  entries_[r.id] = {r, RequestState::Waiting};
}

void CustomerPool::update(int request_id, PoolEvent event) {
  auto it = entries_.find(request_id);
  if (it == entries_.end()) throw IllegalTransition("CustomerPool: unknown request");
  RequestState& s = it->second.state;
  switch (event) {
    case PoolEvent::Assign:
      if (s != RequestState::Waiting && s != RequestState::Assigned)
        throw IllegalTransition("assign: request not waiting");
      s = RequestState::Assigned;
      return;
    case PoolEvent::Unassign:
      if (s != RequestState::Assigned) throw IllegalTransition("unassign: request not assigned");
      s = RequestState::Waiting;
      return;
    case PoolEvent::Pickup:
      if (s != RequestState::Waiting && s != RequestState::Assigned)
        throw IllegalTransition("pickup: request not pending");
      s = RequestState::Onboard;
      return;
    case PoolEvent::Reject:
      if (s != RequestState::Waiting && s != RequestState::Assigned)
        throw IllegalTransition("reject: request not pending");
      s = RequestState::Rejected;
      return;
    case PoolEvent::Complete:
      if (s != RequestState::Onboard) throw IllegalTransition("complete: request not onboard");
      s = RequestState::Completed;
      return;
  }
}

RequestState CustomerPool::state(int request_id) const {
  auto it = entries_.find(request_id);
  if (it == entries_.end()) throw Error("CustomerPool: unknown request");
  return it->second.state;
}

const TravelRequest& CustomerPool::request(int request_id) const {
  auto it = entries_.find(request_id);
  if (it == entries_.end()) throw Error("CustomerPool: unknown request");
  return it->second.req;
}

bool CustomerPool::contains(int request_id) const { return entries_.count(request_id) > 0; }

std::vector<int> CustomerPool::pending() const {
  std::vector<int> ids;
  for (const auto& [id, e] : entries_)
    if (e.state == RequestState::Waiting || e.state == RequestState::Assigned)
      ids.push_back(id);
  return ids;
}

std::vector<int> CustomerPool::with_state(RequestState s) const {
  std::vector<int> ids;
  for (const auto& [id, e] : entries_)
    if (e.state == s) ids.push_back(id);
  return ids;
}

int CustomerPool::count(RequestState s) const {
  int n = 0;
  for (const auto& [id, e] : entries_)
    if (e.state == s) ++n;
  return n;
}

std::vector<TravelRequest> load_requests_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<TravelRequest> reqs;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("id", 0) == 0) continue;
    TravelRequest r;
    char c;
    std::istringstream ss(line);
    if (!(ss >> r.id >> c >> r.origin >> c >> r.dest >> c >> r.request_time_s >> c >>
          r.max_wait_s >> c >> r.max_delay_s))
      throw IoError(path + ": bad request at line " + std::to_string(lineno));
    reqs.push_back(r);
  }
  return reqs;
}

void save_requests_csv(const std::vector<TravelRequest>& reqs, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "id,origin,dest,t_request,max_wait,max_delay\n";
  f.precision(17);
  for (const auto& r : reqs)
    f << r.id << "," << r.origin << "," << r.dest << "," << r.request_time_s << ","
      << r.max_wait_s << "," << r.max_delay_s << "\n";
  return;
}

}  // namespace ecomod
