#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecomod/errors.hpp"
#include "ecomod/network.hpp"

namespace ecomod {

struct TravelRequest {
  int id = -1;
  int origin = -1;
  int dest = -1;
  double request_time_s = 0;
  double max_wait_s = 300;
  double max_delay_s = 300;
};

struct DemandModel {
  std::vector<double> lambda_per_s;     // per-partition departure rate
  std::vector<double> origin_density;   // sums to 1
  std::vector<double> dest_density;     // global categorical, sums to 1
  double max_wait_s = 300;
  double max_delay_s = 300;

  double total_rate() const;
  void validate(int partitions) const;
};

std::vector<TravelRequest> generate_requests(const DemandModel& model,
                                             const PartitionSet& partitions,
                                             double horizon_s, double demand_ratio,
                                             uint64_t seed);

enum class RequestState { Waiting, Assigned, Onboard, Completed, Rejected };
enum class PoolEvent { Assign, Unassign, Pickup, Reject, Complete };

class CustomerPool {
 public:
  void add(const TravelRequest& r);
  void update(int request_id, PoolEvent event);
  RequestState state(int request_id) const;
  const TravelRequest& request(int request_id) const;
  bool contains(int request_id) const;

  // Waiting or assigned-but-not-picked-up.
  std::vector<int> pending() const;
  std::vector<int> with_state(RequestState s) const;
  int count(RequestState s) const;
  int size() const { return static_cast<int>(entries_.size()); }

 private:
  struct Entry {
    TravelRequest req;
    RequestState state = RequestState::Waiting;
  };
  std::map<int, Entry> entries_;
};

std::vector<TravelRequest> load_requests_csv(const std::string& path);
void save_requests_csv(const std::vector<TravelRequest>& reqs, const std::string& path);

}  // namespace ecomod
