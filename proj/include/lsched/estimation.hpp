#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "lsched/model.hpp"

namespace lsched {

// Estimated busy times indexed by server id - 1.
using BusyVector = std::vector<SlotTime>;

struct ServerLoad {
  SlotTime busy = 0;
  int mu = 1;
};

// The narrowed search interval with the busy-time breakpoints falling inside
// it (deduplicated, ascending).
struct BoundsRange {
  SlotTime phi_lo = 0;
  SlotTime phi_hi = 0;
  std::vector<SlotTime> breakpoints;
};

// Half-open slot interval [lo, hi).
struct SlotInterval {
  SlotTime lo = 0;
  SlotTime hi = 0;
};

// Slots needed to drain one queue: per-job ceilings with same-job entries
// aggregated before the ceiling.
inline SlotTime busy_time(const std::vector<QueueEntry>& queue, const CapacityProfile& capacity,
                          ServerId server) {
  std::map<JobId, long long> outstanding;
  for (const auto& e : queue) outstanding[e.job_id] += e.remaining_tasks;
  SlotTime total = 0;
  for (const auto& [job, tasks] : outstanding) {
    if (tasks > 0) total += ceil_div(tasks, capacity.mu(server, job));
  }
  return total;
}

inline BusyVector busy_vector(const ClusterSnapshot& snapshot) {
  BusyVector b(static_cast<std::size_t>(snapshot.server_count), 0);
  for (ServerId m = 1; m <= snapshot.server_count; ++m) {
    b[static_cast<std::size_t>(m - 1)] = busy_time(snapshot.queue(m), snapshot.capacity, m);
  }
  return b;
}

// Smallest integer x with sum_m max{x - busy_m, 0} * mu_m >= demand.
inline SlotTime min_slots(long long demand, const std::vector<ServerLoad>& servers) {
  long long total_mu = 0;
  SlotTime max_busy = 0;
  for (const auto& s : servers) {
    total_mu += s.mu;
    max_busy = std::max(max_busy, s.busy);
  }
  auto capacity_at = [&](SlotTime x) {
    long long cap = 0;
    for (const auto& s : servers) {
      if (x > s.busy) cap += (x - s.busy) * s.mu;
    }
    return cap;
  };
  SlotTime lo = 0;
  SlotTime hi = max_busy + ceil_div(demand, total_mu);
  while (lo < hi) {
    SlotTime mid = lo + (hi - lo) / 2;
    if (capacity_at(mid) >= demand) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Upper completion-time bound: send each group whole to one server. Summing
// per-group ceilings (not one ceiling over the aggregated load) keeps the
// bound feasible for the slot program even with mixed rates.
inline SlotTime phi_upper(const Job& job, const BusyVector& busy,
                          const CapacityProfile& capacity) {
  std::set<ServerId> all_servers;
  for (const auto& g : job.groups) all_servers.insert(g.available_servers.begin(),
                                                      g.available_servers.end());
  SlotTime hi = 0;
  for (ServerId m : all_servers) {
    SlotTime slots = 0;
    for (const auto& g : job.groups) {
      if (std::binary_search(g.available_servers.begin(), g.available_servers.end(), m)) {
        slots += ceil_div(g.task_count, capacity.mu(m, job.id));
      }
    }
    hi = std::max(hi, slots + busy[static_cast<std::size_t>(m - 1)]);
  }
  return hi;
}

// Lower/upper completion-time bounds for a job against the given busy times,
// plus the busy-time breakpoints inside the interval.
inline BoundsRange phi_bounds(const Job& job, const BusyVector& busy,
                              const CapacityProfile& capacity) {
  std::set<ServerId> all_servers;
  for (const auto& g : job.groups) all_servers.insert(g.available_servers.begin(),
                                                      g.available_servers.end());

  BoundsRange r;
  r.phi_hi = phi_upper(job, busy, capacity);

  r.phi_lo = 0;
  for (const auto& g : job.groups) {
    std::vector<ServerLoad> loads;
    loads.reserve(g.available_servers.size());
    for (ServerId m : g.available_servers) {
      loads.push_back({busy[static_cast<std::size_t>(m - 1)], capacity.mu(m, job.id)});
    }
    r.phi_lo = std::max(r.phi_lo, min_slots(g.task_count, loads));
  }

  std::set<SlotTime> bps;
  for (ServerId m : all_servers) {
    SlotTime b = busy[static_cast<std::size_t>(m - 1)];
    if (b > r.phi_lo && b <= r.phi_hi) bps.insert(b);
  }
  r.breakpoints.assign(bps.begin(), bps.end());
  return r;
}

// Disjoint half-open intervals covering [phi_lo, phi_hi] exactly once. Within
// each interval max{phi - busy_m, 0} is linear per server.
inline std::vector<SlotInterval> subranges(const BoundsRange& bounds) {
  std::vector<SlotInterval> out;
  SlotTime start = bounds.phi_lo;
  for (SlotTime bp : bounds.breakpoints) {
    if (bp > start) {
      out.push_back({start, bp});
      start = bp;
    }
  }
  out.push_back({start, bounds.phi_hi + 1});
  return out;
}

}  // namespace lsched
