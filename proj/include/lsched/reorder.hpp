#pragma once

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include "lsched/assigners.hpp"
#include "lsched/estimation.hpp"
#include "lsched/model.hpp"

namespace lsched {

// An arrived, unfinished job: its per-group unprocessed task counts.
struct OutstandingJob {
  JobId id = 0;
  SlotTime arrival = 0;
  std::vector<TaskGroup> groups;  // remaining counts only, all > 0
};

struct ReorderResult {
  std::vector<JobId> order;
  std::vector<Assignment> assignments;  // aligned with order
  std::vector<SlotTime> phis;           // aligned with order
  long long wf_calls = 0;
};

// max_k of the minimal slots needed by group k alone against the given busy
// times; a lower bound on any assignment's completion estimate.
inline SlotTime phi_lower_bound(const Job& job, const BusyVector& busy,
                                const CapacityProfile& capacity) {
  SlotTime lo = 0;
  for (const auto& g : job.groups) {
    std::vector<ServerLoad> loads;
    loads.reserve(g.available_servers.size());
    for (ServerId m : g.available_servers) {
      loads.push_back({busy[static_cast<std::size_t>(m - 1)], capacity.mu(m, job.id)});
    }
    lo = std::max(lo, min_slots(g.task_count, loads));
  }
  return lo;
}

namespace detail {

inline Job to_job(const OutstandingJob& o) {
  Job j;
  j.id = o.id;
  j.arrival = o.arrival;
  j.groups = o.groups;
  return j;
}

// Busy-time bookkeeping between positions follows the queue estimate: each
// placed job adds ceil(assigned tasks / mu) per server.
inline void commit_assignment(const Assignment& a, JobId job, BusyVector& busy,
                              const CapacityProfile& capacity) {
  std::map<ServerId, long long> tasks;
  for (const auto& ga : a.groups) {
    for (const auto& al : ga.allocs) tasks[al.server] += al.task_count;
  }
  for (const auto& [m, t] : tasks) {
    if (t > 0) busy[static_cast<std::size_t>(m - 1)] += ceil_div(t, capacity.mu(m, job));
  }
}

}  // namespace detail

// Greedy shortest-estimated-time-first reordering of all outstanding jobs.
// With accelerate, candidates are scanned in ascending lower-bound order and
// the scan stops as soon as no remaining candidate can win; the result is
// identical to the unaccelerated scan.
inline ReorderResult ocwf_reorder(const std::vector<OutstandingJob>& outstanding,
                                  int server_count, const CapacityProfile& capacity,
                                  bool accelerate) {
  ReorderResult result;
  BusyVector busy(static_cast<std::size_t>(server_count), 0);
  std::vector<const OutstandingJob*> remaining;
  remaining.reserve(outstanding.size());
  for (const auto& o : outstanding) remaining.push_back(&o);

  while (!remaining.empty()) {
    std::size_t best = remaining.size();
    SlotTime best_phi = 0;
    Assignment best_assignment;

    auto beats = [&](SlotTime phi, const OutstandingJob& o) {
      if (best == remaining.size()) return true;
      const OutstandingJob& b = *remaining[best];
      return std::tie(phi, o.arrival, o.id) < std::tie(best_phi, b.arrival, b.id);
    };
    auto evaluate = [&](std::size_t i) {
      const OutstandingJob& o = *remaining[i];
      Job j = detail::to_job(o);
      BusyVector trial = busy;
      Assignment a = wf_core(j, trial, capacity);
      ++result.wf_calls;
      if (beats(a.phi, o)) {
        best = i;
        best_phi = a.phi;
        best_assignment = std::move(a);
      }
    };

    if (!accelerate) {
      for (std::size_t i = 0; i < remaining.size(); ++i) evaluate(i);
    } else {
      struct Ranked {
        SlotTime lb;
        SlotTime arrival;
        JobId id;
        std::size_t index;
      };
      std::vector<Ranked> ranked;
      ranked.reserve(remaining.size());
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        Job j = detail::to_job(*remaining[i]);
        ranked.push_back({phi_lower_bound(j, busy, capacity), remaining[i]->arrival,
                          remaining[i]->id, i});
      }
      std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return std::tie(a.lb, a.arrival, a.id) < std::tie(b.lb, b.arrival, b.id);
      });
      for (const Ranked& r : ranked) {
        if (best != remaining.size()) {
          const OutstandingJob& b = *remaining[best];
          if (r.lb > best_phi) break;  // early-exit: no later candidate can win
          if (r.lb == best_phi &&
              std::tie(r.arrival, r.id) > std::tie(b.arrival, b.id)) {
            continue;  // could only tie on phi and lose the tie-break
          }
        }
        evaluate(r.index);
      }
    }

    const OutstandingJob& chosen = *remaining[best];
    result.order.push_back(chosen.id);
    result.phis.push_back(best_phi);
    detail::commit_assignment(best_assignment, chosen.id, busy, capacity);
    result.assignments.push_back(std::move(best_assignment));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return result;
}

}  // namespace lsched
