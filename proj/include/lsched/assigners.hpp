#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "lsched/estimation.hpp"
#include "lsched/ilp.hpp"
#include "lsched/model.hpp"

namespace lsched {

// Per-group record of the chosen water level and the servers it reached.
struct ParticipationTrace {
  struct GroupStep {
    int group_index = 0;
    SlotTime xi = 0;
    std::vector<ServerId> participants;
  };
  std::vector<GroupStep> steps;
};

namespace detail {

// Slot solution -> task counts: every eligible server but the last receives
// its full slots * mu tasks (clamped to what is left), the last one takes the
// remainder.
inline Assignment slots_to_assignment(const Job& job, const LinearSubproblem& p,
                                      const SubSolution& sol) {
  Assignment a;
  a.phi = sol.phi;
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    const SubGroup& sg = p.groups[g];
    GroupAlloc ga;
    ga.group_index = sg.group_index;
    long long remaining = sg.demand;
    for (std::size_t e = 0; e < sg.servers.size(); ++e) {
      const SubServer& srv = p.servers[static_cast<std::size_t>(sg.servers[e])];
      SlotTime n = sol.slots[g][e];
      long long t;
      if (e + 1 == sg.servers.size()) {
        t = remaining;
      } else {
        t = std::min(n * srv.mu, remaining);
      }
      remaining -= t;
      if (t > 0) ga.allocs.push_back({srv.id, n, t});
    }
    a.groups.push_back(std::move(ga));
  }
  (void)job;
  return a;
}

inline Assignment scan_subranges(const Job& job, const BusyVector& busy,
                                 const CapacityProfile& capacity, const BoundsRange& bounds) {
  for (const SlotInterval& range : subranges(bounds)) {
    LinearSubproblem p = make_subproblem(job, busy, capacity, range);
    if (auto sol = solve_subrange(p)) {
      return slots_to_assignment(job, p, *sol);
    }
  }
  // The upper bound is always feasible, so this is unreachable.
  throw std::logic_error("subrange scan exhausted without a solution");
}

// Scan interval [start, phi_hi] split at the busy-time breakpoints of the
// job's servers, so capacity is linear within each subrange.
inline BoundsRange grid_bounds(const Job& job, const BusyVector& busy, SlotTime start,
                               SlotTime phi_hi) {
  BoundsRange bounds;
  bounds.phi_lo = start;
  bounds.phi_hi = phi_hi;
  std::set<SlotTime> bps;
  std::set<ServerId> all;
  for (const auto& g : job.groups) all.insert(g.available_servers.begin(),
                                              g.available_servers.end());
  for (ServerId m : all) {
    SlotTime b = busy[static_cast<std::size_t>(m - 1)];
    if (b > start && b <= phi_hi) bps.insert(b);
  }
  bounds.breakpoints.assign(bps.begin(), bps.end());
  return bounds;
}

}  // namespace detail

// Optimal balanced assignment: narrow to [phi_lo, phi_hi], split at busy-time
// breakpoints and solve the linear subproblems in ascending order.
inline Assignment obta_assign(const Job& job, const ClusterSnapshot& snapshot) {
  BusyVector busy = busy_vector(snapshot);
  BoundsRange bounds = phi_bounds(job, busy, snapshot.capacity);
  return detail::scan_subranges(job, busy, snapshot.capacity, bounds);
}

// Baseline without the narrowing: scans the full breakpoint set of
// [1, phi_hi] and never computes the lower bound.
inline Assignment nlip_assign(const Job& job, const ClusterSnapshot& snapshot) {
  BusyVector busy = busy_vector(snapshot);
  SlotTime hi = phi_upper(job, busy, snapshot.capacity);
  return detail::scan_subranges(job, busy, snapshot.capacity,
                                detail::grid_bounds(job, busy, 1, hi));
}

// Water-filling against an explicit busy vector; mutates it to the post-
// assignment busy times.
inline Assignment wf_core(const Job& job, BusyVector& busy, const CapacityProfile& capacity,
                          ParticipationTrace* trace = nullptr) {
  Assignment a;
  std::set<ServerId> touched;
  for (const auto& g : job.groups) {
    std::vector<ServerLoad> loads;
    loads.reserve(g.available_servers.size());
    for (ServerId m : g.available_servers) {
      loads.push_back({busy[static_cast<std::size_t>(m - 1)], capacity.mu(m, job.id)});
    }
    SlotTime xi = min_slots(g.task_count, loads);

    std::vector<ServerId> participants;
    for (ServerId m : g.available_servers) {
      if (busy[static_cast<std::size_t>(m - 1)] < xi) participants.push_back(m);
    }

    GroupAlloc ga;
    ga.group_index = g.group_index;
    long long remaining = g.task_count;
    for (std::size_t i = 0; i < participants.size(); ++i) {
      ServerId m = participants[i];
      SlotTime slots = xi - busy[static_cast<std::size_t>(m - 1)];
      long long full = slots * capacity.mu(m, job.id);
      long long t = (i + 1 == participants.size()) ? remaining : std::min(full, remaining);
      remaining -= t;
      if (t > 0) ga.allocs.push_back({m, slots, t});
    }
    for (ServerId m : participants) {
      busy[static_cast<std::size_t>(m - 1)] = xi;
      touched.insert(m);
    }
    if (trace) trace->steps.push_back({g.group_index, xi, participants});
    a.groups.push_back(std::move(ga));
  }
  SlotTime phi = 0;
  for (ServerId m : touched) phi = std::max(phi, busy[static_cast<std::size_t>(m - 1)]);
  a.phi = phi;
  return a;
}

inline std::pair<Assignment, ParticipationTrace> wf_assign(const Job& job,
                                                           const ClusterSnapshot& snapshot) {
  BusyVector busy = busy_vector(snapshot);
  ParticipationTrace trace;
  Assignment a = wf_core(job, busy, snapshot.capacity, &trace);
  return {std::move(a), std::move(trace)};
}

struct RdDeletion {
  ServerId server = 0;
  int group_index = 0;
};

namespace detail {

// Replica-deletion state. Every task starts replicated at all its available
// servers; replicas are pruned from the most loaded server first.
class RdState {
 public:
  RdState(const Job& job, const ClusterSnapshot& snapshot, std::uint64_t seed)
      : job_(&job), capacity_(&snapshot.capacity), rng_(seed) {
    int M = snapshot.server_count;
    BusyVector base = busy_vector(snapshot);
    init_busy_ = base;
    load_.assign(static_cast<std::size_t>(M), 0);
    on_server_.assign(static_cast<std::size_t>(M), {});
    for (const auto& g : job.groups) {
      for (long long i = 0; i < g.task_count; ++i) {
        int t = static_cast<int>(task_group_.size());
        task_group_.push_back(g.group_index);
        replicas_.push_back(g.available_servers);
        int count = static_cast<int>(g.available_servers.size());
        for (ServerId m : g.available_servers) {
          on_server_[idx(m)].insert({-count, t});
          load_[idx(m)] += 1;
        }
      }
    }
  }

  void run(std::vector<RdDeletion>* log) {
    deletion_phase(log);
    final_phase(log);
  }

  SlotTime phi() const {
    SlotTime phi = 0;
    for (std::size_t i = 0; i < load_.size(); ++i) {
      if (load_[i] > 0) phi = std::max(phi, busy(static_cast<ServerId>(i + 1)));
    }
    return phi;
  }

  Assignment assignment() const {
    // group_index -> server -> task count
    std::map<int, std::map<ServerId, long long>> counts;
    for (std::size_t t = 0; t < replicas_.size(); ++t) {
      counts[task_group_[t]][replicas_[t].front()] += 1;
    }
    Assignment a;
    a.phi = phi();
    for (const auto& g : job_->groups) {
      GroupAlloc ga;
      ga.group_index = g.group_index;
      if (auto it = counts.find(g.group_index); it != counts.end()) {
        for (const auto& [m, t] : it->second) {
          ga.allocs.push_back({m, ceil_div(t, capacity_->mu(m, job_->id)), t});
        }
      }
      a.groups.push_back(std::move(ga));
    }
    return a;
  }

 private:
  static std::size_t idx(ServerId m) { return static_cast<std::size_t>(m - 1); }

  SlotTime busy(ServerId m) const {
    long long l = load_[idx(m)];
    return init_busy_[idx(m)] + (l > 0 ? ceil_div(l, capacity_->mu(m, job_->id)) : 0);
  }

  int max_count_on(ServerId m) const {
    const auto& s = on_server_[idx(m)];
    return s.empty() ? 0 : -s.begin()->first;
  }

  // Among candidate servers, prefer the one holding the globally most
  // replicated task, then the largest initial busy time, then the lowest id.
  std::optional<ServerId> select_target(const std::vector<ServerId>& tier) const {
    int best_count = 0;
    for (ServerId m : tier) best_count = std::max(best_count, max_count_on(m));
    if (best_count < 2) return std::nullopt;
    std::optional<ServerId> target;
    for (ServerId m : tier) {
      if (max_count_on(m) != best_count) continue;
      if (!target || init_busy_[idx(m)] > init_busy_[idx(*target)]) target = m;
    }
    return target;
  }

  void remove_replica(int t, ServerId m, std::vector<RdDeletion>* log) {
    int old_count = static_cast<int>(replicas_[static_cast<std::size_t>(t)].size());
    auto& locs = replicas_[static_cast<std::size_t>(t)];
    locs.erase(std::find(locs.begin(), locs.end(), m));
    on_server_[idx(m)].erase({-old_count, t});
    load_[idx(m)] -= 1;
    for (ServerId m2 : locs) {
      on_server_[idx(m2)].erase({-old_count, t});
      on_server_[idx(m2)].insert({-(old_count - 1), t});
    }
    if (log) log->push_back({m, task_group_[static_cast<std::size_t>(t)]});
  }

  // Remove up to mu replicas of the most replicated tasks from the target,
  // stopping once its busy time has dropped by a slot.
  void drain_target(ServerId m, std::vector<RdDeletion>* log) {
    int mu = capacity_->mu(m, job_->id);
    SlotTime start = busy(m);
    for (int r = 0; r < mu; ++r) {
      const auto& s = on_server_[idx(m)];
      if (s.empty()) break;
      int top = -s.begin()->first;
      if (top < 2) break;
      std::vector<int> tied;
      for (auto it = s.begin(); it != s.end() && -it->first == top; ++it) {
        tied.push_back(it->second);
      }
      int t = tied[static_cast<std::size_t>(rng_() % tied.size())];
      remove_replica(t, m, log);
      if (busy(m) == start - 1) break;
    }
  }

  void deletion_phase(std::vector<RdDeletion>* log) {
    for (;;) {
      SlotTime max_busy = 0;
      for (std::size_t i = 0; i < load_.size(); ++i) {
        if (load_[i] > 0) max_busy = std::max(max_busy, busy(static_cast<ServerId>(i + 1)));
      }
      std::vector<ServerId> tier;
      for (std::size_t i = 0; i < load_.size(); ++i) {
        ServerId m = static_cast<ServerId>(i + 1);
        if (load_[i] > 0 && busy(m) == max_busy) tier.push_back(m);
      }
      auto target = select_target(tier);
      if (!target) return;  // every task on the target tier is down to one replica
      drain_target(*target, log);
    }
  }

  void final_phase(std::vector<RdDeletion>* log) {
    for (;;) {
      std::vector<ServerId> holders;
      for (std::size_t i = 0; i < load_.size(); ++i) {
        ServerId m = static_cast<ServerId>(i + 1);
        if (max_count_on(m) >= 2) holders.push_back(m);
      }
      if (holders.empty()) return;
      SlotTime max_busy = 0;
      for (ServerId m : holders) max_busy = std::max(max_busy, busy(m));
      std::vector<ServerId> tier;
      for (ServerId m : holders) {
        if (busy(m) == max_busy) tier.push_back(m);
      }
      ServerId target = *select_target(tier);
      drain_target(target, log);
    }
  }

  const Job* job_;
  const CapacityProfile* capacity_;
  std::mt19937_64 rng_;
  BusyVector init_busy_;
  std::vector<long long> load_;
  std::vector<int> task_group_;                  // per task
  std::vector<std::vector<ServerId>> replicas_;  // per task, current locations
  std::vector<std::set<std::pair<int, int>>> on_server_;  // (-replica count, task)
};

}  // namespace detail

inline Assignment rd_assign_traced(const Job& job, const ClusterSnapshot& snapshot,
                                   std::uint64_t seed, std::vector<RdDeletion>* log) {
  detail::RdState state(job, snapshot, seed);
  state.run(log);
  return state.assignment();
}

inline Assignment rd_assign(const Job& job, const ClusterSnapshot& snapshot,
                            std::uint64_t seed = 0) {
  return rd_assign_traced(job, snapshot, seed, nullptr);
}

struct TheoremInstance {
  Job job;
  ClusterSnapshot snapshot;
};

// Nested-group worst case for water-filling: |S_k| = sum_{k'=1..K-k+1} theta^k',
// |T_k| = theta * |S_k|, unit capacity, empty backlogs.
inline TheoremInstance theorem_instance(int theta, int k_count) {
  std::vector<long long> powers(static_cast<std::size_t>(k_count) + 1, 1);
  for (int i = 1; i <= k_count; ++i) powers[static_cast<std::size_t>(i)] =
      powers[static_cast<std::size_t>(i - 1)] * theta;

  TheoremInstance inst;
  long long M = 0;
  for (int i = 1; i <= k_count; ++i) M += powers[static_cast<std::size_t>(i)];
  inst.snapshot = ClusterSnapshot(static_cast<int>(M), CapacityProfile(1));
  inst.job.id = 1;
  inst.job.arrival = 0;
  for (int k = 1; k <= k_count; ++k) {
    long long size = 0;
    for (int i = 1; i <= k_count - k + 1; ++i) size += powers[static_cast<std::size_t>(i)];
    TaskGroup g;
    g.job_id = 1;
    g.group_index = k;
    g.task_count = theta * size;
    g.available_servers.resize(static_cast<std::size_t>(size));
    for (long long m = 0; m < size; ++m) g.available_servers[static_cast<std::size_t>(m)] =
        static_cast<ServerId>(m + 1);
    inst.job.groups.push_back(std::move(g));
  }
  return inst;
}

}  // namespace lsched
