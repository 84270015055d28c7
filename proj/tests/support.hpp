#pragma once

// Shared instance builders for the test suites.

#include <random>
#include <vector>

#include "lsched/lsched.hpp"

namespace testsup {

using namespace lsched;

constexpr JobId kFillerJob = -1;

// Snapshot whose per-server busy times equal the given vector, realized with a
// filler job of unit capacity.
inline ClusterSnapshot snapshot_with_busy(const std::vector<SlotTime>& busy,
                                          CapacityProfile capacity) {
  int M = static_cast<int>(busy.size());
  for (ServerId m = 1; m <= M; ++m) capacity.set(m, kFillerJob, 1);
  ClusterSnapshot snap(M, std::move(capacity));
  for (ServerId m = 1; m <= M; ++m) {
    SlotTime b = busy[static_cast<std::size_t>(m - 1)];
    if (b > 0) snap.queue(m).push_back({kFillerJob, 1, b});
  }
  return snap;
}

// The worked example used across the estimation/ilp/assigner suites:
// three unit-capacity servers with backlog (0, 1, 0), a job with
// group 1 = 3 tasks on {1,2} and group 2 = 2 tasks on {2,3}.
struct Example {
  Job job;
  ClusterSnapshot snapshot;
};

inline Example instance_a() {
  Example e;
  e.snapshot = snapshot_with_busy({0, 1, 0}, CapacityProfile(1));
  e.job.id = 7;
  e.job.arrival = 0;
  e.job.groups = {{7, 1, 3, {1, 2}}, {7, 2, 2, {2, 3}}};
  return e;
}

struct SmallInstance {
  Job job;
  ClusterSnapshot snapshot;
};

// Random instance inside the brute-force oracle's envelope: at most 4 servers,
// 3 groups with distinct server sets, 10 tasks total, mu in 1..3, backlog 0..4.
inline SmallInstance random_small_instance(std::mt19937_64& rng, bool unit_mu = false) {
  auto pick = [&](long long lo, long long hi) {
    return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  int M = static_cast<int>(pick(1, 4));
  JobId id = 7;
  CapacityProfile cap(1);
  std::vector<SlotTime> busy(static_cast<std::size_t>(M));
  for (ServerId m = 1; m <= M; ++m) {
    cap.set(m, id, unit_mu ? 1 : static_cast<int>(pick(1, 3)));
    busy[static_cast<std::size_t>(m - 1)] = pick(0, 4);
  }

  int max_k = std::min(3, (1 << M) - 1);
  int K = static_cast<int>(pick(1, max_k));
  std::vector<unsigned> masks;
  while (static_cast<int>(masks.size()) < K) {
    unsigned mask = static_cast<unsigned>(pick(1, (1 << M) - 1));
    bool dup = false;
    for (unsigned m2 : masks) dup = dup || m2 == mask;
    if (!dup) masks.push_back(mask);
  }

  long long total = pick(static_cast<long long>(K), 10);
  std::vector<long long> counts(static_cast<std::size_t>(K), 1);
  for (long long left = total - K; left > 0; --left) {
    counts[static_cast<std::size_t>(pick(0, K - 1))] += 1;
  }

  SmallInstance inst;
  inst.snapshot = snapshot_with_busy(busy, cap);
  inst.job.id = id;
  inst.job.arrival = 0;
  for (int k = 0; k < K; ++k) {
    TaskGroup g;
    g.job_id = id;
    g.group_index = k + 1;
    g.task_count = counts[static_cast<std::size_t>(k)];
    for (ServerId m = 1; m <= M; ++m) {
      if (masks[static_cast<std::size_t>(k)] & (1u << (m - 1))) g.available_servers.push_back(m);
    }
    inst.job.groups.push_back(std::move(g));
  }
  return inst;
}

// Random single job on an M-server cluster with p consecutive available
// servers per group (wrapping), used by the RD-vs-WF and desk-scale suites.
inline SmallInstance random_cluster_instance(std::mt19937_64& rng, int M, int p_min, int p_max,
                                             int mu_min, int mu_max, int groups_max,
                                             long long tasks_min, long long tasks_max) {
  auto pick = [&](long long lo, long long hi) {
    return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  JobId id = 11;
  CapacityProfile cap(mu_min);
  for (ServerId m = 1; m <= M; ++m) cap.set(m, id, static_cast<int>(pick(mu_min, mu_max)));

  SmallInstance inst;
  inst.snapshot = ClusterSnapshot(M, cap);
  inst.job.id = id;
  int K = static_cast<int>(pick(1, groups_max));
  std::map<std::vector<ServerId>, std::size_t> seen;
  for (int k = 0; k < K; ++k) {
    long long p = pick(p_min, p_max);
    long long anchor = pick(1, M);
    std::vector<ServerId> servers;
    for (long long i = 0; i < p; ++i) {
      servers.push_back(static_cast<ServerId>((anchor - 1 + i) % M + 1));
    }
    std::sort(servers.begin(), servers.end());
    long long count = pick(tasks_min, tasks_max);
    auto it = seen.find(servers);
    if (it != seen.end()) {
      inst.job.groups[it->second].task_count += count;
      continue;
    }
    TaskGroup g;
    g.job_id = id;
    g.group_index = static_cast<int>(inst.job.groups.size()) + 1;
    g.task_count = count;
    g.available_servers = std::move(servers);
    seen.emplace(g.available_servers, inst.job.groups.size());
    inst.job.groups.push_back(std::move(g));
  }
  return inst;
}

}  // namespace testsup
